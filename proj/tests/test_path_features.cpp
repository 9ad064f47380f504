#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "radpath/path_features.hpp"
#include "radpath/phantom.hpp"
#include "radpath/rng.hpp"

using namespace radpath;
using namespace radpath::path;

namespace {

Patch flat_patch(int w, int h, uint8_t v) {
  Patch p;
  p.width = w;
  p.height = h;
  p.pixels.assign(std::size_t(w) * h, v);
  return p;
}

void draw_disk(Patch& p, int cx, int cy, int r, uint8_t v) {
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) p.at(x, y) = v;
}

PathConfig small_cfg() {
  PathConfig cfg;
  cfg.patches = 3;
  cfg.patch_size = 64;
  return cfg;
}

std::map<int, int> label_areas(const morph::Grid<int>& labels) {
  std::map<int, int> areas;
  for (int v : labels.v)
    if (v > 0) ++areas[v];
  return areas;
}

}  // namespace

TEST_CASE("sampling an all-dark slide accepts every candidate") {
  Patch slide = flat_patch(300, 300, 50);
  PathConfig cfg = small_cfg();
  cfg.patches = 5;
  auto patches = sample_patches(slide, cfg, 7u);
  REQUIRE(patches.size() == 5);
  for (const auto& sp : patches) {
    CHECK(sp.tissue_fraction == 1.0);
    CHECK(sp.patch.width == cfg.patch_size);
    CHECK(sp.patch.height == cfg.patch_size);
    CHECK(sp.x >= 0);
    CHECK(sp.x + cfg.patch_size <= slide.width);
  }
}

TEST_CASE("sampling an all-white slide reports the achieved count") {
  Patch slide = flat_patch(256, 256, 255);
  try {
    sample_patches(slide, small_cfg(), 7u);
    FAIL("expected a sampling failure");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("sampled patches from a half-dark slide recount to at least half tissue") {
  Patch slide = flat_patch(256, 256, 255);
  for (int y = 0; y < slide.height; ++y)
    for (int x = 0; x < slide.width / 2; ++x) slide.at(x, y) = 40;
  PathConfig cfg = small_cfg();
  cfg.patches = 6;
  auto patches = sample_patches(slide, cfg, 11u);
  REQUIRE(patches.size() == 6);
  for (const auto& sp : patches) {
    int dark = 0;
    for (uint8_t v : sp.patch.pixels) dark += (v < cfg.tissue_threshold);
    double frac = double(dark) / double(sp.patch.pixels.size());
    CHECK(frac >= cfg.min_tissue_fraction);
    CHECK(sp.tissue_fraction == doctest::Approx(frac).epsilon(1e-12));
  }
}

TEST_CASE("normalization keeps constants constant and output in range") {
  PathConfig cfg;
  Patch flat = flat_patch(64, 64, 180);
  Patch out = normalize_background(flat, cfg);
  for (uint8_t v : out.pixels) CHECK(v == out.pixels[0]);

  Rng rng(15u);
  Patch noisy = flat_patch(96, 96, 0);
  for (auto& v : noisy.pixels) v = uint8_t(rng.below(256));
  Patch nout = normalize_background(noisy, cfg);
  CHECK(nout.width == 96);
  CHECK(nout.height == 96);  // range is enforced by the uint8 type itself
}

TEST_CASE("normalization flattens a smooth ramp under dark nuclei") {
  PathConfig cfg;
  const int n = 128;
  Patch p = flat_patch(n, n, 0);
  std::vector<uint8_t> is_nucleus(std::size_t(n) * n, 0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      p.at(x, y) = uint8_t(140 + (60 * x) / (n - 1));
  for (int k = 0; k < 6; ++k) {
    int cx = 20 + (k % 3) * 40, cy = 30 + (k / 3) * 60;
    draw_disk(p, cx, cy, 6, 30);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= 36)
          is_nucleus[std::size_t(y) * n + x] = 1;
  }
  auto bg_std = [&](const Patch& img) {
    double s = 0, s2 = 0;
    int c = 0;
    for (int i = 0; i < n * n; ++i) {
      if (is_nucleus[std::size_t(i)]) continue;
      double v = img.pixels[std::size_t(i)];
      s += v;
      s2 += v * v;
      ++c;
    }
    double mean = s / c;
    return std::sqrt(std::max(0.0, s2 / c - mean * mean));
  };
  Patch out = normalize_background(p, cfg);
  CHECK(bg_std(out) * 5.0 <= bg_std(p));
}

TEST_CASE("segmentation finds nothing on a blank patch") {
  PathConfig cfg;
  Patch blank = flat_patch(96, 96, 230);
  int n = -1;
  morph::Grid<int> labels = segment_nuclei(blank, cfg, &n);
  CHECK(n == 0);
  for (int v : labels.v) CHECK(v == 0);
}

TEST_CASE("segmentation separates two disjoint disks with analytic areas") {
  PathConfig cfg;
  Patch p = flat_patch(128, 128, 245);
  draw_disk(p, 40, 64, 10, 30);
  draw_disk(p, 90, 64, 10, 30);
  int n = 0;
  morph::Grid<int> labels = segment_nuclei(p, cfg, &n);
  CHECK(n == 2);
  auto areas = label_areas(labels);
  REQUIRE(areas.size() == 2);
  for (const auto& [label, area] : areas)
    CHECK(std::abs(area - 100.0 * M_PI) <= 0.05 * 100.0 * M_PI);
}

TEST_CASE("watershed splits disks overlapping by 30 percent of radius") {
  PathConfig cfg;
  const int r = 10;
  // center distance 2r - 0.3r: the lens-shaped overlap is 30% of a radius deep
  const int d = int(std::lround(1.7 * r));
  Patch p = flat_patch(128, 128, 245);
  draw_disk(p, 55, 64, r, 30);
  draw_disk(p, 55 + d, 64, r, 30);
  int n = 0;
  morph::Grid<int> labels = segment_nuclei(p, cfg, &n);
  CHECK(n == 2);
  auto areas = label_areas(labels);
  REQUIRE(areas.size() == 2);
  // a fair split leaves each side near one disk's area
  for (const auto& [label, area] : areas) CHECK(area > 200);
}

TEST_CASE("segmentation is translation invariant away from borders") {
  PathConfig cfg;
  auto scene = [&](int ox, int oy) {
    Patch p = flat_patch(160, 160, 245);
    draw_disk(p, 50 + ox, 60 + oy, 9, 25);
    draw_disk(p, 80 + ox, 90 + oy, 12, 40);
    draw_disk(p, 110 + ox, 50 + oy, 7, 30);
    int n = 0;
    morph::Grid<int> labels = segment_nuclei(p, cfg, &n);
    std::vector<int> areas;
    for (const auto& [label, area] : label_areas(labels))
      areas.push_back(area);
    std::sort(areas.begin(), areas.end());
    return std::pair<int, std::vector<int>>(n, areas);
  };
  auto a = scene(0, 0);
  auto b = scene(5, 9);
  CHECK(a.first == 3);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("nucleus descriptors match analytic shapes") {
  PathConfig cfg;
  Patch p = flat_patch(64, 64, 200);
  morph::Grid<int> labels(64, 64, 0);
  int disk_px = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if ((x - 32) * (x - 32) + (y - 32) * (y - 32) <= 100) {
        labels.at(x, y) = 1;
        p.at(x, y) = 60;
        ++disk_px;
      }
  auto objs = nucleus_features(p, labels, 1, cfg);
  REQUIRE(objs.size() == 1);
  CHECK(objs[0].area == double(disk_px));
  CHECK(std::abs(objs[0].area - 100.0 * M_PI) <= 0.05 * 100.0 * M_PI);
  CHECK(objs[0].circularity >= 0.85);
  CHECK(objs[0].circularity <= 1.05);
  CHECK(objs[0].intensity_mean == doctest::Approx(60.0));
}

TEST_CASE("a long bar is strongly eccentric") {
  PathConfig cfg;
  Patch p = flat_patch(64, 64, 200);
  morph::Grid<int> labels(64, 64, 0);
  for (int y = 30; y < 34; ++y)
    for (int x = 20; x < 40; ++x) {
      labels.at(x, y) = 1;
      p.at(x, y) = 50;
    }
  auto objs = nucleus_features(p, labels, 1, cfg);
  REQUIRE(objs.size() == 1);
  CHECK(objs[0].eccentricity >= 0.95);
}

TEST_CASE("a constant-intensity nucleus has zero spread and zero gradient") {
  PathConfig cfg;
  Patch p = flat_patch(48, 48, 120);  // nucleus and surround share one value
  morph::Grid<int> labels(48, 48, 0);
  for (int y = 20; y < 30; ++y)
    for (int x = 20; x < 30; ++x) labels.at(x, y) = 1;
  auto objs = nucleus_features(p, labels, 1, cfg);
  REQUIRE(objs.size() == 1);
  CHECK(objs[0].intensity_std == 0.0);
  CHECK(objs[0].gradient_mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(objs[0].gradient_std == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("segmented objects keep area equal to pixel count and sane circularity") {
  PathConfig cfg;
  Rng rng(16u);
  Patch p = flat_patch(128, 128, 240);
  for (int k = 0; k < 8; ++k)
    draw_disk(p, 15 + int(rng.below(100)), 15 + int(rng.below(100)),
              4 + int(rng.below(7)), uint8_t(20 + rng.below(60)));
  int n = 0;
  morph::Grid<int> labels = segment_nuclei(p, cfg, &n);
  auto objs = nucleus_features(p, labels, n, cfg);
  auto areas = label_areas(labels);
  CHECK(int(objs.size()) == n);
  for (const auto& o : objs) {
    CHECK(o.area == double(areas[o.label]));
    CHECK(o.circularity <= 1.05);
    CHECK(o.circularity >= 0.0);
  }
}

TEST_CASE("subject extraction is deterministic and matches the audit mean") {
  phantom::PhantomSpec spec;
  spec.slide_size = 256;
  phantom::PhantomSubject subj;
  subj.id = "t";
  subj.risk_path = 0.5;
  Patch slide = phantom::phantom_slide(spec, 0, subj);

  PathConfig cfg;
  cfg.patches = 4;
  cfg.patch_size = 96;

  std::vector<PatchFeatureRow> audit_a, audit_b;
  std::vector<std::string> warn;
  auto va = extract_path(slide, cfg, 99u, &audit_a, &warn);
  auto vb = extract_path(slide, cfg, 99u, &audit_b, nullptr);
  CHECK(va == vb);  // bitwise determinism
  REQUIRE(audit_a.size() == 4);
  REQUIRE(va.size() == path_dictionary().size());

  for (std::size_t j = 0; j < va.size(); ++j) {
    double mean = 0;
    for (const auto& row : audit_a) {
      REQUIRE(row.features.size() == va.size());
      mean += row.features[j];
    }
    mean /= double(audit_a.size());
    CHECK(va[j] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("a nucleus-free slide yields zero aggregates plus a warning") {
  Patch slide = flat_patch(256, 256, 100);  // tissue but featureless
  PathConfig cfg;
  cfg.patches = 2;
  cfg.patch_size = 64;
  std::vector<PatchFeatureRow> audit;
  std::vector<std::string> warnings;
  auto v = extract_path(slide, cfg, 3u, &audit, &warnings);
  REQUIRE(v.size() == path_dictionary().size());

  bool warned = false;
  for (const auto& w : warnings)
    if (w.find("nuclei") != std::string::npos) warned = true;
  CHECK(warned);

  const auto& names = path_dictionary();
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j].rfind("slide_nuclei_", 0) == 0) CHECK(v[j] == 0.0);

  // constant slide: every patch row is identical, so the mean equals row 0
  for (std::size_t j = 0; j < v.size(); ++j)
    CHECK(v[j] == doctest::Approx(audit[0].features[j]).epsilon(1e-12));
}
