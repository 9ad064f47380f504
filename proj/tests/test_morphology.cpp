#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "radpath/morphology.hpp"
#include "radpath/rng.hpp"

using namespace radpath;
using morph::Grid;

namespace {

Grid<float> random_grid(Rng& rng, int w, int h, double scale) {
  Grid<float> g(w, h);
  for (auto& v : g.v) v = float(rng.uniform() * scale);
  return g;
}

}  // namespace

TEST_CASE("reconstruction with marker equal to mask is a fixpoint") {
  Rng rng(3u);
  Grid<float> mask = random_grid(rng, 12, 9, 100.0);
  Grid<float> out = morph::reconstruct_dilation(mask, mask);
  CHECK(out.v == mask.v);
}

TEST_CASE("reconstruction from a zero marker stays zero") {
  Rng rng(4u);
  Grid<float> mask = random_grid(rng, 10, 10, 50.0);
  Grid<float> marker(10, 10, 0.0f);
  Grid<float> out = morph::reconstruct_dilation(marker, mask);
  for (float v : out.v) CHECK(v == 0.0f);
}

TEST_CASE("reconstruction matches iterated geodesic dilation on random grids") {
  Rng rng(5u);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 4 + int(rng.below(13)), h = 4 + int(rng.below(13));
    Grid<float> mask = random_grid(rng, w, h, 40.0);
    Grid<float> marker(w, h);
    for (std::size_t i = 0; i < mask.v.size(); ++i)
      marker.v[i] = float(mask.v[i] * rng.uniform());
    Grid<float> lib = morph::reconstruct_dilation(marker, mask);
    Grid<float> ref = oracle::reconstruct(marker, mask);
    CHECK(lib.v == ref.v);
  }
}

TEST_CASE("square erosion matches the brute-force window minimum") {
  Rng rng(6u);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 3 + int(rng.below(14)), h = 3 + int(rng.below(14));
    const int radius = 1 + int(rng.below(3));
    Grid<float> img = random_grid(rng, w, h, 200.0);
    Grid<float> lib = morph::erode_square(img, radius);
    Grid<float> ref = oracle::erode_square(img, radius);
    CHECK(lib.v == ref.v);
  }
}

TEST_CASE("squared edt matches the all-pairs scan") {
  Rng rng(7u);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 2 + int(rng.below(15)), h = 2 + int(rng.below(15));
    Grid<uint8_t> fg(w, h);
    for (auto& v : fg.v) v = rng.uniform() < 0.6 ? 1 : 0;
    fg.v[rng.below(fg.v.size())] = 0;  // guarantee a zero pixel
    Grid<double> lib = morph::squared_edt(fg);
    Grid<double> ref = oracle::squared_edt(fg);
    for (std::size_t i = 0; i < lib.v.size(); ++i)
      CHECK(lib.v[i] == ref.v[i]);
  }
}

TEST_CASE("otsu splits a clean bimodal sample and reports the separation") {
  std::vector<uint8_t> vals;
  for (int i = 0; i < 40; ++i) vals.push_back(10);
  for (int i = 0; i < 60; ++i) vals.push_back(200);
  morph::OtsuSplit s = morph::otsu_threshold(vals);
  CHECK(s.threshold >= 10);
  CHECK(s.threshold < 200);
  CHECK(s.mean_separation == doctest::Approx(190.0));

  std::vector<uint8_t> flat(50, 77);
  CHECK(morph::otsu_threshold(flat).mean_separation == 0.0);
}

TEST_CASE("hminima fills shallow dips and trims deep ones") {
  Grid<double> img(7, 7, 10.0);
  img.at(1, 1) = 9.0;  // depth 1
  img.at(5, 5) = 5.0;  // depth 5
  Grid<double> out = morph::hminima(img, 2.0);
  CHECK(out.at(1, 1) == doctest::Approx(10.0));
  CHECK(out.at(5, 5) == doctest::Approx(7.0));
  CHECK(out.at(3, 3) == doctest::Approx(10.0));
  // the transform never lowers a pixel and never raises one above depth
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      CHECK(out.at(x, y) >= img.at(x, y));
      CHECK(out.at(x, y) <= img.at(x, y) + 2.0);
    }
}

TEST_CASE("watershed separates two disjoint basins") {
  const int n = 40;
  Grid<uint8_t> fg(n, n, uint8_t(0));
  auto put_disk = [&](int cx, int cy, int r) {
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
          fg.at(x, y) = 1;
  };
  put_disk(12, 20, 6);
  put_disk(29, 20, 6);
  Grid<double> edt = morph::squared_edt([&] {
    Grid<uint8_t> inv(n, n, uint8_t(0));
    for (std::size_t i = 0; i < fg.v.size(); ++i) inv.v[i] = fg.v[i];
    return inv;
  }());
  Grid<double> topo(n, n, 0.0);
  for (std::size_t i = 0; i < topo.v.size(); ++i) topo.v[i] = -edt.v[i];
  Grid<int> labels = morph::watershed_labels(topo, fg);

  std::set<int> seen;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (fg.at(x, y)) {
        CHECK(labels.at(x, y) > 0);
        seen.insert(labels.at(x, y));
      } else {
        CHECK(labels.at(x, y) == 0);
      }
    }
  CHECK(seen.size() == 2);
  CHECK(labels.at(12, 20) != labels.at(29, 20));
}

TEST_CASE("connected components joins diagonal neighbors") {
  Grid<uint8_t> img(5, 5, uint8_t(0));
  img.at(0, 0) = 1;
  img.at(1, 1) = 1;  // diagonal from (0,0): same component under 8-conn
  img.at(4, 4) = 1;
  int n = 0;
  Grid<int> labels = morph::connected_components(img, &n);
  CHECK(n == 2);
  CHECK(labels.at(0, 0) == labels.at(1, 1));
  CHECK(labels.at(4, 4) != labels.at(0, 0));
  CHECK(labels.at(2, 2) == 0);
}
