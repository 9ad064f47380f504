#include "radpath/path_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radpath/quantize.hpp"
#include "radpath/rng.hpp"

namespace radpath::path {
namespace {

double tissue_fraction_of(const Patch& slide, int x0, int y0, int size,
                          int threshold) {
  std::size_t tissue = 0;
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x)
      tissue += slide.at(x, y) < threshold;
  return double(tissue) / (double(size) * size);
}

Patch crop(const Patch& slide, int x0, int y0, int size) {
  Patch p;
  p.width = p.height = size;
  p.pixels.resize(std::size_t(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) p.at(x, y) = slide.at(x0 + x, y0 + y);
  return p;
}

}  // namespace

std::vector<SampledPatch> sample_patches(const Patch& slide,
                                         const PathConfig& cfg,
                                         uint64_t seed) {
  if (cfg.patches < 1) throw DataError("sample_patches: patches must be >= 1");
  if (slide.width < cfg.patch_size || slide.height < cfg.patch_size)
    throw DataError("sample_patches: slide smaller than patch size");

  const int max_x = slide.width - cfg.patch_size;
  const int max_y = slide.height - cfg.patch_size;
  const long budget = 200L * cfg.patches;

  Rng rng(seed);
  std::vector<SampledPatch> out;
  out.reserve(cfg.patches);
  for (long attempt = 0; attempt < budget && int(out.size()) < cfg.patches;
       ++attempt) {
    int x0 = int(rng.below(uint64_t(max_x) + 1));
    int y0 = int(rng.below(uint64_t(max_y) + 1));
    double frac = tissue_fraction_of(slide, x0, y0, cfg.patch_size,
                                     cfg.tissue_threshold);
    if (frac < cfg.min_tissue_fraction) continue;
    SampledPatch sp;
    sp.patch = crop(slide, x0, y0, cfg.patch_size);
    sp.x = x0;
    sp.y = y0;
    sp.tissue_fraction = frac;
    out.push_back(std::move(sp));
  }
  if (int(out.size()) < cfg.patches)
    throw DataError("sample_patches: only " + std::to_string(out.size()) +
                    " of " + std::to_string(cfg.patches) +
                    " patches reached tissue fraction " +
                    std::to_string(cfg.min_tissue_fraction) +
                    " within the attempt budget");
  return out;
}

Patch normalize_background(const Patch& patch, const PathConfig& cfg) {
  const int w = patch.width, h = patch.height;
  // work on the complement so nuclei become peaks over a dark background
  morph::Grid<float> inv(w, h);
  for (std::size_t i = 0; i < inv.size(); ++i)
    inv.v[i] = float(255 - patch.pixels[i]);
  morph::Grid<float> marker = morph::erode_square(inv, cfg.background_radius);
  morph::Grid<float> bg = morph::reconstruct_dilation(marker, inv);
  // top-hat: what the background reconstruction cannot explain
  Patch out;
  out.width = w;
  out.height = h;
  out.pixels.resize(inv.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    double dome = double(inv.v[i]) - double(bg.v[i]);
    double v = 255.0 - std::clamp(dome, 0.0, 255.0);
    out.pixels[i] = uint8_t(std::lround(v));
  }
  return out;
}

morph::Grid<int> segment_nuclei(const Patch& normalized,
                                const PathConfig& cfg, int* n_nuclei) {
  const int w = normalized.width, h = normalized.height;
  morph::Grid<int> empty(w, h, 0);

  morph::OtsuSplit split = morph::otsu_threshold(normalized.pixels);
  if (split.mean_separation < cfg.otsu_min_contrast) {
    if (n_nuclei) *n_nuclei = 0;
    return empty;
  }

  morph::Grid<uint8_t> fg(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      fg.at(x, y) = normalized.at(x, y) <= split.threshold;

  // area floor: drop debris components
  int n_comp = 0;
  morph::Grid<int> comp = morph::connected_components(fg, &n_comp);
  std::vector<int> area(std::size_t(n_comp) + 1, 0);
  for (std::size_t i = 0; i < comp.size(); ++i) ++area[comp.v[i]];
  bool any = false;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    if (comp.v[i] != 0 && area[comp.v[i]] < cfg.min_nucleus_area)
      fg.v[i] = 0;
    any |= fg.v[i] != 0;
  }
  if (!any) {
    if (n_nuclei) *n_nuclei = 0;
    return empty;
  }

  // split touching nuclei: watershed on the negated distance transform
  morph::Grid<double> d2 = morph::squared_edt(fg);
  morph::Grid<double> topo(w, h);
  for (std::size_t i = 0; i < topo.size(); ++i)
    topo.v[i] = -std::sqrt(d2.v[i]);
  topo = morph::hminima(topo, cfg.hmin_depth);
  morph::Grid<int> labels = morph::watershed_labels(topo, fg);

  int n = 0;
  for (int v : labels.v) n = std::max(n, v);
  if (n_nuclei) *n_nuclei = n;
  return labels;
}

namespace {

// Moore-neighbor boundary tracing; returns the chain length with diagonal
// steps weighted sqrt(2).
double boundary_chain_length(const morph::Grid<int>& labels, int label,
                             int start_x, int start_y) {
  // clockwise Moore neighborhood starting at West
  static const int dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static const int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  auto is_fg = [&](int x, int y) {
    return labels.inside(x, y) && labels.at(x, y) == label;
  };

  // single-pixel shortcut
  bool lonely = true;
  for (int k = 0; k < 8 && lonely; ++k)
    lonely = !is_fg(start_x + dx[k], start_y + dy[k]);
  if (lonely) return 1.0;

  int cx = start_x, cy = start_y;
  // entering from the West is safe for the scan-order first pixel
  int backtrack = 0;
  double length = 0;
  const int first_x = cx, first_y = cy;
  int first_move = -1;
  long guard = 8L * labels.width * labels.height;
  while (guard-- > 0) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      int dir = (backtrack + k) % 8;
      if (is_fg(cx + dx[dir], cy + dy[dir])) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // unreachable: lonely pixels returned above
    if (first_move < 0)
      first_move = found;
    else if (cx == first_x && cy == first_y && found == first_move)
      break;  // closed the loop with the same initial move
    cx += dx[found];
    cy += dy[found];
    length += (dx[found] != 0 && dy[found] != 0) ? std::numbers::sqrt2 : 1.0;
    // next search starts just past the pixel we came from
    backtrack = (found + 5) % 8;
  }
  return std::max(length, 1.0);
}

double vec_mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double vec_std(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double m = vec_mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

double vec_median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sobel_magnitude(const Patch& p, int x, int y) {
  auto at = [&](int xx, int yy) {
    return double(p.at(std::clamp(xx, 0, p.width - 1),
                       std::clamp(yy, 0, p.height - 1)));
  };
  double gx = -at(x - 1, y - 1) + at(x + 1, y - 1) - 2 * at(x - 1, y) +
              2 * at(x + 1, y) - at(x - 1, y + 1) + at(x + 1, y + 1);
  double gy = -at(x - 1, y - 1) - 2 * at(x, y - 1) - at(x + 1, y - 1) +
              at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1);
  return std::sqrt(gx * gx + gy * gy);
}

}  // namespace

std::vector<NucleusObject> nucleus_features(const Patch& normalized,
                                            const morph::Grid<int>& labels,
                                            int n_nuclei,
                                            const PathConfig& cfg) {
  const int w = normalized.width, h = normalized.height;
  struct Acc {
    long n = 0;
    long sx = 0, sy = 0;
    int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
    int first_x = -1, first_y = -1;  // scan-order first pixel
  };
  std::vector<Acc> acc(std::size_t(n_nuclei) + 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int l = labels.at(x, y);
      if (l <= 0) continue;
      Acc& a = acc[l];
      if (a.first_x < 0) {
        a.first_x = x;
        a.first_y = y;
      }
      ++a.n;
      a.sx += x;
      a.sy += y;
      a.min_x = std::min(a.min_x, x);
      a.min_y = std::min(a.min_y, y);
      a.max_x = std::max(a.max_x, x);
      a.max_y = std::max(a.max_y, y);
    }

  std::vector<NucleusObject> out;
  out.reserve(std::size_t(n_nuclei));
  for (int l = 1; l <= n_nuclei; ++l) {
    const Acc& a = acc[l];
    if (a.n == 0) continue;
    NucleusObject nuc;
    nuc.label = l;
    nuc.area = double(a.n);
    nuc.perimeter =
        boundary_chain_length(labels, l, a.first_x, a.first_y);
    nuc.circularity =
        4.0 * std::numbers::pi * nuc.area / (nuc.perimeter * nuc.perimeter);

    // second central moments for eccentricity
    const double cx = double(a.sx) / a.n, cy = double(a.sy) / a.n;
    double m20 = 0, m02 = 0, m11 = 0;
    std::vector<double> intensities, gradients;
    intensities.reserve(std::size_t(a.n));
    gradients.reserve(std::size_t(a.n));
    const int bw = a.max_x - a.min_x + 1, bh = a.max_y - a.min_y + 1;
    std::vector<float> box_vals(std::size_t(bw) * bh, 0.f);
    std::vector<uint8_t> box_roi(box_vals.size(), 0);
    for (int y = a.min_y; y <= a.max_y; ++y)
      for (int x = a.min_x; x <= a.max_x; ++x) {
        std::size_t bi =
            std::size_t(y - a.min_y) * bw + std::size_t(x - a.min_x);
        box_vals[bi] = float(normalized.at(x, y));
        if (labels.at(x, y) != l) continue;
        box_roi[bi] = 1;
        m20 += (x - cx) * (x - cx);
        m02 += (y - cy) * (y - cy);
        m11 += (x - cx) * (y - cy);
        intensities.push_back(double(normalized.at(x, y)));
        gradients.push_back(sobel_magnitude(normalized, x, y));
      }
    double tr = m20 + m02;
    double det = std::sqrt((m20 - m02) * (m20 - m02) + 4.0 * m11 * m11);
    double l1 = 0.5 * (tr + det), l2 = 0.5 * (tr - det);
    nuc.eccentricity = l1 > 0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;

    nuc.intensity_mean = vec_mean(intensities);
    nuc.intensity_std = vec_std(intensities);
    nuc.gradient_mean = vec_mean(gradients);
    nuc.gradient_std = vec_std(gradients);

    QuantizedImage q = quantize_grid2d(box_vals, box_roi, bw, bh,
                                       cfg.texture_levels);
    nuc.chromatin = texture::glcm_features_2d(q).mean;
    out.push_back(nuc);
  }
  return out;
}

const std::vector<std::string>& nucleus_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{
        "area",           "perimeter",     "circularity",
        "eccentricity",   "intensity_mean", "intensity_std",
        "gradient_mean",  "gradient_std"};
    for (const auto& h : texture::HaralickFeatures::names())
      n.push_back("chromatin_" + h);
    return n;
  }();
  return names;
}

const std::vector<std::string>& path_dictionary() {
  static const std::vector<std::string> dict = [] {
    std::vector<std::string> d;
    for (const auto& f : nucleus_feature_names())
      for (const char* agg : {"mean", "std", "median"})
        d.push_back("slide_nuclei_" + f + "_" + agg);
    d.push_back("slide_nuclei_count_mean");
    for (const auto& n : texture::HaralickFeatures::names())
      d.push_back("slide_patch_glcm_" + n);
    for (const auto& n : texture::RunLengthFeatures::names())
      d.push_back("slide_patch_glrlm_" + n);
    for (const auto& n : texture::SizeZoneFeatures::names())
      d.push_back("slide_patch_glszm_" + n);
    for (const auto& n : texture::NgtdmFeatures::names())
      d.push_back("slide_patch_ngtdm_" + n);
    for (const auto& n : texture::lbp_names())
      d.push_back("slide_patch_lbp_" + n);
    return d;
  }();
  return dict;
}

namespace {

std::vector<double> nucleus_matrix_column(
    const std::vector<NucleusObject>& nuclei, std::size_t col) {
  std::vector<double> v;
  v.reserve(nuclei.size());
  for (const auto& n : nuclei) {
    std::array<double, 8> chrom = n.chromatin.values();
    double x = 0;
    switch (col) {
      case 0: x = n.area; break;
      case 1: x = n.perimeter; break;
      case 2: x = n.circularity; break;
      case 3: x = n.eccentricity; break;
      case 4: x = n.intensity_mean; break;
      case 5: x = n.intensity_std; break;
      case 6: x = n.gradient_mean; break;
      case 7: x = n.gradient_std; break;
      default: x = chrom[col - 8]; break;
    }
    v.push_back(x);
  }
  return v;
}

}  // namespace

PatchFeatureRow patch_features(const SampledPatch& sp, int patch_id,
                               const PathConfig& cfg,
                               std::vector<std::string>* warn) {
  PatchFeatureRow row;
  row.patch_id = patch_id;
  row.x = sp.x;
  row.y = sp.y;
  row.tissue_fraction = sp.tissue_fraction;

  Patch norm = normalize_background(sp.patch, cfg);
  int n_nuclei = 0;
  morph::Grid<int> labels = segment_nuclei(norm, cfg, &n_nuclei);
  std::vector<NucleusObject> nuclei =
      nucleus_features(norm, labels, n_nuclei, cfg);
  row.nuclei_count = double(nuclei.size());
  if (nuclei.empty() && warn)
    warn->push_back("patch " + std::to_string(patch_id) +
                    ": no nuclei segmented; aggregates default to 0");

  const std::size_t n_names = nucleus_feature_names().size();
  row.features.reserve(path_dictionary().size());
  for (std::size_t c = 0; c < n_names; ++c) {
    std::vector<double> col = nucleus_matrix_column(nuclei, c);
    row.features.push_back(vec_mean(col));
    row.features.push_back(vec_std(col));
    row.features.push_back(vec_median(col));
  }
  row.features.push_back(row.nuclei_count);

  QuantizedImage q = quantize_patch(norm, cfg.texture_levels);
  for (double v : texture::glcm_features_2d(q).mean.values())
    row.features.push_back(v);
  for (double v : texture::glrlm_features_2d(q).values())
    row.features.push_back(v);
  for (double v : texture::glszm_features(q).values())
    row.features.push_back(v);
  for (double v : texture::ngtdm_features(q).values())
    row.features.push_back(v);
  for (double v : texture::lbp_histogram(norm)) row.features.push_back(v);

  if (row.features.size() != path_dictionary().size())
    throw NumericError("patch feature vector does not match dictionary");
  return row;
}

std::vector<double> extract_path(const Patch& slide, const PathConfig& cfg,
                                 uint64_t seed,
                                 std::vector<PatchFeatureRow>* audit,
                                 std::vector<std::string>* warnings) {
  std::vector<SampledPatch> patches = sample_patches(slide, cfg, seed);
  std::vector<double> mean(path_dictionary().size(), 0.0);
  int id = 0;
  for (const SampledPatch& sp : patches) {
    PatchFeatureRow row = patch_features(sp, id++, cfg, warnings);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row.features[i];
    if (audit) audit->push_back(std::move(row));
  }
  for (double& v : mean) v /= double(patches.size());
  return mean;
}

}  // namespace radpath::path
