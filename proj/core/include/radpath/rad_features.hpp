#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "radpath/image.hpp"

namespace radpath::rad {

struct RadConfig {
  int texture_levels = 16;
  int bins = 5;       // coarse intensity-frequency bins
  int pca_hist = 32;  // histogram length fed into the projection basis
  int pca_components = 3;
};

struct Demographics {
  double age = 0;
  double gender = 0;  // F=0, M=1
};

// tumor regions feature extraction runs over, in fixed order
inline const std::array<Region, 3>& tumor_regions() {
  static const std::array<Region, 3> r{Region::kETumor, Region::kNonETumor,
                                       Region::kEdema};
  return r;
}

// base feature names: everything except the projection components, which are
// computed later from the stored histograms so their basis can be refit on
// training folds only
std::vector<std::string> rad_base_dictionary(const RadConfig& cfg);
// full dictionary: base + per sequence/region projection components
std::vector<std::string> rad_dictionary(const RadConfig& cfg);
// auxiliary columns persisted alongside features: the normalized cumulative
// histograms the projection basis is fit on
std::vector<std::string> rad_aux_dictionary(const RadConfig& cfg);

struct RadRaw {
  std::vector<double> base;   // matches rad_base_dictionary
  std::vector<double> cdf32;  // matches rad_aux_dictionary
};

// first four moments of a sample: mean, population std, skewness, excess
// kurtosis; constant samples give zero spread/shape terms
std::array<double, 4> first_order(const std::vector<float>& values);

// normalized equal-width bin frequencies over the sample range
std::vector<double> bin_frequencies(const std::vector<float>& values,
                                    int bins);

// normalized cumulative histogram over the sample range (length `bins`)
std::vector<double> cdf_histogram(const std::vector<float>& values, int bins);

RadRaw extract_rad_raw(const std::array<Volume, 4>& sequences,
                       const LabelMask& mask, const Spacing& spacing,
                       const Demographics& demo, const RadConfig& cfg,
                       std::vector<std::string>* warnings);

// ---- projection basis (principal axes of the stored histograms) ----

struct PcaBasis {
  std::vector<double> mean;                 // column means, length d
  std::vector<std::vector<double>> axes;    // k rows of length d
  std::vector<double> explained_variance;   // eigenvalues, descending
};

// fit on rows (each row length d); k axes; deterministic sign convention:
// the entry of each axis with the largest magnitude is positive
PcaBasis fit_pca(const std::vector<std::vector<double>>& rows, int k);
std::vector<double> project_pca(const PcaBasis& basis,
                                const std::vector<double>& row);

// expand base features + per-block projections into the full dictionary
// order; `bases` holds one basis per (sequence, region) block in the same
// order the aux dictionary enumerates them
std::vector<double> assemble_rad(const RadRaw& raw,
                                 const std::vector<PcaBasis>& bases,
                                 const RadConfig& cfg);

// number of (sequence, region) blocks = 4 * 3
inline constexpr int kRadBlocks = 12;

}  // namespace radpath::rad
