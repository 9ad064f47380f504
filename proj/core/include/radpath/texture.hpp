#pragma once
// Gray-level texture descriptors over quantized ROIs: co-occurrence,
// run-length, size-zone, neighborhood gray-tone difference, and local
// binary patterns. 3D variants aggregate over the 13 unique directions of
// the 26-neighborhood (modulo sign); 2D variants use 4 directions.

#include <array>
#include <optional>
#include <span>
#include <string>

#include "radpath/image.hpp"

namespace radpath::texture {

using Offset = std::array<int, 3>;  // {dx, dy, dz}

// 26-neighborhood directions modulo sign.
const std::array<Offset, 13>& directions_3d();
// Default in-plane set at distance 1: (1,0),(1,1),(0,1),(-1,1).
const std::array<Offset, 4>& directions_2d();

// ---------------------------------------------------------------- GLCM

struct CooccurrenceMatrix {
  int levels = 0;
  Offset direction{};
  bool symmetric = false;
  bool normalized = false;
  std::vector<double> p;  // levels*levels, row-major

  double at(int i, int j) const { return p[std::size_t(i) * levels + j]; }
  double& at(int i, int j) { return p[std::size_t(i) * levels + j]; }
  double sum() const;
  void normalize();  // divide by sum; no-op on an all-zero matrix
};

CooccurrenceMatrix glcm(const QuantizedImage& q, const Offset& dir,
                        bool symmetric);

struct HaralickFeatures {
  double energy = 0;
  double contrast = 0;
  double correlation = 0;
  double variance = 0;
  double homogeneity = 0;
  double entropy = 0;
  double dissimilarity = 0;
  double autocorrelation = 0;

  static const std::array<std::string, 8>& names();
  std::array<double, 8> values() const;
};

// Gray levels enter the moments 1-based (i = code + 1). Natural-log entropy
// with 0*log(0) = 0; zero marginal variance defines correlation = 1.
HaralickFeatures haralick_features(const CooccurrenceMatrix& m);

// Per-direction Haralick features (symmetric, normalized GLCMs) and their
// arithmetic mean. Directions with no valid pair are skipped from the mean.
struct DirectionalHaralick {
  std::vector<HaralickFeatures> per_direction;  // one per requested offset
  std::vector<bool> has_pairs;
  HaralickFeatures mean;
};

DirectionalHaralick glcm_features(const QuantizedImage& q,
                                  std::span<const Offset> dirs);
DirectionalHaralick glcm_features_3d(const QuantizedImage& q);
DirectionalHaralick glcm_features_2d(const QuantizedImage& q);

// ---------------------------------------------------------------- GLRLM

struct RunLengthMatrix {
  int levels = 0;
  int max_length = 0;
  Offset direction{};
  std::vector<double> counts;  // levels * max_length; R(g, l), l 1-based
  std::size_t n_voxels = 0;    // in-ROI voxels (for run percentage)

  double at(int g, int l) const {
    return counts[std::size_t(g) * max_length + (l - 1)];
  }
  double& at(int g, int l) {
    return counts[std::size_t(g) * max_length + (l - 1)];
  }
  double n_runs() const;
};

RunLengthMatrix glrlm(const QuantizedImage& q, const Offset& dir);

struct RunLengthFeatures {
  double sre = 0, lre = 0, gln = 0, rln = 0, rp = 0;
  double lgre = 0, hgre = 0, srlge = 0, srhge = 0, lrlge = 0, lrhge = 0;

  static const std::array<std::string, 11>& names();
  std::array<double, 11> values() const;
};

RunLengthFeatures glrlm_features(const RunLengthMatrix& m);

// Feature-averaged over directions (13 in 3D, 4 in 2D).
RunLengthFeatures glrlm_features_3d(const QuantizedImage& q);
RunLengthFeatures glrlm_features_2d(const QuantizedImage& q);

// ---------------------------------------------------------------- GLSZM

struct SizeZoneMatrix {
  int levels = 0;
  int max_size = 0;
  std::vector<double> counts;  // levels * max_size; Z(g, s), s 1-based
  std::size_t n_voxels = 0;

  double at(int g, int s) const {
    return counts[std::size_t(g) * max_size + (s - 1)];
  }
  double& at(int g, int s) {
    return counts[std::size_t(g) * max_size + (s - 1)];
  }
  double n_zones() const;
};

// Zones are connected components of equal code: 26-connectivity in 3D,
// 8-connectivity in 2D.
SizeZoneMatrix glszm(const QuantizedImage& q);

struct SizeZoneFeatures {
  double sze = 0, lze = 0, gln = 0, zsn = 0, zp = 0;
  double lgze = 0, hgze = 0, szlge = 0, szhge = 0, lzlge = 0, lzhge = 0;

  static const std::array<std::string, 11>& names();
  std::array<double, 11> values() const;
};

SizeZoneFeatures glszm_features(const QuantizedImage& q);

// ---------------------------------------------------------------- NGTDM

struct NgtdmTable {
  int levels = 0;
  std::vector<double> n;  // voxel count per level (with >=1 in-ROI neighbor)
  std::vector<double> s;  // summed |value - neighborhood mean| per level
  std::size_t n_valid = 0;
};

// Neighborhood is the full 26- (3D) / 8- (2D) neighborhood; the center is
// excluded from the neighborhood mean, and only voxels with at least one
// in-ROI neighbor participate.
NgtdmTable ngtdm(const QuantizedImage& q);

struct NgtdmFeatures {
  double coarseness = 0, contrast = 0, busyness = 0, complexity = 0,
         strength = 0;

  static const std::array<std::string, 5>& names();
  std::array<double, 5> values() const;
};

inline constexpr double kNgtdmEpsilon = 1e-6;

NgtdmFeatures ngtdm_features(const QuantizedImage& q);

// ---------------------------------------------------------------- LBP

// Rotation-invariant uniform LBP, P=8 neighbors at radius R=1 with bilinear
// interpolation for the diagonal samples; s(x) = 1 iff x >= 0. Output is the
// normalized (P+2)-bin code histogram.
inline constexpr int kLbpBins = 10;
using LbpHistogram = std::array<double, kLbpBins>;

// Generic grid form; pixels participate when their full 3x3 window lies in
// the ROI (roi empty means every pixel is in).
LbpHistogram lbp_histogram(std::span<const float> values,
                           std::span<const uint8_t> roi, int width,
                           int height);
LbpHistogram lbp_histogram(const Patch& p);

// Per-axial-slice LBP averaged over slices that contain at least one valid
// pixel of the labeled region.
LbpHistogram lbp_histogram_3d(const Volume& v, const LabelMask& m,
                              uint8_t label);

const std::array<std::string, kLbpBins>& lbp_names();

}  // namespace radpath::texture
