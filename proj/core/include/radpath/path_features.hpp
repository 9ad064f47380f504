#pragma once
// Histology feature pipeline: tissue-aware patch sampling from a whole
// slide, illumination normalization, nuclei segmentation (Otsu + distance
// watershed), per-nucleus morphometrics, and subject-level aggregation.

#include <optional>
#include <string>
#include <vector>

#include "radpath/image.hpp"
#include "radpath/morphology.hpp"
#include "radpath/texture.hpp"

namespace radpath::path {

struct PathConfig {
  int patches = 100;            // patches sampled per slide
  int patch_size = 1024;        // square patch edge, pixels
  int tissue_threshold = 220;   // pixel < threshold counts as tissue
  double min_tissue_fraction = 0.5;
  int background_radius = 25;   // erosion window radius for normalization
  int min_nucleus_area = 30;    // px; smaller components are dropped
  double hmin_depth = 2.0;      // h-minima suppression before watershed
  double otsu_min_contrast = 40.0;  // required class-mean separation
  int texture_levels = 16;      // gray levels for patch/chromatin texture
};

struct SampledPatch {
  Patch patch;
  int x = 0, y = 0;  // top-left corner in slide coordinates
  double tissue_fraction = 0;
};

// Seeded rejection sampling of axis-aligned patches whose tissue fraction
// (pixels below the tissue threshold) reaches the minimum. Throws DataError
// when the attempt budget cannot reach the requested count.
std::vector<SampledPatch> sample_patches(const Patch& slide,
                                         const PathConfig& cfg,
                                         uint64_t seed);

// Illumination normalization: top-hat by reconstruction on the intensity
// complement. Dark structures keep their contrast; smooth background
// variation flattens to white. Output range is [0, 255].
Patch normalize_background(const Patch& patch, const PathConfig& cfg);

// Nuclei segmentation on a normalized patch: Otsu picks the dark
// foreground (subject to a minimum class separation), components under the
// area floor are dropped, and touching nuclei are split by watershed on the
// negated Euclidean distance transform with h-minima suppression.
// Returns a label grid (0 = background, 1..n = nuclei).
morph::Grid<int> segment_nuclei(const Patch& normalized,
                                const PathConfig& cfg, int* n_nuclei);

struct NucleusObject {
  int label = 0;
  double area = 0;          // px
  double perimeter = 0;     // boundary chain length (diagonals sqrt(2))
  double circularity = 0;   // 4*pi*A / P^2
  double eccentricity = 0;  // from second central moments
  double intensity_mean = 0, intensity_std = 0;
  double gradient_mean = 0, gradient_std = 0;  // Sobel magnitude
  texture::HaralickFeatures chromatin;  // co-occurrence stats inside nucleus
};

// Per-nucleus descriptors measured on the normalized patch.
std::vector<NucleusObject> nucleus_features(const Patch& normalized,
                                            const morph::Grid<int>& labels,
                                            int n_nuclei,
                                            const PathConfig& cfg);

// One row per patch for the audit trail.
struct PatchFeatureRow {
  int patch_id = 0;
  int x = 0, y = 0;
  double tissue_fraction = 0;
  double nuclei_count = 0;
  std::vector<double> features;  // per-patch slice of path_dictionary()
};

// Canonical feature names: per-nucleus stats aggregated over nuclei
// (mean/std/median), nuclei count, then whole-patch texture families.
const std::vector<std::string>& path_dictionary();
const std::vector<std::string>& nucleus_feature_names();

// Per-patch feature vector (aggregates over this patch's nuclei + patch
// texture). `warn` collects non-fatal messages (e.g. zero nuclei).
PatchFeatureRow patch_features(const SampledPatch& sp, int patch_id,
                               const PathConfig& cfg,
                               std::vector<std::string>* warn);

// Subject-level vector: mean over patches, in path_dictionary() order.
std::vector<double> extract_path(const Patch& slide, const PathConfig& cfg,
                                 uint64_t seed,
                                 std::vector<PatchFeatureRow>* audit,
                                 std::vector<std::string>* warnings);

}  // namespace radpath::path
