#pragma once
// Histogram matching by CDF inversion on a fixed grid of quantile points.
// Used to map one subject's intensity distribution onto a reference
// subject's before quantization. Optional in the pipeline; off by default.

#include <span>

#include "radpath/image.hpp"

namespace radpath {

inline constexpr int kMatchQuantilePoints = 256;

// Piecewise-linear monotone map built from paired source/reference
// quantiles; values beyond the source range clamp to the end quantiles.
struct QuantileMap {
  std::vector<double> source_q;     // kMatchQuantilePoints ascending
  std::vector<double> reference_q;  // kMatchQuantilePoints ascending

  double apply(double v) const;
};

QuantileMap fit_histogram_match(std::span<const float> source,
                                std::span<const float> reference);

// Match a full volume onto a reference volume's distribution.
Volume histogram_match(const Volume& source, const Volume& reference);

}  // namespace radpath
