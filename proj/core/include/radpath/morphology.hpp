#pragma once
// 2D grayscale/binary morphology primitives used by nuclei segmentation:
// reconstruction by dilation (fast hybrid algorithm), flat erosion, exact
// Euclidean distance transform, Otsu thresholding, and a marker-based
// watershed with h-minima suppression.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "radpath/image.hpp"

namespace radpath::morph {

// Small owning 2D grid of T used by the intermediate transforms.
template <typename T>
struct Grid {
  int width = 0, height = 0;
  std::vector<T> v;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), v(std::size_t(w) * h, fill) {}
  T at(int x, int y) const { return v[std::size_t(y) * width + x]; }
  T& at(int x, int y) { return v[std::size_t(y) * width + x]; }
  bool inside(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  std::size_t size() const { return v.size(); }
};

// Morphological reconstruction by dilation under 8-connectivity: grows
// `marker` inside `mask` until stable; equals the limit of iterated 3x3
// geodesic dilations. Requires marker <= mask pointwise.
Grid<float> reconstruct_dilation(const Grid<float>& marker,
                                 const Grid<float>& mask);

// Flat erosion (local minimum) over a (2r+1)x(2r+1) square window,
// separable van Herk/Gil-Werman sweeps; border handled by clamping.
Grid<float> erode_square(const Grid<float>& img, int radius);

// Exact squared Euclidean distance to the nearest zero pixel
// (Felzenszwalb-Huttenlocher lower-envelope transform).
Grid<double> squared_edt(const Grid<uint8_t>& foreground);

// Otsu threshold over a 256-bin histogram of 8-bit values. Returns the
// level t maximizing between-class variance (foreground = values <= t) and
// the separation between class means; degenerate inputs give separation 0.
struct OtsuSplit {
  int threshold = 0;
  double mean_separation = 0;
};
OtsuSplit otsu_threshold(std::span<const uint8_t> values);

// Suppress local minima shallower than `depth` (h-minima transform),
// implemented through reconstruction by dilation on the complement.
Grid<double> hminima(const Grid<double>& img, double depth);

// Watershed by flooding from the regional minima of `topo`, restricted to
// foreground pixels. Every foreground pixel receives a positive label;
// background stays 0. Deterministic: ties flood in linear-index order.
Grid<int> watershed_labels(const Grid<double>& topo,
                           const Grid<uint8_t>& foreground);

// 8-connected components of nonzero pixels, labeled 1..n in scan order.
Grid<int> connected_components(const Grid<uint8_t>& binary, int* n_labels);

}  // namespace radpath::morph
