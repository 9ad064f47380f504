#pragma once
// Equal-width gray-level quantization over the observed value range of a
// region of interest. Top edge is inclusive; a constant ROI maps to code 0.

#include <span>

#include "radpath/image.hpp"

namespace radpath {

// code(v) = min(floor((v - min) / width * G), G - 1); constant inputs -> 0.
std::vector<int16_t> quantize_codes(std::span<const float> values, int levels);

// Quantize one labeled region of a volume; all other voxels hold OUTSIDE.
QuantizedImage quantize_region(const Volume& v, const LabelMask& m,
                               uint8_t label, int levels);

// Quantize a full 2D patch (ROI = every pixel).
QuantizedImage quantize_patch(const Patch& p, int levels);

// Quantize an arbitrary 2D ROI given parallel value/flag grids.
QuantizedImage quantize_grid2d(std::span<const float> values,
                               std::span<const uint8_t> roi, int width,
                               int height, int levels);

}  // namespace radpath
