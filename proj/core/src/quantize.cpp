#include "radpath/quantize.hpp"

#include <algorithm>
#include <cmath>

namespace radpath {

std::vector<int16_t> quantize_codes(std::span<const float> values,
                                    int levels) {
  if (levels < 2) throw DataError("quantize: levels must be >= 2");
  if (values.empty()) return {};
  float lo = values[0], hi = values[0];
  for (float v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<int16_t> codes(values.size());
  if (lo == hi) return codes;  // constant ROI -> all code 0
  const double width = double(hi) - double(lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double t = (double(values[i]) - double(lo)) / width * levels;
    int c = int(std::floor(t));
    codes[i] = int16_t(std::clamp(c, 0, levels - 1));
  }
  return codes;
}

QuantizedImage quantize_region(const Volume& v, const LabelMask& m,
                               uint8_t label, int levels) {
  if (v.dims != m.dims) throw DataError("quantize: volume/mask dims mismatch");
  std::vector<float> roi_values;
  std::vector<std::size_t> roi_idx;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    if (m.labels[i] == label) {
      roi_values.push_back(v.data[i]);
      roi_idx.push_back(i);
    }
  }
  if (roi_values.empty())
    throw DataError(std::string("quantize: empty region ") +
                    region_name(label));
  auto codes = quantize_codes(roi_values, levels);
  QuantizedImage q;
  q.dims = v.dims;
  q.levels = levels;
  q.codes.assign(v.dims.count(), QuantizedImage::OUTSIDE);
  for (std::size_t k = 0; k < roi_idx.size(); ++k) q.codes[roi_idx[k]] = codes[k];
  return q;
}

QuantizedImage quantize_patch(const Patch& p, int levels) {
  std::vector<float> vals(p.pixels.begin(), p.pixels.end());
  auto codes = quantize_codes(vals, levels);
  QuantizedImage q;
  q.dims = {p.width, p.height, 1};
  q.levels = levels;
  q.codes = std::move(codes);
  return q;
}

QuantizedImage quantize_grid2d(std::span<const float> values,
                               std::span<const uint8_t> roi, int width,
                               int height, int levels) {
  if (values.size() != std::size_t(width) * height ||
      roi.size() != values.size())
    throw DataError("quantize: grid size mismatch");
  std::vector<float> roi_values;
  std::vector<std::size_t> roi_idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (roi[i]) {
      roi_values.push_back(values[i]);
      roi_idx.push_back(i);
    }
  }
  if (roi_values.empty()) throw DataError("quantize: empty 2D ROI");
  auto codes = quantize_codes(roi_values, levels);
  QuantizedImage q;
  q.dims = {width, height, 1};
  q.levels = levels;
  q.codes.assign(values.size(), QuantizedImage::OUTSIDE);
  for (std::size_t k = 0; k < roi_idx.size(); ++k) q.codes[roi_idx[k]] = codes[k];
  return q;
}

}  // namespace radpath
