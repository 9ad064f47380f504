#include <cmath>

#include "radpath/texture.hpp"

namespace radpath::texture {
namespace {

constexpr int kP = 8;
constexpr double kR = 1.0;

struct SamplePoint {
  double dx, dy;
  bool exact;  // lands on a pixel center, no interpolation
  int ix, iy;
};

const std::array<SamplePoint, kP>& sample_points() {
  static const auto pts = [] {
    std::array<SamplePoint, kP> p{};
    for (int k = 0; k < kP; ++k) {
      double angle = 2.0 * M_PI * k / kP;
      double dx = kR * std::cos(angle);
      double dy = -kR * std::sin(angle);  // image rows grow downward
      // snap the cardinal directions to exact integer offsets
      double rx = std::round(dx), ry = std::round(dy);
      bool exact = std::abs(dx - rx) < 1e-9 && std::abs(dy - ry) < 1e-9;
      p[k] = {exact ? rx : dx, exact ? ry : dy, exact, int(rx), int(ry)};
    }
    return p;
  }();
  return pts;
}

// rotation-invariant uniform code: popcount when the circular pattern has
// at most two 0/1 transitions, else P+1
int riu2_code(unsigned pattern) {
  int transitions = 0, ones = 0;
  for (int k = 0; k < kP; ++k) {
    int a = (pattern >> k) & 1;
    int b = (pattern >> ((k + 1) % kP)) & 1;
    transitions += a ^ b;
    ones += a;
  }
  return transitions <= 2 ? ones : kP + 1;
}

// Two-stage lerp: a + t*(b-a) is exact when a == b, so flat plateaus sample
// to exactly the plateau value and the s(x) >= 0 threshold cannot wobble on
// constant neighborhoods.
inline double bilinear(std::span<const float> v, int w, double fx, double fy) {
  int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
  double tx = fx - x0, ty = fy - y0;
  auto at = [&](int x, int y) { return double(v[std::size_t(y) * w + x]); };
  double top = at(x0, y0) + tx * (at(x0 + 1, y0) - at(x0, y0));
  double bot = at(x0, y0 + 1) + tx * (at(x0 + 1, y0 + 1) - at(x0, y0 + 1));
  return top + ty * (bot - top);
}

}  // namespace

LbpHistogram lbp_histogram(std::span<const float> values,
                           std::span<const uint8_t> roi, int width,
                           int height) {
  if (values.size() != std::size_t(width) * height)
    throw DataError("lbp: grid size mismatch");
  if (!roi.empty() && roi.size() != values.size())
    throw DataError("lbp: roi size mismatch");
  if (width < 3 || height < 3) throw DataError("lbp: image smaller than 3x3");

  auto in_roi = [&](int x, int y) {
    return roi.empty() || roi[std::size_t(y) * width + x] != 0;
  };
  const auto& pts = sample_points();

  LbpHistogram hist{};
  std::size_t valid = 0;
  for (int y = 1; y < height - 1; ++y)
    for (int x = 1; x < width - 1; ++x) {
      // the full 3x3 window must lie inside the ROI
      bool ok = true;
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dx = -1; dx <= 1 && ok; ++dx)
          if (!in_roi(x + dx, y + dy)) ok = false;
      if (!ok) continue;

      double center = values[std::size_t(y) * width + x];
      unsigned pattern = 0;
      for (int k = 0; k < kP; ++k) {
        double sample =
            pts[k].exact
                ? double(values[std::size_t(y + pts[k].iy) * width + x +
                                pts[k].ix])
                : bilinear(values, width, x + pts[k].dx, y + pts[k].dy);
        if (sample - center >= 0.0) pattern |= 1u << k;
      }
      hist[std::size_t(riu2_code(pattern))] += 1.0;
      ++valid;
    }

  if (valid > 0)
    for (double& h : hist) h /= double(valid);
  return hist;
}

LbpHistogram lbp_histogram(const Patch& p) {
  std::vector<float> vals(p.pixels.begin(), p.pixels.end());
  return lbp_histogram(vals, {}, p.width, p.height);
}

LbpHistogram lbp_histogram_3d(const Volume& v, const LabelMask& m,
                              uint8_t label) {
  if (v.dims != m.dims) throw DataError("lbp: volume/mask dims mismatch");
  if (v.dims.nx < 3 || v.dims.ny < 3)
    throw DataError("lbp: slices smaller than 3x3");
  LbpHistogram acc{};
  int slices = 0;
  std::vector<float> vals(std::size_t(v.dims.nx) * v.dims.ny);
  std::vector<uint8_t> roi(vals.size());
  for (int z = 0; z < v.dims.nz; ++z) {
    bool any = false;
    for (int y = 0; y < v.dims.ny; ++y)
      for (int x = 0; x < v.dims.nx; ++x) {
        std::size_t i = std::size_t(y) * v.dims.nx + x;
        vals[i] = v.at(x, y, z);
        roi[i] = m.at(x, y, z) == label;
        any |= roi[i] != 0;
      }
    if (!any) continue;
    LbpHistogram h = lbp_histogram(vals, roi, v.dims.nx, v.dims.ny);
    double total = 0;
    for (double x : h) total += x;
    if (total == 0) continue;  // region too thin in this slice
    for (int i = 0; i < kLbpBins; ++i) acc[i] += h[i];
    ++slices;
  }
  if (slices > 0)
    for (double& x : acc) x /= double(slices);
  return acc;
}

const std::array<std::string, kLbpBins>& lbp_names() {
  static const std::array<std::string, kLbpBins> n{
      "bin0", "bin1", "bin2", "bin3", "bin4",
      "bin5", "bin6", "bin7", "bin8", "bin9"};
  return n;
}

}  // namespace radpath::texture
