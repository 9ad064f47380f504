#include <cmath>
#include <numeric>

#include "radpath/texture.hpp"

namespace radpath::texture {

const std::array<Offset, 13>& directions_3d() {
  static const std::array<Offset, 13> dirs{{
      {1, 0, 0},
      {0, 1, 0},
      {0, 0, 1},
      {1, 1, 0},
      {1, -1, 0},
      {1, 0, 1},
      {1, 0, -1},
      {0, 1, 1},
      {0, 1, -1},
      {1, 1, 1},
      {1, 1, -1},
      {1, -1, 1},
      {1, -1, -1},
  }};
  return dirs;
}

const std::array<Offset, 4>& directions_2d() {
  static const std::array<Offset, 4> dirs{{
      {1, 0, 0},
      {1, 1, 0},
      {0, 1, 0},
      {-1, 1, 0},
  }};
  return dirs;
}

double CooccurrenceMatrix::sum() const {
  return std::accumulate(p.begin(), p.end(), 0.0);
}

void CooccurrenceMatrix::normalize() {
  if (normalized) return;
  double s = sum();
  if (s > 0)
    for (double& v : p) v /= s;
  normalized = true;
}

CooccurrenceMatrix glcm(const QuantizedImage& q, const Offset& dir,
                        bool symmetric) {
  if (q.levels < 1) throw DataError("glcm: image is not quantized");
  CooccurrenceMatrix m;
  m.levels = q.levels;
  m.direction = dir;
  m.symmetric = symmetric;
  m.p.assign(std::size_t(q.levels) * q.levels, 0.0);
  for (int z = 0; z < q.dims.nz; ++z)
    for (int y = 0; y < q.dims.ny; ++y)
      for (int x = 0; x < q.dims.nx; ++x) {
        int16_t a = q.at(x, y, z);
        if (a == QuantizedImage::OUTSIDE) continue;
        int nx = x + dir[0], ny = y + dir[1], nz = z + dir[2];
        if (!q.in_roi(nx, ny, nz)) continue;
        int16_t b = q.at(nx, ny, nz);
        m.at(a, b) += 1.0;
        if (symmetric) m.at(b, a) += 1.0;
      }
  return m;
}

const std::array<std::string, 8>& HaralickFeatures::names() {
  static const std::array<std::string, 8> n{
      "energy",       "contrast",      "correlation", "variance",
      "homogeneity",  "entropy",       "dissimilarity", "autocorrelation"};
  return n;
}

std::array<double, 8> HaralickFeatures::values() const {
  return {energy,      contrast, correlation,   variance,
          homogeneity, entropy,  dissimilarity, autocorrelation};
}

HaralickFeatures haralick_features(const CooccurrenceMatrix& m) {
  CooccurrenceMatrix norm = m;
  norm.normalize();
  const int g = norm.levels;
  // marginal over rows; levels are 1-based in the moments (i = code + 1)
  std::vector<double> px(g, 0.0), py(g, 0.0);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      px[i] += norm.at(i, j);
      py[j] += norm.at(i, j);
    }
  double mux = 0, muy = 0;
  for (int i = 0; i < g; ++i) {
    mux += (i + 1) * px[i];
    muy += (i + 1) * py[i];
  }
  double varx = 0, vary = 0;
  for (int i = 0; i < g; ++i) {
    varx += (i + 1 - mux) * (i + 1 - mux) * px[i];
    vary += (i + 1 - muy) * (i + 1 - muy) * py[i];
  }

  HaralickFeatures f;
  double cross = 0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      double p = norm.at(i, j);
      if (p == 0.0) continue;
      double d = double(i - j);
      f.energy += p * p;
      f.contrast += d * d * p;
      f.variance += (i + 1 - mux) * (i + 1 - mux) * p;
      f.homogeneity += p / (1.0 + d * d);
      f.entropy -= p * std::log(p);
      f.dissimilarity += std::abs(d) * p;
      f.autocorrelation += double(i + 1) * double(j + 1) * p;
      cross += double(i + 1) * double(j + 1) * p;
    }
  double sd = std::sqrt(varx * vary);
  // a single occupied gray level is perfectly correlated by convention
  f.correlation = sd > 0 ? (cross - mux * muy) / sd : 1.0;
  return f;
}

DirectionalHaralick glcm_features(const QuantizedImage& q,
                                  std::span<const Offset> dirs) {
  DirectionalHaralick out;
  out.per_direction.resize(dirs.size());
  out.has_pairs.resize(dirs.size(), false);
  std::array<double, 8> acc{};
  int used = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    CooccurrenceMatrix m = glcm(q, dirs[k], /*symmetric=*/true);
    if (m.sum() > 0) {
      out.has_pairs[k] = true;
      out.per_direction[k] = haralick_features(m);
      auto vals = out.per_direction[k].values();
      for (int i = 0; i < 8; ++i) acc[i] += vals[i];
      ++used;
    }
  }
  if (used > 0) {
    HaralickFeatures& mean = out.mean;
    mean.energy = acc[0] / used;
    mean.contrast = acc[1] / used;
    mean.correlation = acc[2] / used;
    mean.variance = acc[3] / used;
    mean.homogeneity = acc[4] / used;
    mean.entropy = acc[5] / used;
    mean.dissimilarity = acc[6] / used;
    mean.autocorrelation = acc[7] / used;
  }
  return out;
}

DirectionalHaralick glcm_features_3d(const QuantizedImage& q) {
  const auto& d = directions_3d();
  return glcm_features(q, std::span<const Offset>(d.data(), d.size()));
}

DirectionalHaralick glcm_features_2d(const QuantizedImage& q) {
  const auto& d = directions_2d();
  return glcm_features(q, std::span<const Offset>(d.data(), d.size()));
}

}  // namespace radpath::texture
