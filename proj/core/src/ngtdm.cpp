#include <cmath>

#include "radpath/texture.hpp"

namespace radpath::texture {

NgtdmTable ngtdm(const QuantizedImage& q) {
  if (q.levels < 1) throw DataError("ngtdm: image is not quantized");
  const bool is_3d = q.dims.nz > 1;
  NgtdmTable t;
  t.levels = q.levels;
  t.n.assign(q.levels, 0.0);
  t.s.assign(q.levels, 0.0);

  for (int z = 0; z < q.dims.nz; ++z)
    for (int y = 0; y < q.dims.ny; ++y)
      for (int x = 0; x < q.dims.nx; ++x) {
        if (!q.in_roi(x, y, z)) continue;
        double sum = 0;
        int count = 0;
        const int zlo = is_3d ? -1 : 0, zhi = is_3d ? 1 : 0;
        for (int dz = zlo; dz <= zhi; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              if (!q.in_roi(x + dx, y + dy, z + dz)) continue;
              sum += q.at(x + dx, y + dy, z + dz);
              ++count;
            }
        if (count == 0) continue;  // isolated voxel: no neighborhood
        int16_t code = q.at(x, y, z);
        t.n[code] += 1.0;
        t.s[code] += std::abs(double(code) - sum / count);
        ++t.n_valid;
      }

  if (t.n_valid == 0)
    throw DataError("ngtdm: no voxel has an in-ROI neighbor");
  return t;
}

const std::array<std::string, 5>& NgtdmFeatures::names() {
  static const std::array<std::string, 5> n{"coarseness", "contrast",
                                            "busyness", "complexity",
                                            "strength"};
  return n;
}

std::array<double, 5> NgtdmFeatures::values() const {
  return {coarseness, contrast, busyness, complexity, strength};
}

NgtdmFeatures ngtdm_features(const QuantizedImage& q) {
  NgtdmTable t = ngtdm(q);
  const int g = t.levels;
  const double nv = double(t.n_valid);

  std::vector<double> p(g, 0.0);
  int levels_present = 0;
  double s_total = 0;
  for (int i = 0; i < g; ++i) {
    p[i] = t.n[i] / nv;
    if (t.n[i] > 0) ++levels_present;
    s_total += t.s[i];
  }

  NgtdmFeatures f;
  // levels are 1-based in the moments (i = code + 1)
  double ps_sum = 0;
  for (int i = 0; i < g; ++i) ps_sum += p[i] * t.s[i];
  f.coarseness = 1.0 / std::max(ps_sum, kNgtdmEpsilon);

  if (levels_present >= 2) {
    double pair = 0;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        pair += p[i] * p[j] * double(i - j) * double(i - j);
    f.contrast = pair / (double(levels_present) * (levels_present - 1)) *
                 (s_total / nv);
  }

  double denom = 0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      if (t.n[i] == 0 || t.n[j] == 0) continue;
      denom += std::abs((i + 1) * p[i] - (j + 1) * p[j]);
    }
  f.busyness = denom > 0 ? ps_sum / denom : 0.0;

  double cx = 0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      if (t.n[i] == 0 || t.n[j] == 0 || i == j) continue;
      cx += std::abs(double(i - j)) *
            (p[i] * t.s[i] + p[j] * t.s[j]) / (p[i] + p[j]);
    }
  f.complexity = cx / nv;

  double st = 0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      if (t.n[i] == 0 || t.n[j] == 0) continue;
      st += (p[i] + p[j]) * double(i - j) * double(i - j);
    }
  f.strength = st / (kNgtdmEpsilon + s_total);
  return f;
}

}  // namespace radpath::texture
