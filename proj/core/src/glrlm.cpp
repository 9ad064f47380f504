#include <algorithm>
#include <numeric>

#include "radpath/texture.hpp"

namespace radpath::texture {

double RunLengthMatrix::n_runs() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

RunLengthMatrix glrlm(const QuantizedImage& q, const Offset& dir) {
  if (q.levels < 1) throw DataError("glrlm: image is not quantized");
  const int max_len =
      std::max({q.dims.nx, q.dims.ny, q.dims.nz, 1});
  RunLengthMatrix m;
  m.levels = q.levels;
  m.max_length = max_len;
  m.direction = dir;
  m.counts.assign(std::size_t(q.levels) * max_len, 0.0);
  m.n_voxels = q.roi_count();

  // A voxel starts a run segment when its predecessor along the direction is
  // outside the grid or outside the ROI; runs also break on code change.
  for (int z = 0; z < q.dims.nz; ++z)
    for (int y = 0; y < q.dims.ny; ++y)
      for (int x = 0; x < q.dims.nx; ++x) {
        if (!q.in_roi(x, y, z)) continue;
        int px = x - dir[0], py = y - dir[1], pz = z - dir[2];
        if (q.in_roi(px, py, pz)) continue;  // interior of a segment
        // walk the segment, emitting maximal equal-code runs
        int cx = x, cy = y, cz = z;
        int16_t code = q.at(cx, cy, cz);
        int len = 0;
        while (q.in_roi(cx, cy, cz)) {
          int16_t c = q.at(cx, cy, cz);
          if (c == code) {
            ++len;
          } else {
            m.at(code, len) += 1.0;
            code = c;
            len = 1;
          }
          cx += dir[0];
          cy += dir[1];
          cz += dir[2];
        }
        m.at(code, len) += 1.0;
      }
  return m;
}

const std::array<std::string, 11>& RunLengthFeatures::names() {
  static const std::array<std::string, 11> n{
      "sre",  "lre",   "gln",   "rln",   "rp",   "lgre",
      "hgre", "srlge", "srhge", "lrlge", "lrhge"};
  return n;
}

std::array<double, 11> RunLengthFeatures::values() const {
  return {sre, lre, gln, rln, rp, lgre, hgre, srlge, srhge, lrlge, lrhge};
}

namespace {

// Shared run-length/size-zone statistics: `counts` indexed by (gray level g
// 0-based, length l 1-based); moments use 1-based gray levels i = g + 1.
std::array<double, 11> length_family_stats(const std::vector<double>& counts,
                                           int levels, int max_length,
                                           std::size_t n_voxels) {
  double nr = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::array<double, 11> out{};
  if (nr <= 0 || n_voxels == 0) return out;

  std::vector<double> by_level(levels, 0.0), by_length(max_length + 1, 0.0);
  double sre = 0, lre = 0, lgre = 0, hgre = 0;
  double srlge = 0, srhge = 0, lrlge = 0, lrhge = 0;
  for (int g = 0; g < levels; ++g) {
    const double i = g + 1;
    for (int l = 1; l <= max_length; ++l) {
      double c = counts[std::size_t(g) * max_length + (l - 1)];
      if (c == 0.0) continue;
      by_level[g] += c;
      by_length[l] += c;
      const double l2 = double(l) * l, i2 = i * i;
      sre += c / l2;
      lre += c * l2;
      lgre += c / i2;
      hgre += c * i2;
      srlge += c / (i2 * l2);
      srhge += c * i2 / l2;
      lrlge += c * l2 / i2;
      lrhge += c * i2 * l2;
    }
  }
  double gln = 0, rln = 0;
  for (double v : by_level) gln += v * v;
  for (double v : by_length) rln += v * v;

  out = {sre / nr,  lre / nr,   gln / nr,   rln / nr,
         nr / double(n_voxels), lgre / nr,  hgre / nr,
         srlge / nr, srhge / nr, lrlge / nr, lrhge / nr};
  return out;
}

RunLengthFeatures from_stats(const std::array<double, 11>& s) {
  RunLengthFeatures f;
  f.sre = s[0];
  f.lre = s[1];
  f.gln = s[2];
  f.rln = s[3];
  f.rp = s[4];
  f.lgre = s[5];
  f.hgre = s[6];
  f.srlge = s[7];
  f.srhge = s[8];
  f.lrlge = s[9];
  f.lrhge = s[10];
  return f;
}

RunLengthFeatures averaged_over(const QuantizedImage& q,
                                std::span<const Offset> dirs) {
  std::array<double, 11> acc{};
  int used = 0;
  for (const Offset& d : dirs) {
    RunLengthMatrix m = glrlm(q, d);
    if (m.n_runs() <= 0) continue;
    auto s = length_family_stats(m.counts, m.levels, m.max_length, m.n_voxels);
    for (int i = 0; i < 11; ++i) acc[i] += s[i];
    ++used;
  }
  if (used > 0)
    for (double& v : acc) v /= used;
  return from_stats(acc);
}

}  // namespace

RunLengthFeatures glrlm_features(const RunLengthMatrix& m) {
  return from_stats(
      length_family_stats(m.counts, m.levels, m.max_length, m.n_voxels));
}

RunLengthFeatures glrlm_features_3d(const QuantizedImage& q) {
  const auto& d = directions_3d();
  return averaged_over(q, std::span<const Offset>(d.data(), d.size()));
}

RunLengthFeatures glrlm_features_2d(const QuantizedImage& q) {
  const auto& d = directions_2d();
  return averaged_over(q, std::span<const Offset>(d.data(), d.size()));
}

const std::array<std::string, 11>& SizeZoneFeatures::names() {
  static const std::array<std::string, 11> n{
      "sze",  "lze",   "gln",   "zsn",   "zp",   "lgze",
      "hgze", "szlge", "szhge", "lzlge", "lzhge"};
  return n;
}

std::array<double, 11> SizeZoneFeatures::values() const {
  return {sze, lze, gln, zsn, zp, lgze, hgze, szlge, szhge, lzlge, lzhge};
}

SizeZoneFeatures glszm_features(const QuantizedImage& q) {
  SizeZoneMatrix m = glszm(q);
  auto s = length_family_stats(m.counts, m.levels, m.max_size, m.n_voxels);
  SizeZoneFeatures f;
  f.sze = s[0];
  f.lze = s[1];
  f.gln = s[2];
  f.zsn = s[3];
  f.zp = s[4];
  f.lgze = s[5];
  f.hgze = s[6];
  f.szlge = s[7];
  f.szhge = s[8];
  f.lzlge = s[9];
  f.lzhge = s[10];
  return f;
}

}  // namespace radpath::texture
