#include <numeric>

#include "radpath/texture.hpp"

namespace radpath::texture {

double SizeZoneMatrix::n_zones() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

SizeZoneMatrix glszm(const QuantizedImage& q) {
  if (q.levels < 1) throw DataError("glszm: image is not quantized");
  const bool is_3d = q.dims.nz > 1;
  const std::size_t total = q.dims.count();

  // first pass: flood-fill zone sizes (26-/8-connectivity)
  std::vector<int> zone_size;
  std::vector<int16_t> zone_level;
  std::vector<uint8_t> seen(total, 0);
  std::vector<std::size_t> stack;
  for (int z0 = 0; z0 < q.dims.nz; ++z0)
    for (int y0 = 0; y0 < q.dims.ny; ++y0)
      for (int x0 = 0; x0 < q.dims.nx; ++x0) {
        std::size_t start = q.index(x0, y0, z0);
        if (seen[start] || q.codes[start] == QuantizedImage::OUTSIDE) continue;
        const int16_t code = q.codes[start];
        int size = 0;
        seen[start] = 1;
        stack.assign(1, start);
        while (!stack.empty()) {
          std::size_t idx = stack.back();
          stack.pop_back();
          ++size;
          int z = int(idx / (std::size_t(q.dims.nx) * q.dims.ny));
          std::size_t rem = idx % (std::size_t(q.dims.nx) * q.dims.ny);
          int y = int(rem / q.dims.nx);
          int x = int(rem % q.dims.nx);
          const int zlo = is_3d ? -1 : 0, zhi = is_3d ? 1 : 0;
          for (int dz = zlo; dz <= zhi; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                int nx = x + dx, ny = y + dy, nz = z + dz;
                if (!q.inside(nx, ny, nz)) continue;
                std::size_t nidx = q.index(nx, ny, nz);
                if (seen[nidx] || q.codes[nidx] != code) continue;
                seen[nidx] = 1;
                stack.push_back(nidx);
              }
        }
        zone_size.push_back(size);
        zone_level.push_back(code);
      }

  int max_size = 1;
  for (int s : zone_size) max_size = std::max(max_size, s);

  SizeZoneMatrix m;
  m.levels = q.levels;
  m.max_size = max_size;
  m.counts.assign(std::size_t(q.levels) * max_size, 0.0);
  m.n_voxels = q.roi_count();
  for (std::size_t k = 0; k < zone_size.size(); ++k)
    m.at(zone_level[k], zone_size[k]) += 1.0;
  return m;
}

}  // namespace radpath::texture
