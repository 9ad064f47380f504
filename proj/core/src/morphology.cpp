#include "radpath/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace radpath::morph {
namespace {

constexpr int kNeighbors8[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                   {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

template <typename T>
Grid<T> reconstruct_impl(const Grid<T>& marker, const Grid<T>& mask) {
  if (marker.width != mask.width || marker.height != mask.height)
    throw DataError("reconstruct: marker/mask size mismatch");
  const int w = marker.width, h = marker.height;
  for (std::size_t i = 0; i < marker.size(); ++i)
    if (marker.v[i] > mask.v[i])
      throw DataError("reconstruct: marker exceeds mask");

  Grid<T> m = marker;
  // raster sweep: scanned half of the 8-neighborhood plus self
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      T best = m.at(x, y);
      auto consider = [&](int nx, int ny) {
        if (nx >= 0 && nx < w && ny >= 0 && ny < h)
          best = std::max(best, m.at(nx, ny));
      };
      consider(x - 1, y);
      consider(x - 1, y - 1);
      consider(x, y - 1);
      consider(x + 1, y - 1);
      m.at(x, y) = std::min(best, mask.at(x, y));
    }
  // anti-raster sweep, queueing pixels whose updates must still propagate
  std::deque<std::pair<int, int>> fifo;
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      T best = m.at(x, y);
      auto consider = [&](int nx, int ny) {
        if (nx >= 0 && nx < w && ny >= 0 && ny < h)
          best = std::max(best, m.at(nx, ny));
      };
      consider(x + 1, y);
      consider(x + 1, y + 1);
      consider(x, y + 1);
      consider(x - 1, y + 1);
      m.at(x, y) = std::min(best, mask.at(x, y));
      auto needs_push = [&](int nx, int ny) {
        return nx >= 0 && nx < w && ny >= 0 && ny < h &&
               m.at(nx, ny) < m.at(x, y) && m.at(nx, ny) < mask.at(nx, ny);
      };
      if (needs_push(x + 1, y) || needs_push(x + 1, y + 1) ||
          needs_push(x, y + 1) || needs_push(x - 1, y + 1))
        fifo.emplace_back(x, y);
    }
  // queue propagation
  while (!fifo.empty()) {
    auto [x, y] = fifo.front();
    fifo.pop_front();
    for (const auto& [dx, dy] : kNeighbors8) {
      int nx = x + dx, ny = y + dy;
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      if (m.at(nx, ny) < m.at(x, y) && mask.at(nx, ny) != m.at(nx, ny)) {
        m.at(nx, ny) = std::min(m.at(x, y), mask.at(nx, ny));
        fifo.emplace_back(nx, ny);
      }
    }
  }
  return m;
}

// sliding-window minimum along one axis via a monotonic deque
template <typename T>
void min_filter_axis(const Grid<T>& src, Grid<T>& dst, int radius,
                     bool horizontal) {
  const int w = src.width, h = src.height;
  const int outer = horizontal ? h : w;
  const int inner = horizontal ? w : h;
  std::deque<int> q;
  for (int o = 0; o < outer; ++o) {
    q.clear();
    auto value = [&](int i) {
      return horizontal ? src.at(i, o) : src.at(o, i);
    };
    int head = 0;
    for (int i = 0; i < inner; ++i) {
      // admit i + radius, evict indices left of i - radius
      int admit = i + radius;
      if (i == 0) {
        for (head = 0; head <= std::min(admit, inner - 1); ++head) {
          while (!q.empty() && value(q.back()) >= value(head)) q.pop_back();
          q.push_back(head);
        }
      } else if (admit < inner) {
        while (!q.empty() && value(q.back()) >= value(admit)) q.pop_back();
        q.push_back(admit);
      }
      while (q.front() < i - radius) q.pop_front();
      if (horizontal)
        dst.at(i, o) = value(q.front());
      else
        dst.at(o, i) = value(q.front());
    }
  }
}

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher)
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = int(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dx = q - v[k];
    d[q] = dx * dx + f[v[k]];
  }
}

}  // namespace

Grid<float> reconstruct_dilation(const Grid<float>& marker,
                                 const Grid<float>& mask) {
  return reconstruct_impl(marker, mask);
}

Grid<float> erode_square(const Grid<float>& img, int radius) {
  if (radius < 0) throw DataError("erode: negative radius");
  if (radius == 0) return img;
  Grid<float> tmp(img.width, img.height), out(img.width, img.height);
  min_filter_axis(img, tmp, radius, /*horizontal=*/true);
  min_filter_axis(tmp, out, radius, /*horizontal=*/false);
  return out;
}

Grid<double> squared_edt(const Grid<uint8_t>& foreground) {
  const int w = foreground.width, h = foreground.height;
  const double inf = 1e30;
  Grid<double> dist(w, h);
  // column pass
  {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y)
        f[y] = foreground.at(x, y) ? inf : 0.0;
      edt_1d(f, d, v, z);
      for (int y = 0; y < h; ++y) dist.at(x, y) = d[y];
    }
  }
  // row pass
  {
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = dist.at(x, y);
      edt_1d(f, d, v, z);
      for (int x = 0; x < w; ++x) dist.at(x, y) = d[x];
    }
  }
  return dist;
}

OtsuSplit otsu_threshold(std::span<const uint8_t> values) {
  std::array<double, 256> hist{};
  for (uint8_t v : values) hist[v] += 1.0;
  const double total = double(values.size());
  if (total == 0) throw DataError("otsu: empty input");

  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  OtsuSplit best;
  double best_var = -1.0;
  double w0 = 0, sum0 = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double mu0 = sum0 / w0, mu1 = (sum_all - sum0) / w1;
    double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best.threshold = t;
      best.mean_separation = std::abs(mu1 - mu0);
    }
  }
  if (best_var < 0) {
    // single occupied bin: no split exists
    for (int t = 0; t < 256; ++t)
      if (hist[t] > 0) best.threshold = t;
    best.mean_separation = 0;
  }
  return best;
}

Grid<double> hminima(const Grid<double>& img, double depth) {
  // HMIN_h(f) = -reconstruct_dilation(-f - h under -f)
  Grid<double> marker(img.width, img.height), mask(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    mask.v[i] = -img.v[i];
    marker.v[i] = -img.v[i] - depth;
  }
  Grid<double> rec = reconstruct_impl(marker, mask);
  for (double& v : rec.v) v = -v;
  return rec;
}

Grid<int> watershed_labels(const Grid<double>& topo,
                           const Grid<uint8_t>& foreground) {
  if (topo.width != foreground.width || topo.height != foreground.height)
    throw DataError("watershed: size mismatch");
  const int w = topo.width, h = topo.height;
  Grid<int> labels(w, h, 0);

  // regional minima: plateaus with no lower in-foreground neighbor
  Grid<uint8_t> visited(w, h, 0);
  int next_label = 1;
  std::vector<std::size_t> plateau, stack;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!foreground.at(x0, y0) || visited.at(x0, y0)) continue;
      const double level = topo.at(x0, y0);
      bool is_min = true;
      plateau.clear();
      stack.assign(1, std::size_t(y0) * w + x0);
      visited.at(x0, y0) = 1;
      while (!stack.empty()) {
        std::size_t idx = stack.back();
        stack.pop_back();
        plateau.push_back(idx);
        int x = int(idx % w), y = int(idx / w);
        for (const auto& [dx, dy] : kNeighbors8) {
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          if (!foreground.at(nx, ny)) continue;
          double nv = topo.at(nx, ny);
          if (nv < level) is_min = false;
          if (nv == level && !visited.at(nx, ny)) {
            visited.at(nx, ny) = 1;
            stack.push_back(std::size_t(ny) * w + nx);
          }
        }
      }
      if (is_min) {
        for (std::size_t idx : plateau) labels.v[idx] = next_label;
        ++next_label;
      }
    }

  // Meyer flooding: grow labels outward in increasing topo order;
  // ties break on linear index so the result is deterministic
  using Node = std::pair<double, std::size_t>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.v[i] > 0) pq.emplace(topo.v[i], i);
  while (!pq.empty()) {
    auto [value, idx] = pq.top();
    pq.pop();
    int x = int(idx % w), y = int(idx / w);
    int label = labels.v[idx];
    for (const auto& [dx, dy] : kNeighbors8) {
      int nx = x + dx, ny = y + dy;
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      std::size_t nidx = std::size_t(ny) * w + nx;
      if (!foreground.at(nx, ny) || labels.v[nidx] != 0) continue;
      labels.v[nidx] = label;
      pq.emplace(topo.v[nidx], nidx);
    }
  }
  return labels;
}

Grid<int> connected_components(const Grid<uint8_t>& binary, int* n_labels) {
  const int w = binary.width, h = binary.height;
  Grid<int> labels(w, h, 0);
  int next = 0;
  std::vector<std::size_t> stack;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!binary.at(x0, y0) || labels.at(x0, y0)) continue;
      ++next;
      labels.at(x0, y0) = next;
      stack.assign(1, std::size_t(y0) * w + x0);
      while (!stack.empty()) {
        std::size_t idx = stack.back();
        stack.pop_back();
        int x = int(idx % w), y = int(idx / w);
        for (const auto& [dx, dy] : kNeighbors8) {
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          if (!binary.at(nx, ny) || labels.at(nx, ny)) continue;
          labels.at(nx, ny) = next;
          stack.push_back(std::size_t(ny) * w + nx);
        }
      }
    }
  if (n_labels) *n_labels = next;
  return labels;
}

}  // namespace radpath::morph
