#include "radpath/histogram_match.hpp"

#include <algorithm>
#include <cmath>

namespace radpath {
namespace {

// Type-7 quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = p * double(n - 1);
  std::size_t lo = std::size_t(std::floor(h));
  if (lo >= n - 1) return sorted[n - 1];
  double frac = h - double(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> quantile_table(std::span<const float> values) {
  if (values.empty()) throw DataError("histogram match: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> q(kMatchQuantilePoints);
  for (int k = 0; k < kMatchQuantilePoints; ++k)
    q[k] = quantile_sorted(sorted, double(k) / (kMatchQuantilePoints - 1));
  return q;
}

}  // namespace

double QuantileMap::apply(double v) const {
  const auto& s = source_q;
  const auto& r = reference_q;
  if (v <= s.front()) return r.front();
  if (v >= s.back()) return r.back();
  // first knot with s[i] >= v; lerp on the segment [i-1, i]
  auto it = std::lower_bound(s.begin(), s.end(), v);
  std::size_t i = std::size_t(it - s.begin());
  double lo = s[i - 1], hi = s[i];
  if (hi <= lo) return r[i];  // flat segment of the source CDF
  double t = (v - lo) / (hi - lo);
  return r[i - 1] + t * (r[i] - r[i - 1]);
}

QuantileMap fit_histogram_match(std::span<const float> source,
                                std::span<const float> reference) {
  QuantileMap map;
  map.source_q = quantile_table(source);
  map.reference_q = quantile_table(reference);
  if (map.source_q.front() == map.source_q.back()) {
    // constant source: send everything to the reference median
    double med = map.reference_q[kMatchQuantilePoints / 2];
    std::fill(map.reference_q.begin(), map.reference_q.end(), med);
  }
  return map;
}

Volume histogram_match(const Volume& source, const Volume& reference) {
  QuantileMap map = fit_histogram_match(source.data, reference.data);
  Volume out = source;
  for (float& v : out.data) v = float(map.apply(v));
  return out;
}

}  // namespace radpath
