#include <benchmark/benchmark.h>

#include <vector>

#include "radpath/ml.hpp"
#include "radpath/morphology.hpp"
#include "radpath/path_features.hpp"
#include "radpath/phantom.hpp"
#include "radpath/rng.hpp"
#include "radpath/texture.hpp"

using namespace radpath;

namespace {

QuantizedImage random_volume(int nx, int ny, int nz, int levels,
                             uint64_t seed) {
  QuantizedImage q;
  q.dims = {nx, ny, nz};
  q.levels = levels;
  q.codes.resize(q.dims.count());
  Rng rng(seed);
  for (auto& c : q.codes) c = int16_t(rng.below(uint64_t(levels)));
  return q;
}

Patch bench_slide() {
  phantom::PhantomSpec spec;
  spec.slide_size = 256;
  phantom::PhantomSubject subj;
  subj.id = "bench";
  subj.risk_path = 0.6;
  return phantom::phantom_slide(spec, 0, subj);
}

}  // namespace

static void BM_glcm_features_3d(benchmark::State& state) {
  QuantizedImage q = random_volume(32, 32, 16, 16, 11u);
  for (auto _ : state)
    benchmark::DoNotOptimize(texture::glcm_features_3d(q).mean.energy);
}
BENCHMARK(BM_glcm_features_3d)->Unit(benchmark::kMillisecond);

static void BM_texture_family_3d(benchmark::State& state) {
  QuantizedImage q = random_volume(32, 32, 16, 16, 12u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(texture::glrlm_features_3d(q).sre);
    benchmark::DoNotOptimize(texture::glszm_features(q).sze);
    benchmark::DoNotOptimize(texture::ngtdm_features(q).coarseness);
  }
}
BENCHMARK(BM_texture_family_3d)->Unit(benchmark::kMillisecond);

static void BM_reconstruct_dilation(benchmark::State& state) {
  const int n = 256;
  morph::Grid<float> mask(n, n);
  Rng rng(21u);
  for (auto& v : mask.v) v = float(rng.uniform() * 255.0);
  morph::Grid<float> marker = morph::erode_square(mask, 8);
  for (auto _ : state) {
    morph::Grid<float> r = morph::reconstruct_dilation(marker, mask);
    benchmark::DoNotOptimize(r.v.data());
  }
}
BENCHMARK(BM_reconstruct_dilation)->Unit(benchmark::kMillisecond);

static void BM_segment_nuclei(benchmark::State& state) {
  Patch slide = bench_slide();
  path::PathConfig cfg;
  Patch norm = path::normalize_background(slide, cfg);
  int n_labels = 0;
  for (auto _ : state) {
    morph::Grid<int> labels = path::segment_nuclei(norm, cfg, &n_labels);
    benchmark::DoNotOptimize(labels.v.data());
  }
}
BENCHMARK(BM_segment_nuclei)->Unit(benchmark::kMillisecond);

static void BM_svr_train(benchmark::State& state) {
  const int n = 60, d = 100;
  Rng rng(31u);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<double> y(n);
  std::vector<double> w(d);
  for (auto& v : w) v = rng.gaussian();
  for (int i = 0; i < n; ++i) {
    double dot = 0;
    for (int j = 0; j < d; ++j) {
      rows[std::size_t(i)][std::size_t(j)] = rng.gaussian();
      dot += rows[std::size_t(i)][std::size_t(j)] * w[std::size_t(j)];
    }
    y[std::size_t(i)] = dot + 0.1 * rng.gaussian();
  }
  for (auto _ : state) {
    ml::LinearSvrModel m = ml::svr_train(rows, y, 2.0, 0.1);
    benchmark::DoNotOptimize(m.w.data());
  }
}
BENCHMARK(BM_svr_train)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
