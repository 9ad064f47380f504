// Unit tests for the linear SVM/SVR solvers, standardization, fold
// utilities, grid search, and the LOOCV / split evaluation protocols.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "radpath/image.hpp"
#include "radpath/ml.hpp"
#include "radpath/rad_features.hpp"

using radpath::DataError;
using radpath::NumericError;
using radpath::UsageError;
namespace ml = radpath::ml;
namespace rad = radpath::rad;

namespace {

ml::SubjectFeatures path_subject(const std::string& id, double days,
                                 std::vector<double> path,
                                 const std::string& split = "") {
  ml::SubjectFeatures s;
  s.subject_id = id;
  s.survival_days = days;
  s.event = 1;
  s.split = split;
  s.path = std::move(path);
  return s;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

ml::SubjectFeatures rad_subject(const std::string& id, double days,
                                std::mt19937_64& rng,
                                const rad::RadConfig& rc) {
  ml::SubjectFeatures s;
  s.subject_id = id;
  s.survival_days = days;
  s.event = 1;
  s.rad.base = random_vector(rng, rad::rad_base_dictionary(rc).size());
  s.rad.cdf32 = random_vector(rng, rad::rad_aux_dictionary(rc).size());
  return s;
}

bool same_diag(const ml::FoldDiagnostics& a, const ml::FoldDiagnostics& b) {
  if (a.held_out != b.held_out) return false;
  if (a.standardizer_mean != b.standardizer_mean) return false;
  if (a.standardizer_std != b.standardizer_std) return false;
  if (a.cutoff != b.cutoff) return false;
  if (a.chosen_c != b.chosen_c) return false;
  if (a.chosen_epsilon != b.chosen_epsilon) return false;
  if (a.w != b.w) return false;
  if (a.b != b.b) return false;
  if (a.target_mean != b.target_mean) return false;
  if (a.target_std != b.target_std) return false;
  if (a.pca.size() != b.pca.size()) return false;
  for (std::size_t i = 0; i < a.pca.size(); ++i) {
    if (a.pca[i].mean != b.pca[i].mean) return false;
    if (a.pca[i].axes != b.pca[i].axes) return false;
    if (a.pca[i].explained_variance != b.pca[i].explained_variance)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("standardizer centers and scales; constant columns map to zero") {
  ml::Standardizer st;
  st.fit({{1.0, 10.0}, {3.0, 10.0}, {5.0, 10.0}});
  CHECK(st.mean[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(st.mean[1] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(st.stddev[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
  CHECK(st.stddev[1] == 0.0);

  std::vector<double> z = st.apply(std::vector<double>{5.0, 123.0});
  CHECK(z[0] == doctest::Approx(2.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-12));
  CHECK(z[1] == 0.0);  // zero-variance feature contributes nothing

  CHECK_THROWS_AS(st.apply(std::vector<double>{1.0}), DataError);
  ml::Standardizer bad;
  CHECK_THROWS_AS(bad.fit({}), DataError);
  CHECK_THROWS_AS(bad.fit({{1.0, 2.0}, {1.0}}), DataError);
}

TEST_CASE("standardized training columns have mean zero and unit spread") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 8 + std::size_t(trial), d = 4;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r = random_vector(rng, d);
      r[2] = 7.5;  // one constant column
      rows.push_back(std::move(r));
    }
    ml::Standardizer st;
    st.fit(rows);
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0, var = 0;
      for (const auto& r : rows) {
        const double z = st.apply(r)[j];
        mean += z;
      }
      mean /= double(n);
      for (const auto& r : rows) {
        const double z = st.apply(r)[j] - mean;
        var += z * z;
      }
      var /= double(n);
      CHECK(std::abs(mean) < 1e-10);
      const double sd = std::sqrt(var);
      CHECK((std::abs(sd) < 1e-10 || std::abs(sd - 1.0) < 1e-10));
    }
  }
}

TEST_CASE("svm places the canonical margin on a separable pair") {
  ml::LinearSvmModel m = ml::svm_train({{-1.0}, {1.0}}, {-1, 1}, 100.0);
  CHECK(m.w[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(m.b) < 1e-3);
  CHECK(ml::svm_decision(m, std::vector<double>{2.0}) > 0);
  CHECK(ml::svm_decision(m, std::vector<double>{-2.0}) < 0);
}

TEST_CASE("a linear decision rule cannot resolve xor") {
  const std::vector<std::vector<double>> rows = {
      {0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> labels = {1, 1, -1, -1};
  for (double c : {0.5, 2.0, 32.0}) {
    ml::LinearSvmModel m = ml::svm_train(rows, labels, c);
    int correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int pred = ml::svm_decision(m, rows[i]) >= 0 ? 1 : -1;
      if (pred == labels[i]) ++correct;
    }
    CHECK(correct <= 3);
  }
}

TEST_CASE("svm training objective matches an independent qp solver") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double cs[] = {0.1, 1.0, 10.0};
  for (int trial = 0; trial < 9; ++trial) {
    const std::size_t n = 2 + std::size_t(trial % 5);
    const std::size_t d = 1 + std::size_t(trial % 3);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(d);
      for (double& x : r) x = u(rng);
      rows.push_back(std::move(r));
      const int l = (rng() & 1) ? 1 : -1;
      (l == 1 ? pos : neg) = true;
      labels.push_back(l);
    }
    if (!pos) labels[0] = 1;
    if (!neg) labels[n - 1] = -1;
    const double c = cs[trial % 3];

    ml::LinearSvmModel m = ml::svm_train(rows, labels, c);
    const double lib = ml::svm_objective(m, rows, labels);
    const double opt = oracle::svm_qp_objective(rows, labels, c);
    CHECK(lib == doctest::Approx(opt).epsilon(0).scale(1.0).epsilon(1e-4));
  }
}

TEST_CASE("svm input validation") {
  CHECK_THROWS_AS(ml::svm_train({}, {}, 1.0), DataError);
  CHECK_THROWS_AS(ml::svm_train({{1.0}, {2.0}}, {1, 1}, 1.0), DataError);
  CHECK_THROWS_AS(ml::svm_train({{1.0}, {2.0}}, {1, 2}, 1.0), DataError);
  CHECK_THROWS_AS(ml::svm_train({{1.0}, {2.0}}, {1, -1}, 0.0), UsageError);
  ml::LinearSvmModel m = ml::svm_train({{-1.0}, {1.0}}, {-1, 1}, 1.0);
  CHECK_THROWS_AS(ml::svm_decision(m, std::vector<double>{1.0, 2.0}),
                  DataError);
}

TEST_CASE("primal objective is non-increasing over training epochs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 30, d = 5;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<double> targets;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(d);
    for (double& x : r) x = u(rng);
    const double t = 2.0 * r[0] - r[1] + 0.25 * u(rng);
    labels.push_back(t >= 0 ? 1 : -1);
    targets.push_back(t);
    rows.push_back(std::move(r));
  }

  std::vector<double> trace;
  ml::LinearSvmModel svm = ml::svm_train(rows, labels, 2.0, 1e-6, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1]);
  CHECK(trace.back() < trace.front());
  // the returned model is the iterate the last trace entry describes
  CHECK(ml::svm_objective(svm, rows, labels) ==
        doctest::Approx(trace.back()).epsilon(1e-9));

  trace.clear();
  ml::LinearSvrModel svr = ml::svr_train(rows, targets, 2.0, 0.1, 1e-6, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1]);
  CHECK(trace.back() < trace.front());
  CHECK(ml::svr_objective(svr, rows, targets) ==
        doctest::Approx(trace.back()).epsilon(1e-9));
}

TEST_CASE("svr recovers the slope of a noiseless line") {
  // y = 2x sampled at x = +/-1/2; targets already have mean 0 and unit
  // spread, so the internal target scaling is the identity
  ml::LinearSvrModel m = ml::svr_train({{-0.5}, {-0.5}, {0.5}, {0.5}},
                                       {-1.0, -1.0, 1.0, 1.0}, 100.0, 0.01);
  CHECK(m.target_mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.target_std == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.w[0] - 2.0) < 0.05);
  CHECK(std::abs(m.b) < 0.05);
  CHECK(ml::svr_predict(m, std::vector<double>{0.25}) ==
        doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("svr on constant targets predicts the constant") {
  std::mt19937_64 rng(37);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(random_vector(rng, 3));
  ml::LinearSvrModel m =
      ml::svr_train(rows, {42.0, 42.0, 42.0, 42.0, 42.0}, 10.0, 0.1);
  for (double w : m.w) CHECK(std::abs(w) < 1e-6);
  for (const auto& r : rows)
    CHECK(ml::svr_predict(m, r) == doctest::Approx(42.0).epsilon(1e-9));
  CHECK(ml::svr_predict(m, random_vector(rng, 3)) ==
        doctest::Approx(42.0).epsilon(1e-9));
}

TEST_CASE("svr training objective matches an independent qp solver") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(-3.0, 3.0);
  const double cs[] = {0.5, 4.0};
  const double eps[] = {0.01, 0.2};
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 3 + std::size_t(trial % 4);
    const std::size_t d = 1 + std::size_t(trial % 2);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(d);
      for (double& x : r) x = u(rng);
      rows.push_back(std::move(r));
      targets.push_back(ut(rng));
    }
    // z-score targets by hand so the oracle sees the solver's problem
    double tm = 0;
    for (double t : targets) tm += t;
    tm /= double(n);
    double tv = 0;
    for (double t : targets) tv += (t - tm) * (t - tm);
    double ts = std::sqrt(tv / double(n));
    if (ts < 1e-9) {
      targets[0] += 1.0;  // keep the problem non-degenerate
      tm = 0;
      for (double t : targets) tm += t;
      tm /= double(n);
      tv = 0;
      for (double t : targets) tv += (t - tm) * (t - tm);
      ts = std::sqrt(tv / double(n));
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (targets[i] - tm) / ts;

    const double c = cs[trial % 2], e = eps[(trial / 2) % 2];
    ml::LinearSvrModel m = ml::svr_train(rows, targets, c, e);
    CHECK(m.target_mean == doctest::Approx(tm).epsilon(1e-12));
    CHECK(m.target_std == doctest::Approx(ts).epsilon(1e-12));
    const double lib = ml::svr_objective(m, rows, targets);
    const double opt = oracle::svr_qp_objective(rows, z, c, e);
    CHECK(lib == doctest::Approx(opt).scale(1.0).epsilon(1e-4));
  }
}

TEST_CASE("svr training residuals stay within the tube plus paid slack") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 12, d = 3;
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r(d);
    for (double& x : r) x = u(rng);
    targets.push_back(3.0 * r[0] + u(rng));
    rows.push_back(std::move(r));
  }
  const double c = 2.0, e = 0.1;
  ml::LinearSvrModel m = ml::svr_train(rows, targets, c, e);
  double reg = m.b * m.b;
  for (double w : m.w) reg += w * w;
  const double slack_budget =
      (ml::svr_objective(m, rows, targets) - 0.5 * reg) / c;
  CHECK(slack_budget >= -1e-9);
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (targets[i] - m.target_mean) / m.target_std;
    const double resid = std::abs(zi - ml::svr_predict_z(m, rows[i]));
    CHECK(resid <= e + slack_budget + 1e-9);
  }
}

TEST_CASE("fold assignment is deterministic, covering, and balanced") {
  const std::vector<int> f1 = ml::cv_folds(11, 4, 99);
  const std::vector<int> f2 = ml::cv_folds(11, 4, 99);
  CHECK(f1 == f2);
  REQUIRE(f1.size() == 11);
  std::vector<int> counts(4, 0);
  for (int f : f1) {
    REQUIRE(f >= 0);
    REQUIRE(f < 4);
    ++counts[std::size_t(f)];
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*lo >= 2);
  CHECK(*hi - *lo <= 1);

  CHECK_THROWS_WITH_AS(ml::cv_folds(3, 4, 1),
                       "cv_folds: fewer rows than folds", DataError);
  CHECK_THROWS_AS(ml::cv_folds(3, 1, 1), UsageError);
}

TEST_CASE("stratified folds balance each class separately") {
  std::vector<int> labels;
  for (int i = 0; i < 9; ++i) labels.push_back(1);
  for (int i = 0; i < 7; ++i) labels.push_back(-1);
  const std::vector<int> folds = ml::cv_folds_stratified(labels, 3, 5);
  REQUIRE(folds.size() == labels.size());
  std::vector<int> pos(3, 0), neg(3, 0);
  for (std::size_t i = 0; i < labels.size(); ++i)
    ++(labels[i] == 1 ? pos : neg)[std::size_t(folds[i])];
  const auto [plo, phi] = std::minmax_element(pos.begin(), pos.end());
  const auto [nlo, nhi] = std::minmax_element(neg.begin(), neg.end());
  CHECK(*phi - *plo <= 1);
  CHECK(*nhi - *nlo <= 1);
}

TEST_CASE("grid search prefers the smallest hyperparameters that win") {
  // linearly separable with a wide margin: every C reaches fold accuracy 1,
  // so the tie rule must return the smallest C in the grid
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    const int l = i % 2 ? 1 : -1;
    rows.push_back({3.0 * l + u(rng), u(rng)});
    labels.push_back(l);
  }
  const std::vector<double> c_grid = {0.03125, 0.125, 0.5, 2.0, 8.0, 32.0};
  ml::GridChoice gc = ml::grid_search_classify(rows, labels, c_grid, 5, 7);
  CHECK(gc.c == 0.03125);
  CHECK(gc.score == doctest::Approx(1.0).epsilon(1e-12));

  ml::GridChoice again = ml::grid_search_classify(rows, labels, c_grid, 5, 7);
  CHECK(again.c == gc.c);
  CHECK(again.score == gc.score);

  ml::GridChoice single =
      ml::grid_search_classify(rows, labels, {2.0}, 5, 7);
  CHECK(single.c == 2.0);

  CHECK_THROWS_AS(ml::grid_search_classify(rows, labels, {}, 5, 7),
                  UsageError);
  std::vector<std::vector<double>> tiny(rows.begin(), rows.begin() + 3);
  std::vector<int> tiny_labels(labels.begin(), labels.begin() + 3);
  CHECK_THROWS_WITH_AS(
      ml::grid_search_classify(tiny, tiny_labels, c_grid, 5, 7),
      "cv_folds: fewer rows than folds", DataError);
}

TEST_CASE("regression grid search returns a single candidate unchanged") {
  std::mt19937_64 rng(59);
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  for (int i = 0; i < 12; ++i) {
    rows.push_back(random_vector(rng, 2));
    targets.push_back(rows.back()[0] * 5.0 + 1.0);
  }
  ml::GridChoice gc = ml::grid_search_regress(rows, targets, {2.0}, {0.1},
                                              4, 13);
  CHECK(gc.c == 2.0);
  CHECK(gc.epsilon == 0.1);
  ml::GridChoice again = ml::grid_search_regress(rows, targets, {2.0}, {0.1},
                                                 4, 13);
  CHECK(again.score == gc.score);
}

TEST_CASE("survival cutoff statistics") {
  const std::vector<double> two = {100.0, 300.0};
  CHECK(ml::survival_cutoff(two, ml::CutoffStat::mean) == 200.0);
  CHECK(ml::survival_cutoff(two, ml::CutoffStat::median) == 200.0);
  const std::vector<double> odd = {800.0, 100.0, 300.0};
  CHECK(ml::survival_cutoff(odd, ml::CutoffStat::median) == 300.0);
  const std::vector<double> same = {365.0, 365.0, 365.0};
  CHECK(ml::survival_cutoff(same, ml::CutoffStat::mean) == 365.0);
  CHECK_THROWS_AS(ml::survival_cutoff({}, ml::CutoffStat::mean), DataError);
}

TEST_CASE("a three-subject cohort yields exactly three loocv predictions") {
  std::mt19937_64 rng(61);
  std::vector<ml::SubjectFeatures> cohort;
  cohort.push_back(path_subject("s1", 100.0, random_vector(rng, 6)));
  cohort.push_back(path_subject("s2", 200.0, random_vector(rng, 6)));
  cohort.push_back(path_subject("s3", 1500.0, random_vector(rng, 6)));

  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.seed = 5;
  for (ml::Task task : {ml::Task::classify, ml::Task::regress}) {
    cfg.task = task;
    ml::RunResult r = ml::run_loocv(cohort, cfg);
    REQUIRE(r.predictions.size() == 3);
    REQUIRE(r.folds.size() == 3);
    std::set<std::string> ids;
    for (const auto& p : r.predictions) ids.insert(p.subject_id);
    CHECK(ids.size() == 3);  // one prediction per distinct subject
    for (const auto& f : r.folds) {
      REQUIRE(f.held_out.size() == 1);
      CHECK(f.standardizer_mean.size() == 6);
      CHECK(f.pca.empty());  // slide features use no projection step
    }
    // folds arrive sorted by held-out subject id
    CHECK(r.folds[0].held_out[0] == "s1");
    CHECK(r.folds[1].held_out[0] == "s2");
    CHECK(r.folds[2].held_out[0] == "s3");
  }
}

TEST_CASE("five-subject loocv keeps both classes in every training fold") {
  const double days[] = {100.0, 200.0, 1400.0, 1500.0, 800.0};
  std::mt19937_64 rng(67);
  std::vector<ml::SubjectFeatures> cohort;
  for (int i = 0; i < 5; ++i)
    cohort.push_back(path_subject("p" + std::to_string(i), days[i],
                                  random_vector(rng, 5)));
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.task = ml::Task::classify;
  cfg.seed = 17;
  ml::RunResult r = ml::run_loocv(cohort, cfg);
  REQUIRE(r.predictions.size() == 5);
  for (const auto& p : r.predictions) {
    CHECK((p.predicted == 1 || p.predicted == -1));
    CHECK((p.truth == 1 || p.truth == -1));
  }
}

TEST_CASE("loocv over stored-histogram features pads short projections") {
  rad::RadConfig rc;
  std::mt19937_64 rng(71);
  std::vector<ml::SubjectFeatures> cohort;
  cohort.push_back(rad_subject("r1", 300.0, rng, rc));
  cohort.push_back(rad_subject("r2", 700.0, rng, rc));
  cohort.push_back(rad_subject("r3", 1600.0, rng, rc));

  ml::MlConfig cfg;
  cfg.source = ml::Source::rad;
  cfg.task = ml::Task::regress;
  cfg.seed = 3;
  ml::RunResult r = ml::run_loocv(cohort, cfg);
  REQUIRE(r.predictions.size() == 3);
  const std::size_t full = rad::rad_dictionary(rc).size();
  for (const auto& f : r.folds) {
    CHECK(f.standardizer_mean.size() == full);
    REQUIRE(f.pca.size() == std::size_t(rad::kRadBlocks));
    // two training subjects support a single informative axis per block
    for (const auto& basis : f.pca) CHECK(basis.axes.size() == 1);
  }
}

TEST_CASE("planting the label inside a feature drives loocv to accuracy 1") {
  std::mt19937_64 rng(73);
  std::vector<ml::SubjectFeatures> cohort;
  for (int i = 0; i < 8; ++i) {
    const bool lives_long = i >= 4;
    std::vector<double> f = random_vector(rng, 4);
    f[0] = lives_long ? 1.0 : 0.0;  // target leak, on purpose
    cohort.push_back(path_subject("q" + std::to_string(i),
                                  lives_long ? 2000.0 : 100.0, std::move(f)));
  }
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.task = ml::Task::classify;
  cfg.seed = 29;
  ml::RunResult r = ml::run_loocv(cohort, cfg);
  REQUIRE(r.predictions.size() == 8);
  for (const auto& p : r.predictions) CHECK(p.predicted == p.truth);
}

TEST_CASE("held-out features never reach fold statistics in loocv") {
  std::mt19937_64 rng(79);
  std::vector<ml::SubjectFeatures> cohort;
  const double days[] = {120, 340, 2100, 660, 1900, 240, 1500, 90};
  for (int i = 0; i < 8; ++i)
    cohort.push_back(path_subject("z" + std::to_string(i), days[i],
                                  random_vector(rng, 5)));

  for (ml::Task task : {ml::Task::classify, ml::Task::regress}) {
    ml::MlConfig cfg;
    cfg.source = ml::Source::path;
    cfg.task = task;
    cfg.seed = 31;
    const ml::RunResult before = ml::run_loocv(cohort, cfg);

    std::vector<ml::SubjectFeatures> tampered = cohort;
    for (double& v : tampered[3].path) v = v * 1000.0 + 17.0;
    const ml::RunResult after = ml::run_loocv(tampered, cfg);

    // the fold that holds subject 3 out trains on untouched rows: every
    // fitted quantity must be bit-identical
    REQUIRE(before.folds.size() == after.folds.size());
    bool checked = false;
    for (std::size_t i = 0; i < before.folds.size(); ++i) {
      if (before.folds[i].held_out !=
          std::vector<std::string>{tampered[3].subject_id})
        continue;
      CHECK(same_diag(before.folds[i], after.folds[i]));
      checked = true;
    }
    CHECK(checked);
  }
}

TEST_CASE("validation features never reach the split-fit model") {
  std::mt19937_64 rng(83);
  std::vector<ml::SubjectFeatures> cohort;
  const double days[] = {150, 420, 1900, 700, 1600, 100, 2300, 260, 980, 77};
  for (int i = 0; i < 10; ++i)
    cohort.push_back(path_subject("m" + std::to_string(i), days[i],
                                  random_vector(rng, 5),
                                  i < 5 ? "train" : "val"));

  for (ml::Task task : {ml::Task::classify, ml::Task::regress}) {
    ml::MlConfig cfg;
    cfg.source = ml::Source::path;
    cfg.task = task;
    cfg.seed = 37;
    const ml::RunResult before = ml::run_split(cohort, cfg);
    REQUIRE(before.predictions.size() == 5);
    REQUIRE(before.folds.size() == 1);

    std::vector<ml::SubjectFeatures> tampered = cohort;
    for (double& v : tampered[7].path) v = v * -250.0 + 3.0;
    const ml::RunResult after = ml::run_split(tampered, cfg);

    CHECK(same_diag(before.folds[0], after.folds[0]));
    for (std::size_t i = 0; i < before.predictions.size(); ++i) {
      if (before.predictions[i].subject_id == tampered[7].subject_id)
        continue;  // its own score legitimately moves
      CHECK(before.predictions[i].score == after.predictions[i].score);
      CHECK(before.predictions[i].predicted == after.predictions[i].predicted);
    }
  }
}

TEST_CASE("split predictions follow the training-fit decision rule") {
  // validation set duplicates the training content, so each prediction is
  // the resubstitution value of the fitted model, recomputable from the
  // exposed diagnostics
  std::mt19937_64 rng(89);
  std::vector<ml::SubjectFeatures> cohort;
  const double days[] = {200, 500, 1700, 900, 1300, 60};
  for (int i = 0; i < 6; ++i) {
    std::vector<double> f = random_vector(rng, 4);
    cohort.push_back(
        path_subject("t" + std::to_string(i), days[i], f, "train"));
    cohort.push_back(
        path_subject("v" + std::to_string(i), days[i], f, "val"));
  }
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.task = ml::Task::classify;
  cfg.seed = 41;
  ml::RunResult r = ml::run_split(cohort, cfg);
  REQUIRE(r.predictions.size() == 6);
  const ml::FoldDiagnostics& d = r.folds[0];
  for (const auto& p : r.predictions) {
    const ml::SubjectFeatures* subj = nullptr;
    for (const auto& s : cohort)
      if (s.subject_id == p.subject_id) subj = &s;
    REQUIRE(subj != nullptr);
    double score = d.b;
    for (std::size_t j = 0; j < subj->path.size(); ++j) {
      const double sd = d.standardizer_std[j];
      const double z =
          sd > 0 ? (subj->path[j] - d.standardizer_mean[j]) / sd : 0.0;
      score += d.w[j] * z;
    }
    CHECK(p.score == doctest::Approx(score).epsilon(1e-10));
    CHECK(p.predicted == (p.score >= 0 ? 1 : -1));
    CHECK(p.truth == (subj->survival_days >= d.cutoff ? 1 : -1));
  }
}

TEST_CASE("shuffling cohort order leaves split predictions unchanged") {
  std::mt19937_64 rng(97);
  std::vector<ml::SubjectFeatures> cohort;
  const double days[] = {110, 380, 2050, 540, 1450, 95, 1750, 310};
  for (int i = 0; i < 8; ++i)
    cohort.push_back(path_subject("w" + std::to_string(i), days[i],
                                  random_vector(rng, 4),
                                  i % 2 ? "val" : "train"));
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.task = ml::Task::regress;
  cfg.seed = 43;
  const ml::RunResult a = ml::run_split(cohort, cfg);

  std::vector<ml::SubjectFeatures> shuffled = cohort;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const ml::RunResult b = ml::run_split(shuffled, cfg);

  REQUIRE(a.predictions.size() == b.predictions.size());
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    CHECK(a.predictions[i].subject_id == b.predictions[i].subject_id);
    CHECK(a.predictions[i].score == b.predictions[i].score);
    CHECK(a.predictions[i].predicted == b.predictions[i].predicted);
  }
  CHECK(same_diag(a.folds[0], b.folds[0]));
}

TEST_CASE("cutoff boundary counts the subject as a long survivor") {
  std::mt19937_64 rng(101);
  std::vector<ml::SubjectFeatures> cohort;
  cohort.push_back(path_subject("a1", 100.0, random_vector(rng, 3), "train"));
  cohort.push_back(path_subject("a2", 300.0, random_vector(rng, 3), "train"));
  cohort.push_back(path_subject("a3", 200.0, random_vector(rng, 3), "val"));
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;
  cfg.task = ml::Task::classify;
  cfg.grid_folds = 2;
  ml::RunResult r = ml::run_split(cohort, cfg);
  REQUIRE(r.predictions.size() == 1);
  CHECK(r.folds[0].cutoff == 200.0);
  CHECK(r.predictions[0].truth == 1);  // days == cutoff counts as long
}

TEST_CASE("protocol input validation") {
  std::mt19937_64 rng(103);
  ml::MlConfig cfg;
  cfg.source = ml::Source::path;

  std::vector<ml::SubjectFeatures> two;
  two.push_back(path_subject("x1", 100.0, random_vector(rng, 3)));
  two.push_back(path_subject("x2", 900.0, random_vector(rng, 3)));
  CHECK_THROWS_WITH_AS(ml::run_loocv(two, cfg),
                       "run_loocv: need at least 3 subjects", DataError);

  std::vector<ml::SubjectFeatures> dup;
  dup.push_back(path_subject("x1", 100.0, random_vector(rng, 3)));
  dup.push_back(path_subject("x1", 500.0, random_vector(rng, 3)));
  dup.push_back(path_subject("x2", 900.0, random_vector(rng, 3)));
  CHECK_THROWS_WITH_AS(ml::run_loocv(dup, cfg),
                       "duplicate subject id: x1", DataError);

  // equal survival everywhere: every training fold is single-class
  std::vector<ml::SubjectFeatures> flat;
  for (int i = 0; i < 3; ++i)
    flat.push_back(path_subject("f" + std::to_string(i), 500.0,
                                random_vector(rng, 3)));
  cfg.task = ml::Task::classify;
  CHECK_THROWS_AS(ml::run_loocv(flat, cfg), DataError);

  std::vector<ml::SubjectFeatures> bad_split;
  bad_split.push_back(
      path_subject("b1", 100.0, random_vector(rng, 3), "train"));
  bad_split.push_back(
      path_subject("b2", 900.0, random_vector(rng, 3), "test"));
  CHECK_THROWS_WITH_AS(
      ml::run_split(bad_split, cfg),
      "subject b2: split column value 'test' (expected train or val)",
      DataError);

  std::vector<ml::SubjectFeatures> no_val;
  no_val.push_back(path_subject("c1", 100.0, random_vector(rng, 3), "train"));
  no_val.push_back(path_subject("c2", 900.0, random_vector(rng, 3), "train"));
  CHECK_THROWS_WITH_AS(ml::run_split(no_val, cfg),
                       "split protocol needs non-empty train and val splits",
                       DataError);
}

TEST_CASE("repeated runs are bitwise identical") {
  std::mt19937_64 rng(107);
  std::vector<ml::SubjectFeatures> cohort;
  const double days[] = {130, 450, 1850, 760, 1250, 210, 990};
  for (int i = 0; i < 7; ++i)
    cohort.push_back(path_subject("d" + std::to_string(i), days[i],
                                  random_vector(rng, 5)));
  for (ml::Task task : {ml::Task::classify, ml::Task::regress}) {
    ml::MlConfig cfg;
    cfg.source = ml::Source::path;
    cfg.task = task;
    cfg.seed = 47;
    const ml::RunResult a = ml::run_loocv(cohort, cfg);
    const ml::RunResult b = ml::run_loocv(cohort, cfg);
    REQUIRE(a.predictions.size() == b.predictions.size());
    for (std::size_t i = 0; i < a.predictions.size(); ++i) {
      CHECK(a.predictions[i].score == b.predictions[i].score);
      CHECK(a.predictions[i].predicted == b.predictions[i].predicted);
    }
    REQUIRE(a.folds.size() == b.folds.size());
    for (std::size_t i = 0; i < a.folds.size(); ++i)
      CHECK(same_diag(a.folds[i], b.folds[i]));
  }
}
