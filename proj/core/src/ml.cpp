#include "radpath/ml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "radpath/rng.hpp"

namespace radpath::ml {

void Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("standardizer: no training rows");
  const std::size_t d = rows[0].size();
  mean.assign(d, 0.0);
  stddev.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw DataError("standardizer: ragged rows");
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= double(rows.size());
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j)
      stddev[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  for (double& s : stddev) s = std::sqrt(s / double(rows.size()));
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size())
    throw DataError("standardizer: row length mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j)
    out[j] = stddev[j] > 0 ? (row[j] - mean[j]) / stddev[j] : 0.0;
  return out;
}

namespace {

constexpr int kMaxEpochs = 200000;
constexpr int kRefreshEpochs = 256;  // exact f recompute cadence

// Gram matrix of bias-augmented rows: K_ij = x_i . x_j + 1
std::vector<double> build_gram(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 1.0;
      const auto& a = rows[i];
      const auto& b = rows[j];
      for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
      k[i * n + j] = k[j * n + i] = s;
    }
  return k;
}

}  // namespace

double svm_decision(const LinearSvmModel& m, std::span<const double> row) {
  if (row.size() != m.w.size())
    throw DataError("svm_decision: feature length mismatch");
  double s = m.b;
  for (std::size_t j = 0; j < row.size(); ++j) s += m.w[j] * row[j];
  return s;
}

LinearSvmModel svm_train(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels, double c,
                         double tol, std::vector<double>* primal_trace) {
  const std::size_t n = rows.size();
  if (n == 0 || labels.size() != n)
    throw DataError("svm_train: empty or mismatched training set");
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y == 1)
      pos = true;
    else if (y == -1)
      neg = true;
    else
      throw DataError("svm_train: labels must be +1/-1");
  }
  if (!pos || !neg) throw DataError("svm_train: single-class training set");
  if (!(c > 0)) throw UsageError("svm_train: C must be positive");

  const std::vector<double> gram = build_gram(rows);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // f_i = sum_j alpha_j y_j K_ij

  auto fresh_f = [&](const std::vector<double>& a, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j)
        s += a[j] * labels[j] * gram[i * n + j];
      out[i] = s;
    }
  };
  auto dual_value = [&](const std::vector<double>& a,
                        const std::vector<double>& fa) {
    double asum = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i) {
      asum += a[i];
      quad += a[i] * labels[i] * fa[i];
    }
    return asum - 0.5 * quad;
  };
  // exact solve of the stationarity system on the interior coordinates;
  // candidate is clamped to the box and kept only if the dual improves
  auto try_polish = [&] {
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < n; ++i)
      if (alpha[i] > 0.0 && alpha[i] < c) interior.push_back(i);
    if (interior.empty()) return;
    const std::size_t m = interior.size();
    std::vector<char> in_set(n, 0);
    for (std::size_t i : interior) in_set[i] = 1;
    Eigen::MatrixXd a_mat(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = interior[r];
      double acc = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (!in_set[j] && alpha[j] != 0.0)
          acc -= labels[i] * labels[j] * alpha[j] * gram[i * n + j];
      rhs(long(r)) = acc;
      for (std::size_t s = 0; s <= r; ++s) {
        const std::size_t j = interior[s];
        a_mat(long(r), long(s)) = a_mat(long(s), long(r)) =
            labels[i] * labels[j] * gram[i * n + j];
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a_mat);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return;
    std::vector<double> cand = alpha;
    for (std::size_t r = 0; r < m; ++r)
      cand[interior[r]] = std::clamp(sol(long(r)), 0.0, c);
    std::vector<double> fc(n);
    fresh_f(cand, fc);
    if (dual_value(cand, fc) > dual_value(alpha, f)) {
      alpha = std::move(cand);
      f = std::move(fc);
    }
  };

  // dual ascent does not make the primal of the running iterate monotone,
  // so keep the best primal iterate seen and return that one; the final
  // dual value still certifies its gap
  std::vector<double> alpha_best = alpha;
  double primal_best = std::numeric_limits<double>::infinity();

  bool converged = false;
  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    if (epoch > 0 && epoch % kRefreshEpochs == 0) {
      fresh_f(alpha, f);
      try_polish();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double y = labels[i];
      const double grad = y * f[i] - 1.0;
      double pg = grad;
      if (alpha[i] <= 0.0)
        pg = std::min(grad, 0.0);
      else if (alpha[i] >= c)
        pg = std::max(grad, 0.0);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      const double next =
          std::clamp(old - grad / gram[i * n + i], 0.0, c);
      const double delta = next - old;
      if (delta == 0.0) continue;
      alpha[i] = next;
      for (std::size_t j = 0; j < n; ++j)
        f[j] += delta * y * gram[i * n + j];
    }
    double wsq = 0, hinge = 0, asum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      wsq += alpha[i] * labels[i] * f[i];
      hinge += std::max(0.0, 1.0 - labels[i] * f[i]);
      asum += alpha[i];
    }
    const double primal = 0.5 * wsq + c * hinge;
    const double dual = asum - 0.5 * wsq;
    if (primal < primal_best) {
      primal_best = primal;
      alpha_best = alpha;
    }
    if (primal_trace) primal_trace->push_back(primal_best);
    if (primal - dual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("svm_train: solver did not reach the gap tolerance");

  LinearSvmModel m;
  m.c = c;
  m.w.assign(rows[0].size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double coef = alpha_best[i] * labels[i];
    if (coef == 0.0) continue;
    for (std::size_t j = 0; j < m.w.size(); ++j)
      m.w[j] += coef * rows[i][j];
    m.b += coef;
  }
  return m;
}

double svm_objective(const LinearSvmModel& m,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels) {
  double reg = m.b * m.b;
  for (double w : m.w) reg += w * w;
  double hinge = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    hinge += std::max(0.0, 1.0 - labels[i] * svm_decision(m, rows[i]));
  return 0.5 * reg + m.c * hinge;
}

double svr_predict_z(const LinearSvrModel& m, std::span<const double> row) {
  if (row.size() != m.w.size())
    throw DataError("svr_predict: feature length mismatch");
  double s = m.b;
  for (std::size_t j = 0; j < row.size(); ++j) s += m.w[j] * row[j];
  return s;
}

double svr_predict(const LinearSvrModel& m, std::span<const double> row) {
  return m.target_mean + svr_predict_z(m, row) * m.target_std;
}

LinearSvrModel svr_train(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& targets, double c,
                         double epsilon, double tol,
                         std::vector<double>* primal_trace) {
  const std::size_t n = rows.size();
  if (n == 0 || targets.size() != n)
    throw DataError("svr_train: empty or mismatched training set");
  if (!(c > 0) || epsilon < 0)
    throw UsageError("svr_train: bad hyperparameters");

  LinearSvrModel m;
  m.c = c;
  m.epsilon = epsilon;
  for (double t : targets) m.target_mean += t;
  m.target_mean /= double(n);
  double var = 0;
  for (double t : targets)
    var += (t - m.target_mean) * (t - m.target_mean);
  m.target_std = std::sqrt(var / double(n));

  std::vector<double> z(n, 0.0);
  if (m.target_std > 0)
    for (std::size_t i = 0; i < n; ++i)
      z[i] = (targets[i] - m.target_mean) / m.target_std;

  const std::vector<double> gram = build_gram(rows);
  std::vector<double> beta(n, 0.0);
  std::vector<double> f(n, 0.0);  // f_i = sum_j beta_j K_ij

  auto fresh_f = [&](const std::vector<double>& b, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += b[j] * gram[i * n + j];
      out[i] = s;
    }
  };
  auto dual_value = [&](const std::vector<double>& b,
                        const std::vector<double>& fb) {
    double lin = 0, quad = 0, l1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += b[i] * z[i];
      quad += b[i] * fb[i];
      l1 += std::abs(b[i]);
    }
    return lin - 0.5 * quad - epsilon * l1;
  };
  // exact solve on the nonzero interior coordinates with their current
  // signs; clamped to the box and accepted only if the dual improves
  auto try_polish = [&] {
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < n; ++i)
      if (beta[i] != 0.0 && std::abs(beta[i]) < c) interior.push_back(i);
    if (interior.empty()) return;
    const std::size_t m = interior.size();
    std::vector<char> in_set(n, 0);
    for (std::size_t i : interior) in_set[i] = 1;
    Eigen::MatrixXd a_mat(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = interior[r];
      double acc = z[i] - epsilon * (beta[i] > 0 ? 1.0 : -1.0);
      for (std::size_t j = 0; j < n; ++j)
        if (!in_set[j] && beta[j] != 0.0)
          acc -= beta[j] * gram[i * n + j];
      rhs(long(r)) = acc;
      for (std::size_t s = 0; s <= r; ++s)
        a_mat(long(r), long(s)) = a_mat(long(s), long(r)) =
            gram[i * n + interior[s]];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a_mat);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return;
    std::vector<double> cand = beta;
    for (std::size_t r = 0; r < m; ++r)
      cand[interior[r]] = std::clamp(sol(long(r)), -c, c);
    std::vector<double> fc(n);
    fresh_f(cand, fc);
    if (dual_value(cand, fc) > dual_value(beta, f)) {
      beta = std::move(cand);
      f = std::move(fc);
    }
  };

  // same best-iterate bookkeeping as svm_train: the returned coefficients
  // are the ones with the lowest primal seen, certified by the final dual
  std::vector<double> beta_best = beta;
  double primal_best = std::numeric_limits<double>::infinity();

  bool converged = false;
  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    if (epoch > 0 && epoch % kRefreshEpochs == 0) {
      fresh_f(beta, f);
      try_polish();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double kii = gram[i * n + i];
      const double g = f[i] - beta[i] * kii - z[i];
      double next;
      if (g > epsilon)
        next = -(g - epsilon) / kii;
      else if (g < -epsilon)
        next = -(g + epsilon) / kii;
      else
        next = 0.0;
      next = std::clamp(next, -c, c);
      const double delta = next - beta[i];
      if (delta == 0.0) continue;
      beta[i] = next;
      for (std::size_t j = 0; j < n; ++j) f[j] += delta * gram[i * n + j];
    }
    double wsq = 0, hinge = 0, lin = 0, l1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      wsq += beta[i] * f[i];
      hinge += std::max(0.0, std::abs(z[i] - f[i]) - epsilon);
      lin += beta[i] * z[i];
      l1 += std::abs(beta[i]);
    }
    const double primal = 0.5 * wsq + c * hinge;
    const double dual = lin - 0.5 * wsq - epsilon * l1;
    if (primal < primal_best) {
      primal_best = primal;
      beta_best = beta;
    }
    if (primal_trace) primal_trace->push_back(primal_best);
    if (primal - dual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("svr_train: solver did not reach the gap tolerance");

  m.w.assign(rows[0].size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (beta_best[i] == 0.0) continue;
    for (std::size_t j = 0; j < m.w.size(); ++j)
      m.w[j] += beta_best[i] * rows[i][j];
    m.b += beta_best[i];
  }
  return m;
}

double svr_objective(const LinearSvrModel& m,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets) {
  double reg = m.b * m.b;
  for (double w : m.w) reg += w * w;
  double loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double zi = m.target_std > 0
                    ? (targets[i] - m.target_mean) / m.target_std
                    : 0.0;
    loss += std::max(0.0, std::abs(zi - svr_predict_z(m, rows[i])) -
                              m.epsilon);
  }
  return 0.5 * reg + m.c * loss;
}

std::vector<int> cv_folds(std::size_t n, int k, uint64_t seed) {
  if (k < 2) throw UsageError("cv_folds: need at least 2 folds");
  if (n < std::size_t(k))
    throw DataError("cv_folds: fewer rows than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = int(i % std::size_t(k));
  return fold;
}

std::vector<int> cv_folds_stratified(const std::vector<int>& labels, int k,
                                     uint64_t seed) {
  if (k < 2) throw UsageError("cv_folds: need at least 2 folds");
  if (labels.size() < std::size_t(k))
    throw DataError("cv_folds: fewer rows than folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(pos);
  shuffle(neg);
  std::vector<int> fold(labels.size());
  for (std::size_t i = 0; i < pos.size(); ++i)
    fold[pos[i]] = int(i % std::size_t(k));
  for (std::size_t i = 0; i < neg.size(); ++i)
    fold[neg[i]] = int(i % std::size_t(k));
  return fold;
}

namespace {

template <typename T>
void split_by_fold(const std::vector<T>& all, const std::vector<int>& fold,
                   int f, std::vector<T>* train, std::vector<T>* val) {
  for (std::size_t i = 0; i < all.size(); ++i)
    (fold[i] == f ? *val : *train).push_back(all[i]);
}

}  // namespace

GridChoice grid_search_classify(const std::vector<std::vector<double>>& rows,
                                const std::vector<int>& labels,
                                const std::vector<double>& c_grid, int folds,
                                uint64_t seed) {
  if (c_grid.empty()) throw UsageError("grid_search: empty grid");
  std::vector<double> cs = c_grid;
  std::sort(cs.begin(), cs.end());
  const std::vector<int> fold = cv_folds_stratified(labels, folds, seed);

  GridChoice best;
  bool first = true;
  for (double c : cs) {
    double acc_sum = 0;
    int fold_count = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> tr, va;
      std::vector<int> trl, val;
      split_by_fold(rows, fold, f, &tr, &va);
      split_by_fold(labels, fold, f, &trl, &val);
      if (va.empty()) continue;
      // tiny folds can leave a single-class training subset; skip them
      // rather than failing the whole search
      bool pos = false, neg = false;
      for (int l : trl) (l == 1 ? pos : neg) = true;
      if (!pos || !neg) continue;
      LinearSvmModel m = svm_train(tr, trl, c);
      long correct = 0;
      for (std::size_t i = 0; i < va.size(); ++i)
        correct += (svm_decision(m, va[i]) >= 0 ? 1 : -1) == val[i];
      acc_sum += double(correct) / double(va.size());
      ++fold_count;
    }
    const double score = fold_count ? acc_sum / fold_count : 0.0;
    if (first || score > best.score) {
      best.c = c;
      best.score = score;
      first = false;
    }
  }
  return best;
}

GridChoice grid_search_regress(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& targets,
                               const std::vector<double>& c_grid,
                               const std::vector<double>& eps_grid, int folds,
                               uint64_t seed) {
  if (c_grid.empty() || eps_grid.empty())
    throw UsageError("grid_search: empty grid");
  std::vector<double> cs = c_grid, es = eps_grid;
  std::sort(cs.begin(), cs.end());
  std::sort(es.begin(), es.end());
  const std::vector<int> fold = cv_folds(rows.size(), folds, seed);

  GridChoice best;
  bool first = true;
  for (double c : cs) {
    for (double eps : es) {
      double mae_sum = 0;
      int fold_count = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> tr, va;
        std::vector<double> trt, vat;
        split_by_fold(rows, fold, f, &tr, &va);
        split_by_fold(targets, fold, f, &trt, &vat);
        if (va.empty()) continue;
        LinearSvrModel m = svr_train(tr, trt, c, eps);
        double mae = 0;
        for (std::size_t i = 0; i < va.size(); ++i)
          mae += std::abs(svr_predict(m, va[i]) - vat[i]);
        mae_sum += mae / double(va.size());
        ++fold_count;
      }
      const double score = fold_count ? -mae_sum / fold_count : 0.0;
      if (first || score > best.score) {
        best.c = c;
        best.epsilon = eps;
        best.score = score;
        first = false;
      }
    }
  }
  return best;
}

Source source_from_name(const std::string& s) {
  if (s == "rad") return Source::rad;
  if (s == "path") return Source::path;
  if (s == "radpath") return Source::radpath;
  throw UsageError("unknown feature source: " + s +
                   " (expected rad, path, or radpath)");
}

Task task_from_name(const std::string& s) {
  if (s == "classify") return Task::classify;
  if (s == "regress") return Task::regress;
  throw UsageError("unknown task: " + s + " (expected classify or regress)");
}

const char* source_name(Source s) {
  switch (s) {
    case Source::rad: return "rad";
    case Source::path: return "path";
    case Source::radpath: return "radpath";
  }
  return "?";
}

const char* task_name(Task t) {
  return t == Task::classify ? "classify" : "regress";
}

double survival_cutoff(std::span<const double> days, CutoffStat stat) {
  if (days.empty()) throw DataError("survival_cutoff: empty cohort");
  if (stat == CutoffStat::mean) {
    double s = 0;
    for (double d : days) s += d;
    return s / double(days.size());
  }
  std::vector<double> v(days.begin(), days.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

int label_for(double days, double cutoff) {
  return days >= cutoff ? 1 : -1;  // boundary counts as long
}

// fit the per-block projection bases on training subjects only
std::vector<rad::PcaBasis> fit_fold_bases(
    const std::vector<const SubjectFeatures*>& train,
    const rad::RadConfig& rc) {
  // a fold of n subjects supports at most n-1 informative axes; cap so the
  // fit never sees fewer rows than components (assembly pads the rest)
  const int k_eff =
      std::max(1, std::min(rc.pca_components, int(train.size()) - 1));
  std::vector<rad::PcaBasis> bases;
  bases.reserve(rad::kRadBlocks);
  for (int b = 0; b < rad::kRadBlocks; ++b) {
    std::vector<std::vector<double>> rows;
    rows.reserve(train.size());
    for (const SubjectFeatures* s : train) {
      if (s->rad.cdf32.size() != std::size_t(rad::kRadBlocks) * rc.pca_hist)
        throw DataError("subject " + s->subject_id +
                        " lacks the stored histogram block");
      rows.emplace_back(
          s->rad.cdf32.begin() + std::size_t(b) * rc.pca_hist,
          s->rad.cdf32.begin() + std::size_t(b + 1) * rc.pca_hist);
    }
    bases.push_back(rad::fit_pca(rows, k_eff));
  }
  return bases;
}

std::vector<double> assemble_features(const SubjectFeatures& s, Source src,
                                      const std::vector<rad::PcaBasis>& bases,
                                      const rad::RadConfig& rc) {
  std::vector<double> v;
  if (src != Source::path) v = rad::assemble_rad(s.rad, bases, rc);
  if (src != Source::rad) v.insert(v.end(), s.path.begin(), s.path.end());
  return v;
}

struct FoldOutput {
  FoldDiagnostics diag;
  std::vector<stats::Prediction> predictions;
};

FoldOutput run_fold(const std::vector<const SubjectFeatures*>& train,
                    const std::vector<const SubjectFeatures*>& test,
                    int fold_id, const MlConfig& cfg) {
  FoldOutput out;
  out.diag.fold = fold_id;
  for (const SubjectFeatures* s : test)
    out.diag.held_out.push_back(s->subject_id);

  if (cfg.source != Source::path)
    out.diag.pca = fit_fold_bases(train, cfg.rad_cfg);

  std::vector<std::vector<double>> raw_rows;
  raw_rows.reserve(train.size());
  for (const SubjectFeatures* s : train)
    raw_rows.push_back(
        assemble_features(*s, cfg.source, out.diag.pca, cfg.rad_cfg));

  Standardizer st;
  st.fit(raw_rows);
  out.diag.standardizer_mean = st.mean;
  out.diag.standardizer_std = st.stddev;
  std::vector<std::vector<double>> rows;
  rows.reserve(raw_rows.size());
  for (const auto& r : raw_rows) rows.push_back(st.apply(r));

  std::vector<double> days;
  days.reserve(train.size());
  for (const SubjectFeatures* s : train) days.push_back(s->survival_days);
  const double cutoff = survival_cutoff(days, cfg.cutoff_stat);
  out.diag.cutoff = cutoff;

  const uint64_t fold_seed = mix_seed(cfg.seed, uint64_t(fold_id));
  // small cohorts: never ask the grid search for more folds than rows
  const int gfolds = std::min(cfg.grid_folds, int(rows.size()));

  if (cfg.task == Task::classify) {
    std::vector<int> labels;
    labels.reserve(train.size());
    for (double d : days) labels.push_back(label_for(d, cutoff));
    bool pos = false, neg = false;
    for (int l : labels) (l == 1 ? pos : neg) = true;
    if (!pos || !neg)
      throw DataError("fold " + std::to_string(fold_id) +
                      ": training subjects all fall on one side of the "
                      "survival cutoff");
    GridChoice gc =
        grid_search_classify(rows, labels, cfg.c_grid, gfolds, fold_seed);
    out.diag.chosen_c = gc.c;
    LinearSvmModel m = svm_train(rows, labels, gc.c);
    out.diag.w = m.w;
    out.diag.b = m.b;
    for (const SubjectFeatures* s : test) {
      std::vector<double> x = st.apply(
          assemble_features(*s, cfg.source, out.diag.pca, cfg.rad_cfg));
      stats::Prediction p;
      p.subject_id = s->subject_id;
      p.fold = fold_id;
      p.score = svm_decision(m, x);
      p.predicted = p.score >= 0 ? 1 : -1;
      p.truth = label_for(s->survival_days, cutoff);
      out.predictions.push_back(std::move(p));
    }
  } else {
    GridChoice gc = grid_search_regress(rows, days, cfg.c_grid, cfg.eps_grid,
                                        gfolds, fold_seed);
    out.diag.chosen_c = gc.c;
    out.diag.chosen_epsilon = gc.epsilon;
    LinearSvrModel m = svr_train(rows, days, gc.c, gc.epsilon);
    out.diag.w = m.w;
    out.diag.b = m.b;
    out.diag.target_mean = m.target_mean;
    out.diag.target_std = m.target_std;
    for (const SubjectFeatures* s : test) {
      std::vector<double> x = st.apply(
          assemble_features(*s, cfg.source, out.diag.pca, cfg.rad_cfg));
      stats::Prediction p;
      p.subject_id = s->subject_id;
      p.fold = fold_id;
      p.score = svr_predict(m, x);
      p.predicted = label_for(p.score, cutoff);
      p.truth = label_for(s->survival_days, cutoff);
      out.predictions.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<const SubjectFeatures*> sorted_cohort(
    const std::vector<SubjectFeatures>& cohort) {
  std::vector<const SubjectFeatures*> ptrs;
  ptrs.reserve(cohort.size());
  for (const SubjectFeatures& s : cohort) ptrs.push_back(&s);
  std::sort(ptrs.begin(), ptrs.end(),
            [](const SubjectFeatures* a, const SubjectFeatures* b) {
              return a->subject_id < b->subject_id;
            });
  for (std::size_t i = 1; i < ptrs.size(); ++i)
    if (ptrs[i]->subject_id == ptrs[i - 1]->subject_id)
      throw DataError("duplicate subject id: " + ptrs[i]->subject_id);
  return ptrs;
}

}  // namespace

RunResult run_loocv(const std::vector<SubjectFeatures>& cohort,
                    const MlConfig& cfg) {
  if (cohort.size() < 3)
    throw DataError("run_loocv: need at least 3 subjects");
  const std::vector<const SubjectFeatures*> subjects = sorted_cohort(cohort);
  const int n = int(subjects.size());

  std::vector<FoldOutput> outputs(static_cast<std::size_t>(n));
  const int jobs = std::max(1, cfg.jobs);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const int f = next.fetch_add(1);
      if (f >= n) return;
      try {
        std::vector<const SubjectFeatures*> train, test;
        for (int i = 0; i < n; ++i)
          (i == f ? test : train).push_back(subjects[std::size_t(i)]);
        outputs[std::size_t(f)] = run_fold(train, test, f, cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunResult result;
  for (FoldOutput& fo : outputs) {
    for (stats::Prediction& p : fo.predictions)
      result.predictions.push_back(std::move(p));
    result.folds.push_back(std::move(fo.diag));
  }
  return result;
}

RunResult run_split(const std::vector<SubjectFeatures>& cohort,
                    const MlConfig& cfg) {
  const std::vector<const SubjectFeatures*> subjects = sorted_cohort(cohort);
  std::vector<const SubjectFeatures*> train, val;
  for (const SubjectFeatures* s : subjects) {
    if (s->split == "train")
      train.push_back(s);
    else if (s->split == "val")
      val.push_back(s);
    else
      throw DataError("subject " + s->subject_id +
                      ": split column value '" + s->split +
                      "' (expected train or val)");
  }
  if (train.empty() || val.empty())
    throw DataError("split protocol needs non-empty train and val splits");

  FoldOutput fo = run_fold(train, val, 0, cfg);
  RunResult result;
  result.predictions = std::move(fo.predictions);
  result.folds.push_back(std::move(fo.diag));
  return result;
}

}  // namespace radpath::ml
