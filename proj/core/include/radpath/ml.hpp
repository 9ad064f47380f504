#pragma once
// Linear SVM / SVR with dual coordinate descent, z-score standardization,
// 5-fold grid search, and the LOOCV / split evaluation protocols.
//
// Both solvers fold the bias into an augmented feature (x, 1), so the
// regularizer is 1/2*(|w|^2 + b^2); the duality-gap tolerance and the
// reported objective refer to that augmented problem.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radpath/image.hpp"
#include "radpath/rad_features.hpp"
#include "radpath/stats.hpp"

namespace radpath::ml {

// ---- standardization ----

struct Standardizer {
  std::vector<double> mean, stddev;  // population std (divide by n)

  void fit(const std::vector<std::vector<double>>& rows);
  // (x - mean) / std; features with std == 0 map to 0
  std::vector<double> apply(std::span<const double> row) const;
};

// ---- solvers ----

struct LinearSvmModel {
  std::vector<double> w;
  double b = 0;
  double c = 1;
};

double svm_decision(const LinearSvmModel& m, std::span<const double> row);

// L1-hinge SVM trained by dual coordinate descent to duality gap < tol,
// with a periodic exact solve on the interior coordinates (accepted only
// when it raises the dual). labels are +1/-1; deterministic update order.
// The returned model is the iterate with the lowest primal objective seen;
// primal_trace, when given, records that objective once per epoch, so the
// recorded sequence is non-increasing.
LinearSvmModel svm_train(const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels, double c,
                         double tol = 1e-6,
                         std::vector<double>* primal_trace = nullptr);

// 1/2*(|w|^2 + b^2) + c * sum hinge  (the objective svm_train minimizes)
double svm_objective(const LinearSvmModel& m,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels);

struct LinearSvrModel {
  std::vector<double> w;
  double b = 0;
  double c = 1;
  double epsilon = 0.1;
  // z-scoring of the training targets; predictions are de-standardized
  double target_mean = 0;
  double target_std = 1;
};

// prediction in z-scored target space
double svr_predict_z(const LinearSvrModel& m, std::span<const double> row);
// de-standardized prediction (days)
double svr_predict(const LinearSvrModel& m, std::span<const double> row);

// epsilon-insensitive L1 SVR on z-scored targets, dual coordinate descent
// to duality gap < tol with the same periodic interior polish and
// best-primal-iterate selection as svm_train. target_mean/std are recorded
// in the model. primal_trace, when given, records the best primal objective
// once per epoch (non-increasing).
LinearSvrModel svr_train(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& targets, double c,
                         double epsilon, double tol = 1e-6,
                         std::vector<double>* primal_trace = nullptr);

// 1/2*(|w|^2 + b^2) + c * sum max(0, |z_i - f_i| - eps), z = z-scored target
double svr_objective(const LinearSvrModel& m,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets);

// ---- cross-validation utilities ----

// deterministic fold assignment: shuffled by the seed, dealt round-robin
std::vector<int> cv_folds(std::size_t n, int k, uint64_t seed);
// class-stratified variant (labels +1/-1)
std::vector<int> cv_folds_stratified(const std::vector<int>& labels, int k,
                                     uint64_t seed);

struct GridChoice {
  double c = 1;
  double epsilon = 0;  // unused for classification
  double score = 0;    // mean fold accuracy (classify) or -MAE (regress)
};

// stratified 5-fold accuracy maximization; ties toward smaller C
GridChoice grid_search_classify(const std::vector<std::vector<double>>& rows,
                                const std::vector<int>& labels,
                                const std::vector<double>& c_grid, int folds,
                                uint64_t seed);
// plain 5-fold mean-absolute-error minimization (raw-day targets; the
// solver z-scores internally); ties toward smaller C, then smaller epsilon
GridChoice grid_search_regress(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& targets,
                               const std::vector<double>& c_grid,
                               const std::vector<double>& eps_grid, int folds,
                               uint64_t seed);

// ---- evaluation protocols ----

enum class Source { rad, path, radpath };
enum class Task { classify, regress };
enum class CutoffStat { mean, median };

Source source_from_name(const std::string& s);
Task task_from_name(const std::string& s);
const char* source_name(Source s);
const char* task_name(Task t);

// survival threshold learned from training subjects; long <=> days >= cutoff
double survival_cutoff(std::span<const double> days, CutoffStat stat);

struct SubjectFeatures {
  std::string subject_id;
  double survival_days = 0;
  int event = 1;
  std::string split;  // "train" / "val" for the split protocol
  rad::RadRaw rad;    // base + stored histograms (empty when unused)
  std::vector<double> path;
};

struct MlConfig {
  Task task = Task::classify;
  Source source = Source::radpath;
  CutoffStat cutoff_stat = CutoffStat::mean;
  std::vector<double> c_grid = {0.03125, 0.125, 0.5, 2.0, 8.0, 32.0};
  std::vector<double> eps_grid = {0.01, 0.1, 0.5};
  int grid_folds = 5;
  uint64_t seed = 0;
  int jobs = 1;
  rad::RadConfig rad_cfg;
};

// everything fitted inside one fold, exposed so tests can prove held-out
// rows never leak into fold statistics
struct FoldDiagnostics {
  int fold = 0;
  std::vector<std::string> held_out;
  std::vector<double> standardizer_mean, standardizer_std;
  double cutoff = 0;
  double chosen_c = 0, chosen_epsilon = 0;
  std::vector<rad::PcaBasis> pca;  // per (sequence, region) block
  std::vector<double> w;
  double b = 0;
  double target_mean = 0, target_std = 1;  // regression only
};

struct RunResult {
  std::vector<stats::Prediction> predictions;  // subject-id order
  std::vector<FoldDiagnostics> folds;
};

// leave-one-out: every fold refits standardizer, cutoff, projection bases,
// grid search, and the model on the remaining subjects
RunResult run_loocv(const std::vector<SubjectFeatures>& cohort,
                    const MlConfig& cfg);
// single split: fit on split=="train", predict each split=="val" subject
RunResult run_split(const std::vector<SubjectFeatures>& cohort,
                    const MlConfig& cfg);

}  // namespace radpath::ml
