#pragma once
// Evaluation statistics: Pearson correlation, ROC/AUC with standard error
// and confidence interval, confusion metrics, Kaplan-Meier curves, a
// one-covariate Cox model, and the log-rank test.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radpath/image.hpp"

namespace radpath::stats {

// Sample Pearson correlation. Throws DataError on mismatched/short inputs
// or when either side is constant (the coefficient is undefined).
double pearson(std::span<const double> x, std::span<const double> y);

struct RocPoint {
  double fpr = 0, tpr = 0, threshold = 0;
};

struct RocResult {
  double auc = 0;
  double se = 0;          // Hanley-McNeil closed form
  double ci_lo = 0, ci_hi = 0;  // auc +/- 1.96*se, clamped to [0,1]
  std::vector<RocPoint> curve;  // threshold sweep, descending thresholds
};

// Mann-Whitney AUC (ties credit 1/2), computed via average ranks. Labels
// are +1 (positive = long survivor) / -1. Throws DataError unless both
// classes are present.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ConfusionMetrics {
  long tp = 0, fn = 0, tn = 0, fp = 0;
  // percentages stored at full precision; round only for display
  double accuracy = 0, sensitivity = 0, specificity = 0;
};

// Sensitivity = recall of the long (+1) class, specificity = recall of the
// short (-1) class. Throws DataError when truth holds a single class.
ConfusionMetrics confusion_metrics(std::span<const int> predicted,
                                   std::span<const int> truth);

struct KmPoint {
  double time = 0;
  double survival = 1;
  long at_risk = 0;
};
using KmCurve = std::vector<KmPoint>;

// Product-limit estimator. events: 1 = death observed, 0 = censored.
// The curve starts with an explicit (0, 1, n) row and then steps at each
// distinct event time. Throws DataError on negative times or empty input.
KmCurve km_estimate(std::span<const double> times, std::span<const int> events);

struct CoxResult {
  double beta = 0;
  double se = 0;
  double hr = 1;                 // exp(beta)
  double ci_lo = 1, ci_hi = 1;   // exp(beta -/+ 1.96*se)
  double p = 1;                  // Wald
  std::vector<double> loglik_trace;  // partial log-likelihood per iteration
};

// Cox proportional hazards with a single binary covariate (group: 0/1),
// Breslow tie handling, safeguarded Newton iteration. Throws DataError when
// a group is missing or no events exist; NumericError on monotone
// likelihood (complete separation).
CoxResult cox_hr(std::span<const double> times, std::span<const int> events,
                 std::span<const int> group);

// Log-rank test across two groups; chi-square statistic with 1 dof is
// written to *statistic when non-null. Throws DataError when a group is
// missing or no events exist.
double logrank_p(std::span<const double> times, std::span<const int> events,
                 std::span<const int> group, double* statistic = nullptr);

// Regularized upper incomplete gamma Q(a, x) (series / continued fraction);
// chi-square survival with k dof = Q(k/2, x/2). Exposed for testing.
double gamma_q(double a, double x);

// ---- report assembly ----

struct Prediction {
  std::string subject_id;
  int fold = 0;
  double score = 0;   // decision value (classify) or predicted days (regress)
  int predicted = 0;  // +1 long / -1 short
  int truth = 0;      // +1 / -1 from the evaluation cutoff rule
};

struct SubjectOutcome {
  std::string subject_id;
  double survival_days = 0;
  int event = 1;  // 1 = death observed, 0 = censored
};

struct ReportBundle {
  bool regression = false;
  long n = 0;
  ConfusionMetrics confusion;
  RocResult roc;
  std::optional<double> rho;  // regression only: predicted vs actual days
  CoxResult cox;              // hazard of predicted-short vs predicted-long
  double logrank_statistic = 0;
  double logrank_pvalue = 1;
  KmCurve km_long, km_short;  // per predicted group
  // regression scatter rows: (subject, predicted days, actual days)
  std::vector<std::array<double, 2>> scatter;
  std::vector<std::string> scatter_ids;
};

// Joins predictions with outcomes (by subject id) and assembles every
// reported statistic. Pure function of its inputs.
ReportBundle build_report(const std::vector<Prediction>& predictions,
                          const std::vector<SubjectOutcome>& outcomes,
                          bool regression);

}  // namespace radpath::stats
