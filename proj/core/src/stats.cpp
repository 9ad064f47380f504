#include "radpath/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace radpath::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least 2 samples");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw DataError("pearson: constant input, correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

RocResult roc_auc(std::span<const double> scores,
                  std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DataError("roc_auc: length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l == 1)
      ++n_pos;
    else if (l == -1)
      ++n_neg;
    else
      throw DataError("roc_auc: labels must be +1/-1");
  }
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_auc: both classes required");

  // average ranks of positives (Mann-Whitney with 1/2 tie credit)
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * double(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  RocResult r;
  r.auc = (rank_sum_pos - double(n_pos) * double(n_pos + 1) / 2.0) /
          (double(n_pos) * double(n_neg));

  const double a = r.auc;
  const double q1 = a / (2.0 - a);
  const double q2 = 2.0 * a * a / (1.0 + a);
  r.se = std::sqrt((a * (1 - a) + double(n_pos - 1) * (q1 - a * a) +
                    double(n_neg - 1) * (q2 - a * a)) /
                   (double(n_pos) * double(n_neg)));
  r.ci_lo = std::clamp(a - 1.96 * r.se, 0.0, 1.0);
  r.ci_hi = std::clamp(a + 1.96 * r.se, 0.0, 1.0);

  // threshold sweep: predicted positive iff score >= threshold
  r.curve.push_back({0, 0, std::numeric_limits<double>::infinity()});
  double tp = 0, fp = 0;
  for (std::size_t k = order.size(); k > 0;) {
    std::size_t j = k;
    double t = scores[order[k - 1]];
    while (k > 0 && scores[order[k - 1]] == t) --k;
    for (std::size_t m = k; m < j; ++m)
      (labels[order[m]] == 1 ? tp : fp) += 1;
    r.curve.push_back({fp / double(n_neg), tp / double(n_pos), t});
  }
  return r;
}

ConfusionMetrics confusion_metrics(std::span<const int> predicted,
                                   std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw DataError("confusion_metrics: length mismatch");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((predicted[i] != 1 && predicted[i] != -1) ||
        (truth[i] != 1 && truth[i] != -1))
      throw DataError("confusion_metrics: labels must be +1/-1");
    if (truth[i] == 1)
      (predicted[i] == 1 ? m.tp : m.fn) += 1;
    else
      (predicted[i] == -1 ? m.tn : m.fp) += 1;
  }
  if (m.tp + m.fn == 0 || m.tn + m.fp == 0)
    throw DataError("confusion_metrics: truth holds a single class");
  const double n = double(truth.size());
  m.accuracy = 100.0 * double(m.tp + m.tn) / n;
  m.sensitivity = 100.0 * double(m.tp) / double(m.tp + m.fn);
  m.specificity = 100.0 * double(m.tn) / double(m.tn + m.fp);
  return m;
}

KmCurve km_estimate(std::span<const double> times,
                    std::span<const int> events) {
  if (times.size() != events.size())
    throw DataError("km_estimate: length mismatch");
  if (times.empty()) throw DataError("km_estimate: empty input");
  for (double t : times)
    if (t < 0) throw DataError("km_estimate: negative time");

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });

  KmCurve curve;
  curve.push_back({0.0, 1.0, long(times.size())});
  double s = 1.0;
  std::size_t i = 0;
  while (i < order.size()) {
    double t = times[order[i]];
    long at_risk = long(order.size() - i);
    long deaths = 0;
    std::size_t j = i;
    while (j < order.size() && times[order[j]] == t) {
      deaths += events[order[j]] != 0;
      ++j;
    }
    if (deaths > 0) {
      s *= 1.0 - double(deaths) / double(at_risk);
      curve.push_back({t, s, at_risk});
    }
    i = j;
  }
  return curve;
}

namespace {

// one Breslow-tie event-time stratum for a binary covariate
struct CoxStratum {
  double n0 = 0, n1 = 0;  // at-risk counts per group
  double d0 = 0, d1 = 0;  // events per group
};

std::vector<CoxStratum> cox_strata(std::span<const double> times,
                                   std::span<const int> events,
                                   std::span<const int> group) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });
  double at0 = 0, at1 = 0;
  for (int g : group) (g ? at1 : at0) += 1;

  std::vector<CoxStratum> strata;
  std::size_t i = 0;
  while (i < order.size()) {
    double t = times[order[i]];
    CoxStratum s;
    s.n0 = at0;
    s.n1 = at1;
    std::size_t j = i;
    while (j < order.size() && times[order[j]] == t) {
      std::size_t idx = order[j];
      if (events[idx]) (group[idx] ? s.d1 : s.d0) += 1;
      (group[idx] ? at1 : at0) -= 1;
      ++j;
    }
    if (s.d0 + s.d1 > 0) strata.push_back(s);
    i = j;
  }
  return strata;
}

double cox_loglik(const std::vector<CoxStratum>& strata, double beta,
                  double* d1_sum = nullptr) {
  double ll = 0;
  for (const CoxStratum& s : strata) {
    double denom = s.n0 + s.n1 * std::exp(beta);
    ll += s.d1 * beta - (s.d0 + s.d1) * std::log(denom);
    if (d1_sum) *d1_sum += s.d1;
  }
  return ll;
}

}  // namespace

CoxResult cox_hr(std::span<const double> times, std::span<const int> events,
                 std::span<const int> group) {
  if (times.size() != events.size() || times.size() != group.size())
    throw DataError("cox_hr: length mismatch");
  bool has0 = false, has1 = false, has_event = false;
  for (std::size_t i = 0; i < group.size(); ++i) {
    (group[i] ? has1 : has0) = true;
    has_event |= events[i] != 0;
  }
  if (!has0 || !has1) throw DataError("cox_hr: both groups required");
  if (!has_event) throw DataError("cox_hr: no events observed");

  std::vector<CoxStratum> strata = cox_strata(times, events, group);

  // the score function has a root (finite MLE) only if each group records
  // an event while the other group is still at risk; otherwise the partial
  // likelihood is monotone in beta and the estimate is unbounded
  double pull_up = 0, pull_down = 0;
  for (const CoxStratum& s : strata) {
    if (s.n1 > 0) pull_up += s.d0;
    if (s.n0 > 0) pull_down += s.d1;
  }
  if (pull_up == 0 || pull_down == 0)
    throw NumericError(
        "cox_hr: monotone partial likelihood (complete separation between "
        "groups); hazard ratio is unbounded");

  CoxResult r;
  double beta = 0;
  double ll = cox_loglik(strata, beta);
  r.loglik_trace.push_back(ll);
  const int max_iter = 100;
  for (int it = 0; it < max_iter; ++it) {
    double g = 0, h = 0;
    for (const CoxStratum& s : strata) {
      double eb = std::exp(beta);
      double denom = s.n0 + s.n1 * eb;
      double frac = s.n1 * eb / denom;
      double d = s.d0 + s.d1;
      g += s.d1 - d * frac;
      h -= d * frac * (1.0 - frac);
    }
    if (std::abs(g) < 1e-10) break;
    if (h >= 0)
      throw NumericError("cox_hr: non-concave step (degenerate risk sets)");
    double step = -g / h;
    // halve until the partial log-likelihood does not decrease
    double new_beta = beta + step;
    double new_ll = cox_loglik(strata, new_beta);
    int halvings = 0;
    while (new_ll < ll && halvings < 50) {
      step *= 0.5;
      new_beta = beta + step;
      new_ll = cox_loglik(strata, new_beta);
      ++halvings;
    }
    beta = new_beta;
    ll = new_ll;
    r.loglik_trace.push_back(ll);
    if (std::abs(beta) > 30)
      throw NumericError(
          "cox_hr: monotone partial likelihood (complete separation between "
          "groups); hazard ratio is unbounded");
    if (std::abs(step) < 1e-12) break;
  }

  double h = 0;
  for (const CoxStratum& s : strata) {
    double eb = std::exp(beta);
    double denom = s.n0 + s.n1 * eb;
    double frac = s.n1 * eb / denom;
    h -= (s.d0 + s.d1) * frac * (1.0 - frac);
  }
  if (h >= 0 || !std::isfinite(h))
    throw NumericError("cox_hr: information matrix not positive definite");
  r.beta = beta;
  r.se = 1.0 / std::sqrt(-h);
  r.hr = std::exp(beta);
  r.ci_lo = std::exp(beta - 1.96 * r.se);
  r.ci_hi = std::exp(beta + 1.96 * r.se);
  double z = beta / r.se;
  r.p = gamma_q(0.5, 0.5 * z * z);  // two-sided Wald via chi-square(1)
  return r;
}

double logrank_p(std::span<const double> times, std::span<const int> events,
                 std::span<const int> group, double* statistic) {
  if (times.size() != events.size() || times.size() != group.size())
    throw DataError("logrank_p: length mismatch");
  bool has0 = false, has1 = false, has_event = false;
  for (std::size_t i = 0; i < group.size(); ++i) {
    (group[i] ? has1 : has0) = true;
    has_event |= events[i] != 0;
  }
  if (!has0 || !has1) throw DataError("logrank_p: both groups required");
  if (!has_event) throw DataError("logrank_p: no events observed");

  std::vector<CoxStratum> strata = cox_strata(times, events, group);
  double o1 = 0, e1 = 0, v = 0;
  for (const CoxStratum& s : strata) {
    double n = s.n0 + s.n1;
    double d = s.d0 + s.d1;
    o1 += s.d1;
    e1 += d * s.n1 / n;
    if (n > 1)
      v += d * (s.n1 / n) * (1.0 - s.n1 / n) * (n - d) / (n - 1.0);
  }
  double chi2 = v > 0 ? (o1 - e1) * (o1 - e1) / v : 0.0;
  if (statistic) *statistic = chi2;
  return gamma_q(0.5, 0.5 * chi2);
}

double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw UsageError("gamma_q: bad arguments");
  if (x == 0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // lower series: P(a,x) = sum x^n / (a)_{n+1}, Q = 1 - P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  // Lentz continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  double q = std::exp(-x + a * std::log(x) - lg) * h;
  return std::clamp(q, 0.0, 1.0);
}

ReportBundle build_report(const std::vector<Prediction>& predictions,
                          const std::vector<SubjectOutcome>& outcomes,
                          bool regression) {
  if (predictions.empty()) throw DataError("build_report: no predictions");
  std::map<std::string, const SubjectOutcome*> by_id;
  for (const SubjectOutcome& o : outcomes) by_id[o.subject_id] = &o;

  ReportBundle rb;
  rb.regression = regression;
  rb.n = long(predictions.size());

  std::vector<double> scores, days_long, days_short, days_all;
  std::vector<int> pred, truth, ev_long, ev_short, ev_all, grp;
  for (const Prediction& p : predictions) {
    auto it = by_id.find(p.subject_id);
    if (it == by_id.end())
      throw DataError("build_report: no outcome record for subject " +
                      p.subject_id);
    const SubjectOutcome& o = *it->second;
    scores.push_back(p.score);
    pred.push_back(p.predicted);
    truth.push_back(p.truth);
    days_all.push_back(o.survival_days);
    ev_all.push_back(o.event);
    grp.push_back(p.predicted == -1 ? 1 : 0);  // 1 = predicted short
    if (p.predicted == 1) {
      days_long.push_back(o.survival_days);
      ev_long.push_back(o.event);
    } else {
      days_short.push_back(o.survival_days);
      ev_short.push_back(o.event);
    }
    if (regression) {
      rb.scatter.push_back({p.score, o.survival_days});
      rb.scatter_ids.push_back(p.subject_id);
    }
  }

  rb.confusion = confusion_metrics(pred, truth);
  rb.roc = roc_auc(scores, truth);
  if (regression) rb.rho = pearson(scores, days_all);

  // survival comparison of the predicted groups: hazard of predicted-short
  // relative to predicted-long
  rb.cox = cox_hr(days_all, ev_all, grp);
  rb.logrank_pvalue =
      logrank_p(days_all, ev_all, grp, &rb.logrank_statistic);
  if (!days_long.empty()) rb.km_long = km_estimate(days_long, ev_long);
  if (!days_short.empty()) rb.km_short = km_estimate(days_short, ev_short);
  return rb;
}

}  // namespace radpath::stats
