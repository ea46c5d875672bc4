#include "ppgf/eval.hpp"

#include <cmath>
#include <limits>

namespace ppgf {

namespace {

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  if (n < 2) return std::nullopt;
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / (std::sqrt(saa) * std::sqrt(sbb));
}

}  // namespace

PointMetrics point_metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size()) fail(Errc::ShapeMismatch, "metric input lengths differ");
  if (y_true.empty()) fail(Errc::ShapeMismatch, "metric inputs empty");
  PointMetrics m;
  double se = 0, ae = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_true[i] - y_pred[i];
    se += d * d;
    ae += std::abs(d);
  }
  m.rmse = std::sqrt(se / static_cast<double>(y_true.size()));
  m.mae = ae / static_cast<double>(y_true.size());
  m.corr = pearson(y_true, y_pred);
  return m;
}

double pearson_corr(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size()) fail(Errc::ShapeMismatch, "metric input lengths differ");
  auto c = pearson(y_true, y_pred);
  if (!c) fail(Errc::ZeroVariance, "correlation undefined (length < 2 or zero variance)");
  return *c;
}

MacroMetrics macro_classification(const std::vector<int>& k_true, const std::vector<int>& k_pred, int K) {
  if (k_true.size() != k_pred.size()) fail(Errc::ShapeMismatch, "label arrays differ in length");
  for (size_t i = 0; i < k_true.size(); ++i) {
    if (k_true[i] < 1 || k_true[i] > K) fail(Errc::LabelOutOfRange, "true label " + str(k_true[i]));
    if (k_pred[i] < 1 || k_pred[i] > K) fail(Errc::LabelOutOfRange, "predicted label " + str(k_pred[i]));
  }
  std::vector<int> tp(static_cast<size_t>(K), 0), fp(static_cast<size_t>(K), 0), fn(static_cast<size_t>(K), 0);
  for (size_t i = 0; i < k_true.size(); ++i) {
    if (k_true[i] == k_pred[i]) {
      ++tp[static_cast<size_t>(k_true[i] - 1)];
    } else {
      ++fp[static_cast<size_t>(k_pred[i] - 1)];
      ++fn[static_cast<size_t>(k_true[i] - 1)];
    }
  }
  MacroMetrics m;
  m.per_class.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    PerClass& pc = m.per_class[static_cast<size_t>(k)];
    pc.cls = k + 1;
    pc.support = tp[static_cast<size_t>(k)] + fn[static_cast<size_t>(k)];
    const int denp = tp[static_cast<size_t>(k)] + fp[static_cast<size_t>(k)];
    const int denr = tp[static_cast<size_t>(k)] + fn[static_cast<size_t>(k)];
    pc.precision = denp > 0 ? static_cast<double>(tp[static_cast<size_t>(k)]) / denp : 0.0;
    pc.recall = denr > 0 ? static_cast<double>(tp[static_cast<size_t>(k)]) / denr : 0.0;
    pc.f1 = (pc.precision + pc.recall) > 0 ? 2 * pc.precision * pc.recall / (pc.precision + pc.recall) : 0.0;
    m.precision += pc.precision;
    m.recall += pc.recall;
    m.f1 += pc.f1;
  }
  m.precision /= K;
  m.recall /= K;
  m.f1 /= K;
  return m;
}

std::vector<PatternRecord> per_pattern_report(const GroupingScheme& scheme, const std::vector<double>& y_true,
                                              const std::vector<double>& y_pred, const std::vector<int>& k_true,
                                              const std::vector<int>& k_pred) {
  if (k_true.size() != k_pred.size()) fail(Errc::ShapeMismatch, "label arrays differ in length");
  const bool with_points = !y_true.empty();
  if (with_points && (y_true.size() != y_pred.size() || y_true.size() != k_true.size()))
    fail(Errc::ShapeMismatch, "per-pattern input lengths differ");

  MacroMetrics mc = macro_classification(k_true, k_pred, scheme.K);
  std::vector<PatternRecord> out(static_cast<size_t>(scheme.K));
  for (int k = 1; k <= scheme.K; ++k) {
    PatternRecord& r = out[static_cast<size_t>(k - 1)];
    r.k = k;
    r.cls = mc.per_class[static_cast<size_t>(k - 1)];
    std::vector<double> yt, yp;
    for (size_t i = 0; i < k_true.size(); ++i) {
      if (k_true[i] != k) continue;
      ++r.count;
      if (with_points) {
        yt.push_back(y_true[i]);
        yp.push_back(y_pred[i]);
      }
    }
    if (with_points && r.count >= 1) {
      double se = 0, ae = 0;
      for (size_t i = 0; i < yt.size(); ++i) {
        const double d = yt[i] - yp[i];
        se += d * d;
        ae += std::abs(d);
      }
      r.rmse = std::sqrt(se / r.count);
      r.mae = ae / r.count;
      r.corr = pearson(yt, yp);  // omitted for size < 2 or zero variance
    }
  }
  return out;
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
  const int t = static_cast<int>(series.size());
  if (max_lag < 0 || t <= max_lag) fail(Errc::SeriesTooShort, "need length > max_lag");
  double mu = 0;
  for (double v : series) mu += v;
  mu /= t;
  double var = 0;
  for (double v : series) var += (v - mu) * (v - mu);
  var /= t;
  if (var <= 0.0) fail(Errc::ZeroVariance, "constant series has no autocorrelation");
  std::vector<double> r(static_cast<size_t>(max_lag) + 1);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double s = 0;
    for (int i = 0; i + lag < t; ++i) s += (series[static_cast<size_t>(i)] - mu) * (series[static_cast<size_t>(i + lag)] - mu);
    r[static_cast<size_t>(lag)] = (s / t) / var;
  }
  r[0] = 1.0;  // exactly, by definition
  return r;
}

ConfidenceDiag confidence_diagnostics(const std::vector<int>& k_true_first, const std::vector<int>& k_aux,
                                      const std::vector<int>& k_final_first, const std::vector<double>& c_hat) {
  const size_t n = k_true_first.size();
  if (k_aux.size() != n || k_final_first.size() != n || c_hat.size() != n)
    fail(Errc::ShapeMismatch, "confidence diagnostic arrays differ in length");
  ConfidenceDiag d;
  double sc = 0, si = 0;
  for (size_t i = 0; i < n; ++i) {
    const bool aux_ok = k_aux[i] == k_true_first[i];
    const bool fin_ok = k_final_first[i] == k_true_first[i];
    if (fin_ok) {
      ++d.n_correct;
      sc += c_hat[i];
    } else {
      ++d.n_incorrect;
      si += c_hat[i];
    }
    if (aux_ok && fin_ok) ++d.kept_correct;
    if (aux_ok && !fin_ok) ++d.falsely_calibrated;
    if (!aux_ok && fin_ok) ++d.successfully_calibrated;
    if (!aux_ok && !fin_ok) ++d.uncalibrated_error;
  }
  d.mean_c_hat_correct = d.n_correct ? sc / d.n_correct : std::numeric_limits<double>::quiet_NaN();
  d.mean_c_hat_incorrect = d.n_incorrect ? si / d.n_incorrect : std::numeric_limits<double>::quiet_NaN();
  return d;
}

}  // namespace ppgf
