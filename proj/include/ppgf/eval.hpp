#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppgf/common.hpp"
#include "ppgf/data.hpp"

namespace ppgf {

struct PointMetrics {
  double rmse = 0, mae = 0;
  std::optional<double> corr;  // absent when length < 2 or a side is constant
};

PointMetrics point_metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// Pearson correlation alone; ZeroVariance when undefined.
double pearson_corr(const std::vector<double>& y_true, const std::vector<double>& y_pred);

struct PerClass {
  int cls = 0;  // 1-based
  double precision = 0, recall = 0, f1 = 0;
  int support = 0;  // true-label count
};

struct MacroMetrics {
  double precision = 0, recall = 0, f1 = 0;
  std::vector<PerClass> per_class;
};

// Unweighted means over all K classes; 0/0 counts as 0, absent classes
// contribute zeros. Labels are 1-based.
MacroMetrics macro_classification(const std::vector<int>& k_true, const std::vector<int>& k_pred, int K);

struct PatternRecord {
  int k = 0;  // 1-based
  int count = 0;
  std::optional<double> rmse, mae, corr;
  PerClass cls;
};

std::vector<PatternRecord> per_pattern_report(const GroupingScheme& scheme, const std::vector<double>& y_true,
                                              const std::vector<double>& y_pred, const std::vector<int>& k_true,
                                              const std::vector<int>& k_pred);

// Normalized autocovariance R(0..max_lag) with the biased (1/t) estimator;
// R(0) is exactly 1.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);

// Calibration outcome counts: the pre-gate (aux) prediction against the final
// prediction, both judged on the first horizon step.
struct ConfidenceDiag {
  double mean_c_hat_correct = 0;    // mean c-hat over final-correct samples
  double mean_c_hat_incorrect = 0;  // mean c-hat over final-incorrect samples
  int n_correct = 0, n_incorrect = 0;
  int kept_correct = 0;             // aux right, final right
  int falsely_calibrated = 0;       // aux right, final wrong
  int successfully_calibrated = 0;  // aux wrong, final right
  int uncalibrated_error = 0;       // aux wrong, final wrong
};

ConfidenceDiag confidence_diagnostics(const std::vector<int>& k_true_first, const std::vector<int>& k_aux,
                                      const std::vector<int>& k_final_first, const std::vector<double>& c_hat);

struct EvalReport {
  int n = 0;  // evaluated sample-steps
  std::optional<PointMetrics> point;       // absent for classification-only variants
  std::optional<MacroMetrics> macro;       // absent for regression-only variants
  std::vector<PatternRecord> per_pattern;  // empty without a classifier
  std::optional<ConfidenceDiag> confidence;
};

}  // namespace ppgf
