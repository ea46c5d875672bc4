#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ppgf/common.hpp"

namespace ppgf {

// Raw multivariate series: t rows by D numeric columns, one of which is the
// forecast target. Timestamps, when present in the source CSV, are carried
// through untouched.
struct SeriesFrame {
  std::vector<double> values;  // t*D row-major
  int t = 0;
  int d = 0;
  std::vector<std::string> column_names;
  int target_col = 0;
  std::vector<std::string> timestamps;  // empty or length t

  double at(int row, int col) const { return values[static_cast<size_t>(row) * d + col]; }
  double target(int row) const { return at(row, target_col); }
  std::vector<double> target_column() const;
};

struct SplitSpec {
  double train_frac = 0.6;
  double valid_frac = 0.2;
  double test_frac = 0.2;
  // Explicit row counts override the fractions when set.
  std::optional<std::array<int, 3>> explicit_rows;
};

struct Splits {
  SeriesFrame train, valid, test;
};

// Per-channel z-score parameters, fit on the training split only.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  SeriesFrame apply(const SeriesFrame& f) const;
  SeriesFrame invert(const SeriesFrame& f) const;
};

// K contiguous intervals over the raw target scale. boundaries are stored as
// parallel left/right arrays with left[k] == right[k-1].
struct GroupingScheme {
  int K = 0;
  std::vector<double> left;
  std::vector<double> right;

  double width(int k1based) const { return right[static_cast<size_t>(k1based - 1)] - left[static_cast<size_t>(k1based - 1)]; }
  double lo() const { return left.front(); }
  double hi() const { return right.back(); }
};

// Sliding-window samples: x is the normalized input block, y raw targets,
// dy the within-interval offsets, k the 1-based group labels.
struct WindowedDataset {
  int N = 0, L = 0, T = 0, D = 0, K = 0;
  std::vector<double> x;   // N*L*D
  std::vector<double> y;   // N*T
  std::vector<double> dy;  // N*T
  std::vector<int> k;      // N*T, in 1..K
};

// CSV: UTF-8, comma separated, one header row, optional leading timestamp
// column (detected when its first data cell is not numeric), remaining
// columns numeric. Lines starting with '#' before the header are ignored
// (the synth generators write their parameters there).
SeriesFrame load_csv(const std::string& path, const std::string& target_col_name);

Splits split_chronological(const SeriesFrame& frame, const SplitSpec& spec);

Normalizer fit_normalizer(const SeriesFrame& train);

// Quantile grouping over the ascending-sorted training targets:
//   left_k  = sorted[floor((t-1)(k-1)/K)],  right_k = sorted[floor((t-1)k/K)]
// (zero-based indexing into the sorted array).
GroupingScheme fit_grouping(const std::vector<double>& train_targets, int K);

// Equal-width baseline covering [min, max] of the training targets.
GroupingScheme fit_grouping_equal_width(const std::vector<double>& train_targets, int K);

// Smallest k with left_k <= y < right_k; the last interval is closed above.
// Out-of-range values clamp to the end groups. Zero-width intervals are
// skipped by the scan.
int assign_group(const GroupingScheme& scheme, double y);

// (k, dy) with dy = (y - left_k)/(right_k - left_k), clamped to [0,1] for
// out-of-range training targets.
std::pair<int, double> encode_relative(const GroupingScheme& scheme, double y);

// y = dy*(right_k - left_k) + left_k. dy may exceed 1 (no clamp).
double decode_absolute(const GroupingScheme& scheme, int k, double dy);

WindowedDataset make_windows(const SeriesFrame& frame, const GroupingScheme& scheme, const Normalizer& norm,
                             int lookback, int horizon);

}  // namespace ppgf
