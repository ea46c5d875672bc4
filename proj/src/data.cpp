#include "ppgf/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ppgf {

std::vector<double> SeriesFrame::target_column() const {
  std::vector<double> out(static_cast<size_t>(t));
  for (int i = 0; i < t; ++i) out[static_cast<size_t>(i)] = target(i);
  return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& cell, double* out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

}  // namespace

SeriesFrame load_csv(const std::string& path, const std::string& target_col_name) {
  std::ifstream in(path);
  if (!in) fail(Errc::FileNotFound, path);

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;  // generator parameter comments
    header = split_commas(line);
    break;
  }
  if (header.empty()) fail(Errc::EmptyFile, path + " has no header row");

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_commas(line));
  }
  if (rows.empty()) fail(Errc::EmptyFile, path + " has no data rows");

  // Leading timestamp column: first cell of the first data row not numeric.
  double probe;
  const bool has_ts = header.size() > 1 && !parse_number(rows[0][0], &probe);
  const int first_numeric = has_ts ? 1 : 0;
  const int d = static_cast<int>(header.size()) - first_numeric;
  if (d < 1) fail(Errc::EmptyFile, path + " has no numeric columns");

  SeriesFrame f;
  f.d = d;
  f.t = static_cast<int>(rows.size());
  f.column_names.assign(header.begin() + first_numeric, header.end());
  for (auto& n : f.column_names) n = trim(n);

  int target = -1;
  for (int c = 0; c < d; ++c)
    if (f.column_names[static_cast<size_t>(c)] == target_col_name) target = c;
  if (target < 0) fail(Errc::UnknownColumn, "target column '" + target_col_name + "' not in header of " + path);
  f.target_col = target;

  f.values.resize(static_cast<size_t>(f.t) * d);
  if (has_ts) f.timestamps.resize(static_cast<size_t>(f.t));
  for (int r = 0; r < f.t; ++r) {
    const auto& cells = rows[static_cast<size_t>(r)];
    if (cells.size() != header.size())
      fail(Errc::MalformedRow, path + " row " + str(r + 1) + " has " + str(cells.size()) + " cells, expected " +
                                   str(header.size()));
    if (has_ts) f.timestamps[static_cast<size_t>(r)] = cells[0];
    for (int c = 0; c < d; ++c) {
      double v;
      if (!parse_number(cells[static_cast<size_t>(c + first_numeric)], &v))
        fail(Errc::NonNumericCell, path + " row " + str(r + 1) + " column '" + f.column_names[static_cast<size_t>(c)] +
                                       "': '" + cells[static_cast<size_t>(c + first_numeric)] + "'");
      if (!std::isfinite(v))
        fail(Errc::NonFiniteValue, path + " row " + str(r + 1) + " column '" + f.column_names[static_cast<size_t>(c)] + "'");
      f.values[static_cast<size_t>(r) * d + c] = v;
    }
  }
  return f;
}

namespace {

SeriesFrame slice_frame(const SeriesFrame& f, int begin, int end) {
  SeriesFrame out;
  out.d = f.d;
  out.t = end - begin;
  out.column_names = f.column_names;
  out.target_col = f.target_col;
  out.values.assign(f.values.begin() + static_cast<int64_t>(begin) * f.d, f.values.begin() + static_cast<int64_t>(end) * f.d);
  if (!f.timestamps.empty()) out.timestamps.assign(f.timestamps.begin() + begin, f.timestamps.begin() + end);
  return out;
}

}  // namespace

Splits split_chronological(const SeriesFrame& frame, const SplitSpec& spec) {
  int n_train, n_valid, n_test;
  if (spec.explicit_rows) {
    n_train = (*spec.explicit_rows)[0];
    n_valid = (*spec.explicit_rows)[1];
    n_test = (*spec.explicit_rows)[2];
    if (n_train + n_valid + n_test != frame.t)
      fail(Errc::BadFractions, "explicit split rows sum to " + str(n_train + n_valid + n_test) + ", frame has " + str(frame.t));
  } else {
    for (double fr : {spec.train_frac, spec.valid_frac, spec.test_frac})
      if (!(fr > 0.0 && fr < 1.0)) fail(Errc::BadFractions, "fractions must lie in (0,1)");
    if (std::abs(spec.train_frac + spec.valid_frac + spec.test_frac - 1.0) > 1e-9)
      fail(Errc::BadFractions, "fractions must sum to 1");
    const int b1 = static_cast<int>(std::floor(frame.t * spec.train_frac));
    const int b2 = static_cast<int>(std::floor(frame.t * (spec.train_frac + spec.valid_frac)));
    n_train = b1;
    n_valid = b2 - b1;
    n_test = frame.t - b2;
  }
  if (n_train < 1 || n_valid < 1 || n_test < 1)
    fail(Errc::EmptySplit, "split sizes " + str(n_train) + "/" + str(n_valid) + "/" + str(n_test) + " from t=" + str(frame.t));
  Splits s;
  s.train = slice_frame(frame, 0, n_train);
  s.valid = slice_frame(frame, n_train, n_train + n_valid);
  s.test = slice_frame(frame, n_train + n_valid, frame.t);
  return s;
}

Normalizer fit_normalizer(const SeriesFrame& train) {
  Normalizer n;
  n.mean.resize(static_cast<size_t>(train.d));
  n.stddev.resize(static_cast<size_t>(train.d));
  for (int c = 0; c < train.d; ++c) {
    double mu = 0.0;
    for (int r = 0; r < train.t; ++r) mu += train.at(r, c);
    mu /= train.t;
    double var = 0.0;
    for (int r = 0; r < train.t; ++r) {
      const double d = train.at(r, c) - mu;
      var += d * d;
    }
    var /= train.t;
    if (var <= 0.0)
      fail(Errc::ZeroVariance, "channel '" + train.column_names[static_cast<size_t>(c)] + "' is constant on the training split");
    n.mean[static_cast<size_t>(c)] = mu;
    n.stddev[static_cast<size_t>(c)] = std::sqrt(var);
  }
  return n;
}

SeriesFrame Normalizer::apply(const SeriesFrame& f) const {
  if (static_cast<int>(mean.size()) != f.d) fail(Errc::ShapeMismatch, "normalizer channel count");
  SeriesFrame out = f;
  for (int r = 0; r < f.t; ++r)
    for (int c = 0; c < f.d; ++c)
      out.values[static_cast<size_t>(r) * f.d + c] = (f.at(r, c) - mean[static_cast<size_t>(c)]) / stddev[static_cast<size_t>(c)];
  return out;
}

SeriesFrame Normalizer::invert(const SeriesFrame& f) const {
  if (static_cast<int>(mean.size()) != f.d) fail(Errc::ShapeMismatch, "normalizer channel count");
  SeriesFrame out = f;
  for (int r = 0; r < f.t; ++r)
    for (int c = 0; c < f.d; ++c)
      out.values[static_cast<size_t>(r) * f.d + c] = f.at(r, c) * stddev[static_cast<size_t>(c)] + mean[static_cast<size_t>(c)];
  return out;
}

GroupingScheme fit_grouping(const std::vector<double>& train_targets, int K) {
  if (K < 2) fail(Errc::KTooSmall, "group count " + str(K) + " (need K >= 2)");
  const int64_t t = static_cast<int64_t>(train_targets.size());
  if (t < 2) fail(Errc::TooFewValues, "need at least 2 target values, got " + str(t));
  std::vector<double> sorted = train_targets;
  std::sort(sorted.begin(), sorted.end());
  GroupingScheme s;
  s.K = K;
  s.left.resize(static_cast<size_t>(K));
  s.right.resize(static_cast<size_t>(K));
  for (int k = 1; k <= K; ++k) {
    s.left[static_cast<size_t>(k - 1)] = sorted[static_cast<size_t>((t - 1) * (k - 1) / K)];
    s.right[static_cast<size_t>(k - 1)] = sorted[static_cast<size_t>((t - 1) * k / K)];
  }
  return s;
}

GroupingScheme fit_grouping_equal_width(const std::vector<double>& train_targets, int K) {
  if (K < 2) fail(Errc::KTooSmall, "group count " + str(K) + " (need K >= 2)");
  if (train_targets.size() < 2) fail(Errc::TooFewValues, "need at least 2 target values");
  const auto [mn_it, mx_it] = std::minmax_element(train_targets.begin(), train_targets.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx <= mn) fail(Errc::ZeroVariance, "all target values equal; cannot form equal-width groups");
  GroupingScheme s;
  s.K = K;
  s.left.resize(static_cast<size_t>(K));
  s.right.resize(static_cast<size_t>(K));
  const double w = (mx - mn) / K;
  for (int k = 1; k <= K; ++k) {
    s.left[static_cast<size_t>(k - 1)] = k == 1 ? mn : mn + w * (k - 1);
    s.right[static_cast<size_t>(k - 1)] = k == K ? mx : mn + w * k;
  }
  return s;
}

int assign_group(const GroupingScheme& scheme, double y) {
  if (y <= scheme.lo()) {
    // below range clamps to the first non-degenerate interval
    for (int k = 1; k <= scheme.K; ++k)
      if (scheme.width(k) > 0.0) return k;
    return 1;
  }
  if (y >= scheme.hi()) {
    for (int k = scheme.K; k >= 1; --k)
      if (scheme.width(k) > 0.0) return k;
    return scheme.K;
  }
  for (int k = 1; k <= scheme.K; ++k) {
    const double l = scheme.left[static_cast<size_t>(k - 1)];
    const double r = scheme.right[static_cast<size_t>(k - 1)];
    if (l <= y && y < r) return k;  // right-open; zero-width intervals never match
  }
  return scheme.K;
}

std::pair<int, double> encode_relative(const GroupingScheme& scheme, double y) {
  const int k = assign_group(scheme, y);
  const double w = scheme.width(k);
  if (w <= 0.0)
    fail(Errc::ZeroWidthInterval, "group " + str(k) + " has zero width (heavily tied training targets)");
  double dy = (y - scheme.left[static_cast<size_t>(k - 1)]) / w;
  if (dy < 0.0) dy = 0.0;
  if (dy > 1.0) dy = 1.0;
  return {k, dy};
}

double decode_absolute(const GroupingScheme& scheme, int k, double dy) {
  if (k < 1 || k > scheme.K) fail(Errc::LabelOutOfRange, "group " + str(k) + " outside 1.." + str(scheme.K));
  return dy * scheme.width(k) + scheme.left[static_cast<size_t>(k - 1)];
}

WindowedDataset make_windows(const SeriesFrame& frame, const GroupingScheme& scheme, const Normalizer& norm,
                             int lookback, int horizon) {
  if (frame.t < lookback + horizon)
    fail(Errc::SeriesTooShort, "t=" + str(frame.t) + " < lookback+horizon=" + str(lookback + horizon));
  const SeriesFrame nf = norm.apply(frame);
  WindowedDataset w;
  w.L = lookback;
  w.T = horizon;
  w.D = frame.d;
  w.K = scheme.K;
  w.N = frame.t - lookback - horizon + 1;
  w.x.resize(static_cast<size_t>(w.N) * lookback * frame.d);
  w.y.resize(static_cast<size_t>(w.N) * horizon);
  w.dy.resize(static_cast<size_t>(w.N) * horizon);
  w.k.resize(static_cast<size_t>(w.N) * horizon);
  for (int i = 0; i < w.N; ++i) {
    std::copy(nf.values.begin() + static_cast<int64_t>(i) * frame.d,
              nf.values.begin() + static_cast<int64_t>(i + lookback) * frame.d,
              w.x.begin() + static_cast<int64_t>(i) * lookback * frame.d);
    for (int j = 0; j < horizon; ++j) {
      const double yv = frame.target(i + lookback + j);
      auto [k, dy] = encode_relative(scheme, yv);
      w.y[static_cast<size_t>(i) * horizon + j] = yv;
      w.dy[static_cast<size_t>(i) * horizon + j] = dy;
      w.k[static_cast<size_t>(i) * horizon + j] = k;
    }
  }
  return w;
}

}  // namespace ppgf
