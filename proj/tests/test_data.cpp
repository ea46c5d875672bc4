#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ppgf/data.hpp"
#include "ppgf/rng.hpp"

using namespace ppgf;

namespace {

std::string write_tmp(const std::string& name, const std::string& content) {
  std::filesystem::create_directories("tmp_data");
  const std::string path = "tmp_data/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

SeriesFrame frame_from(const std::vector<double>& target) {
  SeriesFrame f;
  f.t = static_cast<int>(target.size());
  f.d = 1;
  f.column_names = {"y"};
  f.target_col = 0;
  f.values = target;
  return f;
}

}  // namespace

TEST_CASE("load_csv parses header, timestamps and numeric columns") {
  const auto path = write_tmp("basic.csv", "ts,load,temp\n2020-01-01,1.5,20\n2020-01-02,2.5,21\n2020-01-03,3.5,22\n");
  SeriesFrame f = load_csv(path, "load");
  CHECK(f.t == 3);
  CHECK(f.d == 2);
  CHECK(f.target_col == 0);
  CHECK(f.timestamps.size() == 3);
  CHECK(f.at(1, 0) == doctest::Approx(2.5));
  CHECK(f.at(2, 1) == doctest::Approx(22));
}

TEST_CASE("load_csv rejects NaN cells with the row index") {
  const auto path = write_tmp("nan.csv", "y\n1\nNaN\n3\n");
  try {
    load_csv(path, "y");
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFiniteValue);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("load_csv single numeric column") {
  const auto path = write_tmp("uni.csv", "y\n1\n2\n3\n");
  SeriesFrame f = load_csv(path, "y");
  CHECK(f.d == 1);
  CHECK(f.t == 3);
  CHECK(f.timestamps.empty());
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_AS(load_csv("does_not_exist.csv", "y"), Error);
  const auto empty = write_tmp("empty.csv", "");
  try {
    load_csv(empty, "y");
    FAIL("expected EmptyFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyFile);
  }
  const auto headeronly = write_tmp("headeronly.csv", "y\n");
  try {
    load_csv(headeronly, "y");
    FAIL("expected EmptyFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyFile);
  }
  const auto bad = write_tmp("badcell.csv", "y\n1\nabc\n");
  try {
    load_csv(bad, "y");
    FAIL("expected NonNumericCell");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonNumericCell);
  }
  const auto ok = write_tmp("okcols.csv", "a,b\n1,2\n");
  try {
    load_csv(ok, "zzz");
    FAIL("expected UnknownColumn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownColumn);
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }
}

TEST_CASE("load_csv skips leading comment lines") {
  const auto path = write_tmp("comments.csv", "# synth kind=sine seed=1\ny\n1\n2\n");
  SeriesFrame f = load_csv(path, "y");
  CHECK(f.t == 2);
}

TEST_CASE("chronological split sizes follow the floor rule") {
  SplitSpec spec;
  {
    Splits s = split_chronological(frame_from({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), spec);
    CHECK(s.train.t == 6);
    CHECK(s.valid.t == 2);
    CHECK(s.test.t == 2);
  }
  {
    // floor(7*0.6)=4, floor(7*0.8)=5
    Splits s = split_chronological(frame_from({0, 1, 2, 3, 4, 5, 6}), spec);
    CHECK(s.train.t == 4);
    CHECK(s.valid.t == 1);
    CHECK(s.test.t == 2);
  }
  try {
    split_chronological(frame_from({0, 1}), spec);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySplit);
  }
  SplitSpec bad;
  bad.test_frac = 0.3;  // sums to 1.1
  CHECK_THROWS_AS(split_chronological(frame_from({0, 1, 2, 3, 4}), bad), Error);
}

TEST_CASE("split concatenation reproduces the frame exactly") {
  Rng rng(99);
  std::vector<double> vals(137);
  for (auto& v : vals) v = rng.uniform(-5, 5);
  SeriesFrame f = frame_from(vals);
  Splits s = split_chronological(f, SplitSpec{});
  std::vector<double> cat;
  cat.insert(cat.end(), s.train.values.begin(), s.train.values.end());
  cat.insert(cat.end(), s.valid.values.begin(), s.valid.values.end());
  cat.insert(cat.end(), s.test.values.begin(), s.test.values.end());
  CHECK(cat == f.values);  // bit-exact
}

TEST_CASE("normalizer two-point example and error path") {
  SeriesFrame f = frame_from({0, 2});
  Normalizer n = fit_normalizer(f);
  CHECK(n.mean[0] == doctest::Approx(1));
  CHECK(n.stddev[0] == doctest::Approx(1));
  SeriesFrame z = n.apply(f);
  CHECK(z.at(0, 0) == doctest::Approx(-1));
  CHECK(z.at(1, 0) == doctest::Approx(1));
  SeriesFrame test = frame_from({3});
  CHECK(n.apply(test).at(0, 0) == doctest::Approx(2));
  try {
    fit_normalizer(frame_from({5, 5, 5}));
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVariance);
  }
}

TEST_CASE("normalizer apply/invert identity and unit train moments") {
  Rng rng(7);
  SeriesFrame f;
  f.t = 64;
  f.d = 3;
  f.column_names = {"a", "b", "c"};
  f.target_col = 1;
  f.values.resize(static_cast<size_t>(f.t) * f.d);
  for (auto& v : f.values) v = rng.uniform(-10, 10);
  Normalizer n = fit_normalizer(f);
  SeriesFrame z = n.apply(f);
  for (int c = 0; c < 3; ++c) {
    double mu = 0;
    for (int r = 0; r < f.t; ++r) mu += z.at(r, c);
    mu /= f.t;
    double var = 0;
    for (int r = 0; r < f.t; ++r) var += (z.at(r, c) - mu) * (z.at(r, c) - mu);
    var /= f.t;
    CHECK(std::abs(mu) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1) < 1e-9);
  }
  SeriesFrame back = n.invert(z);
  for (size_t i = 0; i < f.values.size(); ++i) CHECK(std::abs(back.values[i] - f.values[i]) < 1e-9);
}

TEST_CASE("quantile grouping boundaries for 1..10, K=2") {
  GroupingScheme s = fit_grouping({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 2);
  CHECK(s.left[0] == 1);
  CHECK(s.right[0] == 5);  // sorted[(9*1)/2] = sorted[4] = 5
  CHECK(s.left[1] == 5);
  CHECK(s.right[1] == 10);
  try {
    fit_grouping({1, 2, 3}, 1);
    FAIL("expected KTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KTooSmall);
  }
  CHECK_THROWS_AS(fit_grouping({1.0}, 2), Error);
}

TEST_CASE("bin balance on 10k distinct uniform values") {
  Rng rng(1234);
  std::vector<double> vals(10000);
  for (size_t i = 0; i < vals.size(); ++i) vals[i] = rng.uniform() + 1e-9 * static_cast<double>(i);
  for (int K : {2, 3, 4, 8}) {
    GroupingScheme s = fit_grouping(vals, K);
    std::vector<int> counts(static_cast<size_t>(K), 0);
    for (double v : vals) ++counts[static_cast<size_t>(assign_group(s, v) - 1)];
    const double want = 10000.0 / K;
    for (int c : counts) CHECK(std::abs(c - want) <= 1.0 + 1e-12);
  }
}

TEST_CASE("bin balance property on random sizes") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 200 + static_cast<int>(rng.below(2000));
    std::vector<double> vals(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) vals[static_cast<size_t>(i)] = rng.uniform() * 100;
    for (int K : {2, 3, 4, 8}) {
      GroupingScheme s = fit_grouping(vals, K);
      std::vector<int> counts(static_cast<size_t>(K), 0);
      for (double v : vals) ++counts[static_cast<size_t>(assign_group(s, v) - 1)];
      for (int c : counts) {
        CHECK(c >= n / K - 1);
        CHECK(c <= (n + K - 1) / K + 1);
      }
    }
  }
}

TEST_CASE("grouping intervals are contiguous and cover the training range") {
  Rng rng(5);
  std::vector<double> vals(500);
  for (auto& v : vals) v = rng.normal() * 10;
  for (int K : {2, 3, 4, 8}) {
    GroupingScheme s = fit_grouping(vals, K);
    CHECK(s.lo() == *std::min_element(vals.begin(), vals.end()));
    CHECK(s.hi() == *std::max_element(vals.begin(), vals.end()));
    for (int k = 1; k < K; ++k) CHECK(s.right[static_cast<size_t>(k - 1)] == s.left[static_cast<size_t>(k)]);
    for (int k = 1; k <= K; ++k) CHECK(s.left[static_cast<size_t>(k - 1)] <= s.right[static_cast<size_t>(k - 1)]);
  }
}

TEST_CASE("leakage tripwire: refitting on train+test moves boundaries") {
  Rng rng(11);
  std::vector<double> train(300), test(100);
  for (auto& v : train) v = rng.uniform(0, 1);
  for (auto& v : test) v = rng.uniform(0.5, 1.5);
  GroupingScheme a = fit_grouping(train, 4);
  std::vector<double> both = train;
  both.insert(both.end(), test.begin(), test.end());
  GroupingScheme b = fit_grouping(both, 4);
  bool changed = false;
  for (int k = 0; k < 4; ++k)
    changed = changed || a.left[static_cast<size_t>(k)] != b.left[static_cast<size_t>(k)] ||
              a.right[static_cast<size_t>(k)] != b.right[static_cast<size_t>(k)];
  CHECK(changed);
}

TEST_CASE("assign_group boundary and clamp rules") {
  GroupingScheme s = fit_grouping({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 2);  // (1,5),(5,10)
  CHECK(assign_group(s, 5) == 2);    // shared boundary goes right
  CHECK(assign_group(s, 0.5) == 1);  // below range
  CHECK(assign_group(s, 10) == 2);   // upper endpoint closed
  CHECK(assign_group(s, 42) == 2);   // above range
  CHECK(assign_group(s, 1) == 1);
  CHECK(assign_group(s, 4.999) == 1);
}

TEST_CASE("encode_relative examples") {
  GroupingScheme s;
  s.K = 2;
  s.left = {0, 10};
  s.right = {10, 20};
  {
    auto [k, dy] = encode_relative(s, 15);
    CHECK(k == 2);
    CHECK(dy == doctest::Approx(0.5));
  }
  {
    auto [k, dy] = encode_relative(s, 0);
    CHECK(k == 1);
    CHECK(dy == 0.0);
  }
  {
    auto [k, dy] = encode_relative(s, 25);
    CHECK(k == 2);
    CHECK(dy == 1.0);
  }
}

TEST_CASE("encode_relative fails loudly on a zero-width assigned group") {
  // all values identical: every interval degenerates
  GroupingScheme s = fit_grouping({3, 3, 3, 3}, 2);
  try {
    encode_relative(s, 3);
    FAIL("expected ZeroWidthInterval");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroWidthInterval);
  }
}

TEST_CASE("decode_absolute examples and extrapolation") {
  GroupingScheme s;
  s.K = 2;
  s.left = {0, 10};
  s.right = {10, 20};
  CHECK(decode_absolute(s, 2, 0.5) == doctest::Approx(15));
  CHECK(decode_absolute(s, 1, 0.0) == doctest::Approx(0));
  CHECK(decode_absolute(s, 2, 1.2) == doctest::Approx(22));  // 10 + 1.2*10
  CHECK_THROWS_AS(decode_absolute(s, 3, 0.5), Error);
  CHECK_THROWS_AS(decode_absolute(s, 0, 0.5), Error);
}

TEST_CASE("round-trip identity over the training range") {
  Rng rng(21);
  std::vector<double> vals(3000);
  for (auto& v : vals) v = rng.normal() * 7 + 3;
  const double lo = *std::min_element(vals.begin(), vals.end());
  const double hi = *std::max_element(vals.begin(), vals.end());
  for (int K : {2, 3, 4, 8}) {
    GroupingScheme s = fit_grouping(vals, K);
    for (int i = 0; i < 2000; ++i) {
      const double y = rng.uniform(lo, hi);
      auto [k, dy] = encode_relative(s, y);
      CHECK(std::abs(decode_absolute(s, k, dy) - y) <= 1e-9);
    }
  }
}

TEST_CASE("make_windows counts and encoding") {
  SeriesFrame f = frame_from({10, 20, 30, 40, 50});
  Normalizer n = fit_normalizer(f);
  GroupingScheme s = fit_grouping(f.target_column(), 2);
  WindowedDataset w = make_windows(f, s, n, 2, 1);
  CHECK(w.N == 3);  // t - L - T + 1; enumeration: [0,1]->2, [1,2]->3, [2,3]->4
  // enumerate: sample i has window rows [i, i+1], target rows [i+2]
  for (int i = 0; i < w.N; ++i) {
    CHECK(w.y[static_cast<size_t>(i)] == f.target(i + 2));
    const double got = decode_absolute(s, w.k[static_cast<size_t>(i)], w.dy[static_cast<size_t>(i)]);
    CHECK(std::abs(got - w.y[static_cast<size_t>(i)]) <= 1e-9);
    // x holds normalized values of the window
    SeriesFrame z = n.apply(f);
    CHECK(w.x[static_cast<size_t>(i) * 2] == z.at(i, 0));
    CHECK(w.x[static_cast<size_t>(i) * 2 + 1] == z.at(i + 1, 0));
  }
  try {
    make_windows(frame_from({1, 2, 3}), s, n, 2, 2);
    FAIL("expected SeriesTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SeriesTooShort);
  }
}

TEST_CASE("make_windows single-sample boundary") {
  std::vector<double> vals(33);
  for (size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(i % 7) + 0.5 * static_cast<double>(i);
  SeriesFrame f = frame_from(vals);
  Normalizer n = fit_normalizer(f);
  GroupingScheme s = fit_grouping(f.target_column(), 2);
  WindowedDataset w = make_windows(f, s, n, 32, 1);
  CHECK(w.N == 1);
}

TEST_CASE("equal-width grouping skews counts on long-tailed data") {
  Rng rng(31);
  std::vector<double> vals(10000);
  for (auto& v : vals) v = std::exp(rng.normal());
  GroupingScheme q = fit_grouping(vals, 8);
  GroupingScheme e = fit_grouping_equal_width(vals, 8);
  auto ratio = [&](const GroupingScheme& s) {
    std::vector<int> counts(8, 0);
    for (double v : vals) ++counts[static_cast<size_t>(assign_group(s, v) - 1)];
    const int mx = *std::max_element(counts.begin(), counts.end());
    const int mn = *std::min_element(counts.begin(), counts.end());
    return mn == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(mx) / mn;
  };
  CHECK(ratio(q) <= 1.01);
  CHECK(ratio(e) > 10.0);
}
