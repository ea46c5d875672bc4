#pragma once

// Test-only brute-force oracles, written independently of the library code
// they check: plain loops, no shared helpers.

#include <cmath>
#include <vector>

namespace oracle {

inline double rmse(const std::vector<double>& t, const std::vector<double>& p) {
  double s = 0;
  for (size_t i = 0; i < t.size(); ++i) s += (t[i] - p[i]) * (t[i] - p[i]);
  return std::sqrt(s / static_cast<double>(t.size()));
}

inline double mae(const std::vector<double>& t, const std::vector<double>& p) {
  double s = 0;
  for (size_t i = 0; i < t.size(); ++i) s += t[i] > p[i] ? t[i] - p[i] : p[i] - t[i];
  return s / static_cast<double>(t.size());
}

inline double corr(const std::vector<double>& t, const std::vector<double>& p) {
  const double n = static_cast<double>(t.size());
  double mt = 0, mp = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mp += p[i];
  }
  mt /= n;
  mp /= n;
  double num = 0, dt = 0, dp = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (p[i] - mp);
    dt += (t[i] - mt) * (t[i] - mt);
    dp += (p[i] - mp) * (p[i] - mp);
  }
  return num / (std::sqrt(dt) * std::sqrt(dp));
}

struct Macro {
  double precision = 0, recall = 0, f1 = 0;
};

// confusion-matrix walk; labels 1..K, 0/0 counts as 0
inline Macro macro(const std::vector<int>& kt, const std::vector<int>& kp, int K) {
  Macro m;
  for (int c = 1; c <= K; ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < kt.size(); ++i) {
      if (kp[i] == c && kt[i] == c) ++tp;
      if (kp[i] == c && kt[i] != c) ++fp;
      if (kp[i] != c && kt[i] == c) ++fn;
    }
    const double pr = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double rc = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double f1 = (pr + rc) == 0.0 ? 0.0 : 2.0 * pr * rc / (pr + rc);
    m.precision += pr;
    m.recall += rc;
    m.f1 += f1;
  }
  m.precision /= K;
  m.recall /= K;
  m.f1 /= K;
  return m;
}

// direct evaluation of the normalized lag autocovariance with 1/t weights
inline double autocov(const std::vector<double>& a, int lag) {
  const int t = static_cast<int>(a.size());
  double mu = 0;
  for (double v : a) mu += v;
  mu /= t;
  double var = 0;
  for (double v : a) var += (v - mu) * (v - mu);
  var /= t;
  double s = 0;
  for (int i = 0; i + lag < t; ++i) s += (a[static_cast<size_t>(i)] - mu) * (a[static_cast<size_t>(i + lag)] - mu);
  return (s / t) / var;
}

}  // namespace oracle
