#include "ppgf/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ppgf/rng.hpp"

namespace ppgf {

std::vector<double> gen_sine(const SineParams& p, uint64_t seed) {
  if (p.t < 1 || p.period <= 0) fail(Errc::ConfigError, "sine wants t >= 1 and period > 0");
  Rng rng(derive_seed(seed, "synth/sine"));
  std::vector<double> v(static_cast<size_t>(p.t));
  for (int i = 0; i < p.t; ++i)
    v[static_cast<size_t>(i)] =
        p.offset + p.amplitude * std::sin(2.0 * M_PI * i / p.period) + (p.noise > 0 ? p.noise * rng.normal() : 0.0);
  return v;
}

std::vector<double> gen_two_regime(const TwoRegimeParams& p, uint64_t seed) {
  if (p.t < 1 || p.burst_frac <= 0.0 || p.burst_frac >= 1.0 || p.seg_min < 1 || p.seg_max < p.seg_min)
    fail(Errc::ConfigError, "two_regime parameters out of range");
  Rng rng(derive_seed(seed, "synth/two_regime"));
  std::vector<double> v(static_cast<size_t>(p.t));
  bool burst = true;  // flipped before the first step, so the series opens quiet
  int remaining = 0;
  const double ratio = p.burst_frac / (1.0 - p.burst_frac);
  // the level relaxes toward the active regime, so onsets ramp through the
  // gap over a few steps instead of jumping (event-like, not square-wave)
  const double alpha = p.ramp <= 1.0 ? 1.0 : 1.0 - std::exp(-1.0 / p.ramp);
  double level = p.quiet_level;
  for (int i = 0; i < p.t; ++i) {
    if (remaining == 0) {
      burst = !burst;
      if (!burst) {
        remaining = p.seg_min + static_cast<int>(rng.below(static_cast<uint64_t>(p.seg_max - p.seg_min + 1)));
      } else {
        const double scale = rng.uniform(0.8, 1.2);
        remaining = std::max(3, static_cast<int>(std::lround(0.5 * (p.seg_min + p.seg_max) * ratio * scale)));
      }
    }
    --remaining;
    level += (burst ? p.burst_level - level : p.quiet_level - level) * alpha;
    if (burst) {
      v[static_cast<size_t>(i)] = level + p.burst_amp * std::sin(4.0 * M_PI * i / p.period) + 2.0 * p.noise * rng.normal();
    } else {
      v[static_cast<size_t>(i)] = level + p.quiet_amp * std::sin(2.0 * M_PI * i / p.period) + p.noise * rng.normal();
    }
  }
  return v;
}

std::vector<double> gen_long_tail(const LongTailParams& p, uint64_t seed) {
  if (p.t < 1 || p.sigma <= 0) fail(Errc::ConfigError, "long_tail wants t >= 1 and sigma > 0");
  Rng rng(derive_seed(seed, "synth/long_tail"));
  std::vector<double> v(static_cast<size_t>(p.t));
  for (int i = 0; i < p.t; ++i) v[static_cast<size_t>(i)] = std::exp(p.mu + p.sigma * rng.normal());
  return v;
}

void write_series_csv(const std::string& path, const std::vector<double>& values, const std::string& params_comment) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  out << "# " << params_comment << "\n";
  out << "y\n";
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << "\n";
  }
  if (!out) fail(Errc::IoError, "short write to " + path);
}

namespace {

double want_d(const std::vector<std::pair<std::string, std::string>>& kv, const std::string& key, double dflt) {
  for (const auto& [k, v] : kv)
    if (k == key) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size()) fail(Errc::ConfigError, "bad numeric value for " + key + ": '" + v + "'");
      return x;
    }
  return dflt;
}

void check_keys(const std::vector<std::pair<std::string, std::string>>& kv, const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == k;
    if (!ok) fail(Errc::ConfigError, "unknown synth parameter '" + k + "'");
  }
}

}  // namespace

std::vector<double> synth_to_csv(const std::string& kind, const std::vector<std::pair<std::string, std::string>>& params,
                                 uint64_t seed, const std::string& out_path) {
  std::vector<double> values;
  std::string comment;
  if (kind == "sine") {
    check_keys(params, {"t", "amplitude", "period", "offset", "noise"});
    SineParams p;
    p.t = static_cast<int>(want_d(params, "t", p.t));
    p.amplitude = want_d(params, "amplitude", p.amplitude);
    p.period = want_d(params, "period", p.period);
    p.offset = want_d(params, "offset", p.offset);
    p.noise = want_d(params, "noise", p.noise);
    values = gen_sine(p, seed);
    comment = "synth kind=sine t=" + str(p.t) + " amplitude=" + str(p.amplitude) + " period=" + str(p.period) +
              " offset=" + str(p.offset) + " noise=" + str(p.noise) + " seed=" + str(seed);
  } else if (kind == "two_regime") {
    check_keys(params, {"t", "quiet_level", "quiet_amp", "period", "burst_level", "burst_amp", "burst_frac", "noise",
                        "seg_min", "seg_max", "ramp"});
    TwoRegimeParams p;
    p.t = static_cast<int>(want_d(params, "t", p.t));
    p.quiet_level = want_d(params, "quiet_level", p.quiet_level);
    p.quiet_amp = want_d(params, "quiet_amp", p.quiet_amp);
    p.period = want_d(params, "period", p.period);
    p.burst_level = want_d(params, "burst_level", p.burst_level);
    p.burst_amp = want_d(params, "burst_amp", p.burst_amp);
    p.burst_frac = want_d(params, "burst_frac", p.burst_frac);
    p.noise = want_d(params, "noise", p.noise);
    p.seg_min = static_cast<int>(want_d(params, "seg_min", p.seg_min));
    p.seg_max = static_cast<int>(want_d(params, "seg_max", p.seg_max));
    p.ramp = want_d(params, "ramp", p.ramp);
    values = gen_two_regime(p, seed);
    comment = "synth kind=two_regime t=" + str(p.t) + " quiet_level=" + str(p.quiet_level) + " quiet_amp=" +
              str(p.quiet_amp) + " period=" + str(p.period) + " burst_level=" + str(p.burst_level) + " burst_amp=" +
              str(p.burst_amp) + " burst_frac=" + str(p.burst_frac) + " noise=" + str(p.noise) + " seg_min=" +
              str(p.seg_min) + " seg_max=" + str(p.seg_max) + " ramp=" + str(p.ramp) + " seed=" + str(seed);
  } else if (kind == "long_tail") {
    check_keys(params, {"t", "mu", "sigma"});
    LongTailParams p;
    p.t = static_cast<int>(want_d(params, "t", p.t));
    p.mu = want_d(params, "mu", p.mu);
    p.sigma = want_d(params, "sigma", p.sigma);
    values = gen_long_tail(p, seed);
    comment = "synth kind=long_tail t=" + str(p.t) + " mu=" + str(p.mu) + " sigma=" + str(p.sigma) + " seed=" + str(seed);
  } else {
    fail(Errc::UnknownKind, "unknown synth kind '" + kind + "' (expected sine, two_regime or long_tail)");
  }
  write_series_csv(out_path, values, comment);
  return values;
}

}  // namespace ppgf
