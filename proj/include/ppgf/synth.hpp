#pragma once

#include <string>
#include <vector>

#include "ppgf/common.hpp"

namespace ppgf {

// Seeded synthetic series. These are product features, not test fixtures:
// they stand in for external datasets at desk scale, and each generator
// writes its parameters as '#' comments above the CSV header.

struct SineParams {
  int t = 2000;
  double amplitude = 1.0;
  double period = 50.0;
  double offset = 0.0;
  double noise = 0.0;
};

struct TwoRegimeParams {
  int t = 2000;
  double quiet_level = 1.0;
  double quiet_amp = 0.3;
  double period = 24.0;
  double burst_level = 9.0;
  double burst_amp = 0.8;
  double burst_frac = 0.3;  // target fraction of steps spent in the burst regime
  double noise = 0.5;
  int seg_min = 80, seg_max = 140;  // quiet segment length range
  double ramp = 6.0;  // relaxation time of the level toward the active regime
};

struct LongTailParams {
  int t = 2000;
  double mu = 0.0;
  double sigma = 1.0;
};

std::vector<double> gen_sine(const SineParams& p, uint64_t seed);
std::vector<double> gen_two_regime(const TwoRegimeParams& p, uint64_t seed);
std::vector<double> gen_long_tail(const LongTailParams& p, uint64_t seed);

// Midpoint between the regime levels; used to count burst-side points.
inline double two_regime_threshold(const TwoRegimeParams& p) { return 0.5 * (p.quiet_level + p.burst_level); }

// Single numeric column "y", '#' parameter comments, %.17g values.
void write_series_csv(const std::string& path, const std::vector<double>& values, const std::string& params_comment);

// kind in {sine, two_regime, long_tail}; applies key=value overrides from
// params and writes the CSV. Returns the generated values.
std::vector<double> synth_to_csv(const std::string& kind, const std::vector<std::pair<std::string, std::string>>& params,
                                 uint64_t seed, const std::string& out_path);

}  // namespace ppgf
