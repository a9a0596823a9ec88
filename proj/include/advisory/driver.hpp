// Instruction-adherence driver model: the ego driver executes the advised
// speed plus a Gaussian trait offset, resampled every simulation step.
#pragma once

#include <array>

#include "advisory/rng.hpp"

namespace advisory::sim {

inline constexpr std::array<double, 5> kTraitMeans = {-5.0, -2.5, 0.0, 2.5, 5.0};
inline constexpr int kTraitCount = 5;
inline constexpr double kDriverNoiseStd = 1.0;  // fixed

struct TraitMean {
  int label = 2;       // ordinal id 0..4
  double value = 0.0;  // m/s offset mean
};

TraitMean trait_from_label(int label);
// Matches one of the five canonical means; throws ConfigError otherwise.
TraitMean trait_from_value(double value);
// Uniform over the five traits; fixed for an episode by the caller.
TraitMean sample_trait(Rng& rng);

struct DriverProfile {
  TraitMean trait;

  // Deterministic core: executed speed for a given sampled offset k.
  double act_with_offset(double advised, double v_max, double k) const;

  // Samples k ~ N(trait mean, 1) and returns clamp(advised + k, 0, v_max).
  // raw_offset, when non-null, receives the pre-clamp k.
  double act(double advised, double v_max, Rng& rng, double* raw_offset = nullptr) const;
};

}  // namespace advisory::sim
