#include "advisory/driver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advisory/common.hpp"

namespace advisory::sim {

TraitMean trait_from_label(int label) {
  if (label < 0 || label >= kTraitCount)
    throw ConfigError("trait label out of range: " + std::to_string(label));
  return {label, kTraitMeans[static_cast<std::size_t>(label)]};
}

TraitMean trait_from_value(double value) {
  for (int i = 0; i < kTraitCount; ++i)
    if (std::abs(kTraitMeans[static_cast<std::size_t>(i)] - value) < 1e-9)
      return {i, kTraitMeans[static_cast<std::size_t>(i)]};
  throw ConfigError("trait value not in {-5, -2.5, 0, 2.5, 5}: " +
                    std::to_string(value));
}

TraitMean sample_trait(Rng& rng) { return trait_from_label(rng.uniform_int(kTraitCount)); }

double DriverProfile::act_with_offset(double advised, double v_max, double k) const {
  return std::clamp(advised + k, 0.0, v_max);
}

double DriverProfile::act(double advised, double v_max, Rng& rng,
                          double* raw_offset) const {
  const double k = rng.normal(trait.value, kDriverNoiseStd);
  if (raw_offset != nullptr) *raw_offset = k;
  return act_with_offset(advised, v_max, k);
}

}  // namespace advisory::sim
