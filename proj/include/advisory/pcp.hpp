// Piecewise-constant advisory policy training: decision-step rollouts with
// the action held for delta steps, and the clipped-surrogate trainer loop.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advisory/driver.hpp"
#include "advisory/ppo.hpp"
#include "advisory/ring.hpp"

namespace advisory::rl {

struct TrainLogRow {
  int iter = 0;
  double mean_return = 0.0;
  double eval_avg_speed = 0.0;
};

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path);

// One training episode appended to the buffer: warm-up, then sampled actions
// held for delta steps. The driver is perfect when profile is null. Rewards
// are per-window means of the ego speed; a collision terminates the episode
// and zeroes its rewards. Returns true when the episode collided.
bool rollout_pcp(const CategoricalPolicy& policy, const sim::RingConfig& env_cfg,
                 const sim::IdmParams& idm, const SpeedActionSpace& space, int delta,
                 int warmup, int horizon, const sim::DriverProfile* profile,
                 DecisionBuffer& buffer, Rng& policy_rng, Rng& driver_rng,
                 std::uint64_t env_seed);

struct PcpTrainResult {
  CategoricalPolicy policy;  // best checkpoint by evaluation average speed
  double best_eval_speed = 0.0;
  int best_iter = -1;  // -1 means the initialized policy was never beaten
  std::vector<TrainLogRow> log;
};

// Training evaluates with greedy actions and the perfect driver on a fixed
// episode set each iteration, and keeps the best-scoring snapshot.
PcpTrainResult train_pcp(const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                         const SpeedActionSpace& space, const PgTrainConfig& cfg,
                         int delta, std::uint64_t master_seed);

}  // namespace advisory::rl
