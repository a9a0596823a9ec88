// Clipped-surrogate policy-gradient trainer pieces shared by the advisory
// and residual policies: decision-step buffers, GAE, and the update loops.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advisory/adam.hpp"
#include "advisory/policy.hpp"

namespace advisory::rl {

struct PgTrainConfig {
  int iterations = 1000;
  int warmup = 1000;
  int horizon = 2000;
  double gamma = 0.99;
  double learning_rate = 1e-4;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs_per_batch = 10;
  int episodes_per_iter = 4;
  double entropy_coef = 0.01;
  int eval_episodes = 2;
  int eval_every = 1;

  void validate() const;
};

// One row per decision step (not per env step).
struct DecisionBuffer {
  std::vector<std::vector<double>> obs;
  std::vector<int> action_index;               // categorical policies
  std::vector<std::vector<double>> action_u;   // gaussian pre-squash samples
  std::vector<double> log_prob;
  std::vector<double> reward;  // mean per-step reward over the hold window
  std::vector<double> value;
  std::vector<std::size_t> episode_start;

  void clear();
  std::size_t size() const { return reward.size(); }
  void begin_episode() { episode_start.push_back(reward.size()); }
  // Episode boundaries as [start, end) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> episodes() const;
  // Zeroes the rewards of the episode containing the last row.
  void zero_last_episode_rewards();
  // Undiscounted per-episode reward sums, averaged.
  double mean_episode_return() const;
};

// Episodes are treated as terminal at their last decision (no bootstrap),
// matching a plain discounted sum over decision steps.
struct GaeResult {
  std::vector<double> advantage;
  std::vector<double> ret;
};
GaeResult compute_gae(const DecisionBuffer& buf, double gamma, double lambda);

// Brute-force discounted return per step; the oracle for GAE bookkeeping.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

UpdateStats ppo_update(CategoricalPolicy& policy, const DecisionBuffer& buf,
                       const PgTrainConfig& cfg, nn::Adam& pi_opt, nn::Adam& v_opt);

UpdateStats ppo_update(GaussianPolicy& policy, const DecisionBuffer& buf,
                       const PgTrainConfig& cfg, nn::Adam& pi_opt, nn::Adam& v_opt);

}  // namespace advisory::rl
