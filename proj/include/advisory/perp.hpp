// Personalized residual policy training (and the V-RP / TA-RP baselines):
// a bounded residual on top of a frozen advisory policy, trained against the
// trait-conditioned driver model.
#pragma once

#include <cstdint>

#include "advisory/dti.hpp"
#include "advisory/harness.hpp"
#include "advisory/pcp.hpp"

namespace advisory::rl {

struct PerpTrainResult {
  GaussianPolicy policy;
  double best_eval_speed = 0.0;
  int best_iter = -1;
  std::vector<TrainLogRow> log;
};

std::size_t residual_obs_dim(evalh::PolicyKind variant, int latent_dim);

// One training episode: warm-up, a per-episode trait, the base action
// sampled from the frozen advisory policy, the residual sampled, the advice
// held for delta steps while the driver executes it imperfectly. Rewards are
// per-window means of a_driver - |a_driver - a_pcp|; collisions zero the
// episode. Returns true when the episode collided.
bool rollout_residual(const GaussianPolicy& policy, const CategoricalPolicy& base,
                      const dti::DtiModel* dti_model, evalh::PolicyKind variant,
                      const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                      const SpeedActionSpace& space, int delta, int warmup,
                      int horizon, DecisionBuffer& buffer, Rng& policy_rng,
                      Rng& driver_rng, Rng& trait_rng, std::uint64_t env_seed);

// The base policy and trait-inference model stay frozen (const). Evaluation
// during training uses greedy actions with uniformly sampled driver traits.
PerpTrainResult train_perp(const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                           const SpeedActionSpace& space, const PgTrainConfig& cfg,
                           double residual_bound, double init_log_std,
                           evalh::PolicyKind variant, const CategoricalPolicy& base,
                           const dti::DtiModel* dti_model, int delta,
                           std::uint64_t master_seed);

}  // namespace advisory::rl
