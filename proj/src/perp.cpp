#include "advisory/perp.hpp"

#include "advisory/common.hpp"
#include "advisory/heads.hpp"

namespace advisory::rl {

std::size_t residual_obs_dim(evalh::PolicyKind variant, int latent_dim) {
  switch (variant) {
    case evalh::PolicyKind::kVrp: return 4;
    case evalh::PolicyKind::kTarp: return 4 + sim::kTraitCount;
    case evalh::PolicyKind::kPerp: return 4 + static_cast<std::size_t>(latent_dim);
    default:
      throw ConfigError("residual_obs_dim: not a residual policy kind");
  }
}

bool rollout_residual(const GaussianPolicy& policy, const CategoricalPolicy& base,
                      const dti::DtiModel* dti_model, evalh::PolicyKind variant,
                      const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                      const SpeedActionSpace& space, int delta, int warmup,
                      int horizon, DecisionBuffer& buffer, Rng& policy_rng,
                      Rng& driver_rng, Rng& trait_rng, std::uint64_t env_seed) {
  if (variant == evalh::PolicyKind::kPerp && dti_model == nullptr)
    throw MissingArtifactError("residual rollout: trait-inference model required");

  sim::RingEnv env(env_cfg, idm);
  env.reset(env_seed);
  env.warmup(warmup);

  sim::DriverProfile driver;
  driver.trait = sim::sample_trait(trait_rng);

  buffer.begin_episode();
  HoldController hold(delta);
  double window_sum = 0.0;
  int window_len = 0;
  double a_pcp = 0.0;
  bool collided = false;

  for (int t = 0; t < horizon; ++t) {
    if (hold.needs_decision()) {
      if (window_len > 0) {
        buffer.reward.push_back(window_sum / window_len);
        window_sum = 0.0;
        window_len = 0;
      }
      const auto obs = env.observe_ego();
      const auto base_head = nn::categorical_head(base.logits(obs.as_array()), policy_rng);
      a_pcp = space.speed(base_head.sample);

      std::vector<double> z;
      if (variant == evalh::PolicyKind::kPerp)
        z = dti_model->infer(env.recent_observations(dti_model->window));
      const auto in = evalh::residual_input(variant, obs, a_pcp / space.max_speed,
                                            driver.trait.label, z);

      const auto mean = policy.mean(in);
      const auto head = nn::gaussian_head(mean, policy.log_std.values, policy_rng);
      const double log_prob =
          head.log_prob - nn::tanh_squash_log_det(head.sample, policy.bound);
      const double residual = policy.squash(head.sample[0]);

      buffer.obs.push_back(in);
      buffer.action_u.push_back(head.sample);
      buffer.log_prob.push_back(log_prob);
      buffer.value.push_back(policy.value(in));
      hold.set(compose_advice(a_pcp, residual, space.max_speed));
    }
    const double advised = hold.tick();
    const double cmd = driver.act(advised, env_cfg.v_max, driver_rng);
    collided = env.step(cmd);
    window_sum += reward_perp(env.state().vel[sim::RingState::kEgoIndex], a_pcp);
    ++window_len;
    if (collided) break;
  }
  if (window_len > 0) buffer.reward.push_back(window_sum / window_len);
  if (collided) buffer.zero_last_episode_rewards();
  return collided;
}

PerpTrainResult train_perp(const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                           const SpeedActionSpace& space, const PgTrainConfig& cfg,
                           double residual_bound, double init_log_std,
                           evalh::PolicyKind variant, const CategoricalPolicy& base,
                           const dti::DtiModel* dti_model, int delta,
                           std::uint64_t master_seed) {
  cfg.validate();
  space.validate();
  if (residual_bound <= 0.0) throw ConfigError("residual bound must be positive");

  Rng root(master_seed);
  Rng init_rng = root.substream("perp-init");
  Rng policy_rng = root.substream("perp-sample");
  Rng driver_rng = root.substream("perp-driver");
  Rng trait_rng = root.substream("perp-trait");

  const int latent = dti_model != nullptr ? dti_model->latent_dim() : 2;
  GaussianPolicy policy = GaussianPolicy::make(residual_obs_dim(variant, latent), 1,
                                               residual_bound, init_rng, init_log_std);
  nn::Adam pi_opt(cfg.learning_rate), v_opt(cfg.learning_rate);

  evalh::EpisodeOptions eval_opt;
  eval_opt.delta = delta;
  eval_opt.warmup = cfg.warmup;
  eval_opt.horizon = cfg.horizon;
  eval_opt.greedy = true;
  eval_opt.perfect_driver = false;  // trait-conditioned drivers, as deployed
  const std::uint64_t eval_seed = root.substream("perp-eval").seed();

  const auto eval_speed = [&](const GaussianPolicy& p) {
    evalh::PolicyBundle bundle;
    bundle.kind = variant;
    bundle.pcp = &base;
    bundle.residual = &p;
    bundle.dti = dti_model;
    bundle.space = space;
    if (dti_model != nullptr) bundle.dti_window = dti_model->window;
    const auto res =
        evalh::evaluate(bundle, env_cfg, idm, eval_opt, cfg.eval_episodes, eval_seed);
    return res.valid > 0 ? res.mean_avg_speed : 0.0;
  };

  PerpTrainResult result;
  result.policy = policy;
  result.best_eval_speed = eval_speed(policy);

  DecisionBuffer buffer;
  std::uint64_t episode_counter = 0;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    buffer.clear();
    for (int e = 0; e < cfg.episodes_per_iter; ++e) {
      const std::uint64_t env_seed =
          root.substream("perp-episode", episode_counter++).seed();
      rollout_residual(policy, base, dti_model, variant, env_cfg, idm, space, delta,
                       cfg.warmup, cfg.horizon, buffer, policy_rng, driver_rng,
                       trait_rng, env_seed);
    }
    ppo_update(policy, buffer, cfg, pi_opt, v_opt);

    TrainLogRow row;
    row.iter = iter;
    row.mean_return = buffer.mean_episode_return();
    row.eval_avg_speed = eval_speed(policy);
    result.log.push_back(row);
    if (row.eval_avg_speed > result.best_eval_speed) {
      result.best_eval_speed = row.eval_avg_speed;
      result.best_iter = iter;
      result.policy = policy;
    }
  }
  return result;
}

}  // namespace advisory::rl
