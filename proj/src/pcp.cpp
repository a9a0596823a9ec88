#include "advisory/pcp.hpp"

#include <cstdio>

#include "advisory/common.hpp"
#include "advisory/harness.hpp"
#include "advisory/heads.hpp"

namespace advisory::rl {

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path) {
  std::string csv = "iter,mean_return,eval_avg_speed\n";
  char buf[96];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", row.iter, row.mean_return,
                  row.eval_avg_speed);
    csv += buf;
  }
  evalh::write_text_file(path, csv);
}

bool rollout_pcp(const CategoricalPolicy& policy, const sim::RingConfig& env_cfg,
                 const sim::IdmParams& idm, const SpeedActionSpace& space, int delta,
                 int warmup, int horizon, const sim::DriverProfile* profile,
                 DecisionBuffer& buffer, Rng& policy_rng, Rng& driver_rng,
                 std::uint64_t env_seed) {
  sim::RingEnv env(env_cfg, idm);
  env.reset(env_seed);
  env.warmup(warmup);

  buffer.begin_episode();
  HoldController hold(delta);
  double window_sum = 0.0;
  int window_len = 0;
  bool collided = false;

  for (int t = 0; t < horizon; ++t) {
    if (hold.needs_decision()) {
      if (window_len > 0) {
        buffer.reward.push_back(window_sum / window_len);
        window_sum = 0.0;
        window_len = 0;
      }
      const auto obs = env.observe_ego().as_array();
      const auto logits = policy.logits(obs);
      const auto head = nn::categorical_head(logits, policy_rng);
      buffer.obs.emplace_back(obs.begin(), obs.end());
      buffer.action_index.push_back(head.sample);
      buffer.log_prob.push_back(head.log_prob);
      buffer.value.push_back(policy.value(obs));
      hold.set(space.speed(head.sample));
    }
    const double advised = hold.tick();
    const double cmd = profile != nullptr
                           ? profile->act(advised, env_cfg.v_max, driver_rng)
                           : advised;
    collided = env.step(cmd);
    window_sum += env.state().vel[sim::RingState::kEgoIndex];
    ++window_len;
    if (collided) break;
  }
  if (window_len > 0) buffer.reward.push_back(window_sum / window_len);
  if (collided) buffer.zero_last_episode_rewards();
  return collided;
}

PcpTrainResult train_pcp(const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                         const SpeedActionSpace& space, const PgTrainConfig& cfg,
                         int delta, std::uint64_t master_seed) {
  cfg.validate();
  space.validate();
  Rng root(master_seed);
  Rng init_rng = root.substream("pcp-init");
  Rng policy_rng = root.substream("pcp-sample");
  Rng driver_rng = root.substream("pcp-driver");  // unused with the perfect driver

  CategoricalPolicy policy =
      CategoricalPolicy::make(3, static_cast<std::size_t>(space.count), init_rng);
  nn::Adam pi_opt(cfg.learning_rate), v_opt(cfg.learning_rate);

  evalh::EpisodeOptions eval_opt;
  eval_opt.delta = delta;
  eval_opt.warmup = cfg.warmup;
  eval_opt.horizon = cfg.horizon;
  eval_opt.greedy = true;
  eval_opt.perfect_driver = true;
  const std::uint64_t eval_seed = root.substream("pcp-eval").seed();

  const auto eval_speed = [&](const CategoricalPolicy& p) {
    evalh::PolicyBundle bundle;
    bundle.kind = evalh::PolicyKind::kPcp;
    bundle.pcp = &p;
    bundle.space = space;
    const auto res =
        evalh::evaluate(bundle, env_cfg, idm, eval_opt, cfg.eval_episodes, eval_seed);
    return res.valid > 0 ? res.mean_avg_speed : 0.0;
  };

  PcpTrainResult result;
  result.policy = policy;
  result.best_eval_speed = eval_speed(policy);

  DecisionBuffer buffer;
  std::uint64_t episode_counter = 0;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    buffer.clear();
    for (int e = 0; e < cfg.episodes_per_iter; ++e) {
      const std::uint64_t env_seed =
          root.substream("pcp-episode", episode_counter++).seed();
      rollout_pcp(policy, env_cfg, idm, space, delta, cfg.warmup, cfg.horizon,
                  nullptr, buffer, policy_rng, driver_rng, env_seed);
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
