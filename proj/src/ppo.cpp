#include "advisory/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "advisory/common.hpp"

namespace advisory::rl {

void PgTrainConfig::validate() const {
  if (iterations < 0) throw ConfigError("trainer: negative iterations");
  if (warmup < 0 || horizon <= 0) throw ConfigError("trainer: bad warmup/horizon");
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("trainer: gamma must be in [0, 1)");
  if (learning_rate <= 0.0) throw ConfigError("trainer: learning rate must be positive");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("trainer: bad gae_lambda");
  if (clip_ratio <= 0.0) throw ConfigError("trainer: clip_ratio must be positive");
  if (epochs_per_batch < 1 || episodes_per_iter < 1)
    throw ConfigError("trainer: epochs/episodes must be >= 1");
  if (entropy_coef < 0.0) throw ConfigError("trainer: negative entropy_coef");
  if (eval_episodes < 1 || eval_every < 1)
    throw ConfigError("trainer: eval_episodes/eval_every must be >= 1");
}

void DecisionBuffer::clear() {
  obs.clear();
  action_index.clear();
  action_u.clear();
  log_prob.clear();
  reward.clear();
  value.clear();
  episode_start.clear();
}

std::vector<std::pair<std::size_t, std::size_t>> DecisionBuffer::episodes() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < episode_start.size(); ++k) {
    const std::size_t begin = episode_start[k];
    const std::size_t end =
        (k + 1 < episode_start.size()) ? episode_start[k + 1] : reward.size();
    if (end > begin) out.emplace_back(begin, end);
  }
  return out;
}

void DecisionBuffer::zero_last_episode_rewards() {
  if (episode_start.empty()) return;
  for (std::size_t i = episode_start.back(); i < reward.size(); ++i) reward[i] = 0.0;
}

double DecisionBuffer::mean_episode_return() const {
  const auto eps = episodes();
  if (eps.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [begin, end] : eps) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += reward[i];
    total += sum;
  }
  return total / static_cast<double>(eps.size());
}

GaeResult compute_gae(const DecisionBuffer& buf, double gamma, double lambda) {
  GaeResult r;
  r.advantage.assign(buf.size(), 0.0);
  r.ret.assign(buf.size(), 0.0);
  for (const auto& [begin, end] : buf.episodes()) {
    double adv = 0.0;
    for (std::size_t i = end; i-- > begin;) {
      const double v_next = (i + 1 < end) ? buf.value[i + 1] : 0.0;
      const double delta = buf.reward[i] + gamma * v_next - buf.value[i];
      adv = delta + gamma * lambda * adv;
      r.advantage[i] = adv;
      r.ret[i] = adv + buf.value[i];
    }
  }
  return r;
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> ret(rewards.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    ret[i] = acc;
  }
  return ret;
}

namespace {

// Batch-normalized advantages (zero mean, unit std).
std::vector<double> normalized_advantages(const GaeResult& gae) {
  std::vector<double> adv = gae.advantage;
  if (adv.empty()) return adv;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : adv) a = (a - mean) * inv;
  return adv;
}

// Returns the gradient coefficient of the clipped surrogate w.r.t. the new
// log-prob (loss side, i.e. already negated), or 0 when the clip is active.
double surrogate_dlogp(double ratio, double adv, double clip) {
  const double unclipped = ratio * adv;
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
  if (unclipped <= clipped) return -adv * ratio;
  return 0.0;
}

double value_update(nn::Mlp& vnet, const DecisionBuffer& buf,
                    const std::vector<double>& ret, nn::Adam& opt) {
  const double n = static_cast<double>(buf.size());
  auto params = vnet.params("value");
  nn::zero_grads(params);
  double loss = 0.0;
  nn::MlpCache cache;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double v = vnet.forward(buf.obs[i], &cache)[0];
    const double err = v - ret[i];
    loss += 0.5 * err * err / n;
    const double dv[1] = {err / n};
    vnet.backward(cache, dv);
  }
  opt.step(params);
  return loss;
}

}  // namespace

UpdateStats ppo_update(CategoricalPolicy& policy, const DecisionBuffer& buf,
                       const PgTrainConfig& cfg, nn::Adam& pi_opt, nn::Adam& v_opt) {
  UpdateStats stats;
  if (buf.size() == 0) return stats;
  const GaeResult gae = compute_gae(buf, cfg.gamma, cfg.gae_lambda);
  const std::vector<double> adv = normalized_advantages(gae);
  const double n = static_cast<double>(buf.size());

  auto pi_params = policy.pi_params();
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    nn::zero_grads(pi_params);
    double ploss = 0.0, ent_sum = 0.0;
    nn::MlpCache cache;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const auto logits = policy.logits(buf.obs[i], &cache);
      const auto probs = nn::softmax(logits);
      const int a = buf.action_index[i];
      const double logp = std::log(std::max(probs[a], 1e-300));
      const double ratio = std::exp(logp - buf.log_prob[i]);
      const double entropy = nn::categorical_entropy(probs);
      const double unclipped = ratio * adv[i];
      const double clipped =
          std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio) * adv[i];
      ploss += -std::min(unclipped, clipped) / n;
      ent_sum += entropy / n;

      std::vector<double> dlogits(logits.size(), 0.0);
      const double dlogp = surrogate_dlogp(ratio, adv[i], cfg.clip_ratio) / n;
      if (dlogp != 0.0) nn::categorical_logp_grad(probs, a, dlogp, dlogits);
      if (cfg.entropy_coef > 0.0)
        nn::categorical_entropy_grad(probs, entropy, -cfg.entropy_coef / n, dlogits);
      policy.pi.backward(cache, dlogits);
    }
    pi_opt.step(pi_params);
    if (epoch == 0) {
      stats.policy_loss = ploss - cfg.entropy_coef * ent_sum;
      stats.entropy = ent_sum;
    }
  }

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    const double vloss = value_update(policy.v, buf, gae.ret, v_opt);
    if (epoch == 0) stats.value_loss = vloss;
  }
  return stats;
}

UpdateStats ppo_update(GaussianPolicy& policy, const DecisionBuffer& buf,
                       const PgTrainConfig& cfg, nn::Adam& pi_opt, nn::Adam& v_opt) {
  UpdateStats stats;
  if (buf.size() == 0) return stats;
  const GaeResult gae = compute_gae(buf, cfg.gamma, cfg.gae_lambda);
  const std::vector<double> adv = normalized_advantages(gae);
  const double n = static_cast<double>(buf.size());
  const std::size_t act_dim = policy.log_std.size();

  auto pi_params = policy.pi_params();
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    nn::zero_grads(pi_params);
    policy.log_std.ensure_grad();
    double ploss = 0.0, ent_sum = 0.0;
    nn::MlpCache cache;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const auto mean = policy.mean(buf.obs[i], &cache);
      const auto& u = buf.action_u[i];
      // The tanh-squash correction depends only on the stored u, so it
      // cancels in the ratio; the stored log_prob includes it on both sides.
      const double logp = nn::gaussian_log_prob(u, mean, policy.log_std.values) -
                          nn::tanh_squash_log_det(u, policy.bound);
      const double ratio = std::exp(logp - buf.log_prob[i]);
      const double entropy = nn::gaussian_entropy(policy.log_std.values);
      const double unclipped = ratio * adv[i];
      const double clipped =
          std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio) * adv[i];
      ploss += -std::min(unclipped, clipped) / n;
      ent_sum += entropy / n;

      const double dlogp = surrogate_dlogp(ratio, adv[i], cfg.clip_ratio) / n;
      std::vector<double> dmean(act_dim, 0.0);
      if (dlogp != 0.0)
        nn::gaussian_logp_grad(u, mean, policy.log_std.values, dlogp, dmean,
                               policy.log_std.grad);
      // d entropy / d log_std = 1 per dim
      if (cfg.entropy_coef > 0.0)
        for (std::size_t d = 0; d < act_dim; ++d)
          policy.log_std.grad[d] += -cfg.entropy_coef / n;
      policy.pi.backward(cache, dmean);
    }
    pi_opt.step(pi_params);
    if (epoch == 0) {
      stats.policy_loss = ploss - cfg.entropy_coef * ent_sum;
      stats.entropy = ent_sum;
    }
  }

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    const double vloss = value_update(policy.v, buf, gae.ret, v_opt);
    if (epoch == 0) stats.value_loss = vloss;
  }
  return stats;
}

}  // namespace advisory::rl
