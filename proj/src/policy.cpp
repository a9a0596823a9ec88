#include "advisory/policy.hpp"

#include <algorithm>
#include <cmath>

#include "advisory/common.hpp"

namespace advisory::rl {

void SpeedActionSpace::validate() const {
  if (count < 2) throw ConfigError("action space: need at least 2 speeds");
  if (max_speed <= 0) throw ConfigError("action space: max_speed must be positive");
}

double SpeedActionSpace::speed(int index) const {
  if (index < 0 || index >= count)
    throw ConfigError("action index out of range: " + std::to_string(index));
  return max_speed * index / (count - 1);
}

int SpeedActionSpace::nearest_index(double speed) const {
  const double x = speed / spacing();
  int idx = static_cast<int>(std::lround(x));
  return std::clamp(idx, 0, count - 1);
}

double compose_advice(double a_pcp, double residual, double a_max) {
  return std::clamp(a_pcp + residual, 0.0, a_max);
}

double reward_perp(double a_driver, double a_pcp) {
  return a_driver - std::abs(a_driver - a_pcp);
}

HoldController::HoldController(int hold_length) : hold_(hold_length) {
  if (hold_length < 1) throw ConfigError("hold length must be >= 1");
}

void HoldController::set(double action) {
  held_ = action;
  remaining_ = hold_;
}

double HoldController::tick() {
  if (remaining_ <= 0) throw ConfigError("hold controller ticked without a decision");
  --remaining_;
  return held_;
}

namespace {
constexpr std::size_t kHidden = 64;
}

CategoricalPolicy CategoricalPolicy::make(std::size_t obs_dim, std::size_t n_actions,
                                          Rng& rng) {
  CategoricalPolicy p;
  p.pi = nn::Mlp({obs_dim, kHidden, kHidden, n_actions}, nn::Activation::kTanh,
                 nn::Activation::kIdentity);
  p.v = nn::Mlp({obs_dim, kHidden, kHidden, 1}, nn::Activation::kTanh,
                nn::Activation::kIdentity);
  Rng pi_rng = rng.substream("pi-init");
  Rng v_rng = rng.substream("v-init");
  p.pi.init(pi_rng);
  p.v.init(v_rng);
  return p;
}

std::vector<double> CategoricalPolicy::logits(std::span<const double> obs,
                                              nn::MlpCache* cache) const {
  return pi.forward(obs, cache);
}

double CategoricalPolicy::value(std::span<const double> obs, nn::MlpCache* cache) const {
  return v.forward(obs, cache)[0];
}

GaussianPolicy GaussianPolicy::make(std::size_t obs_dim, std::size_t act_dim,
                                    double bound, Rng& rng, double init_log_std) {
  GaussianPolicy p;
  p.pi = nn::Mlp({obs_dim, kHidden, kHidden, act_dim}, nn::Activation::kTanh,
                 nn::Activation::kIdentity);
  p.v = nn::Mlp({obs_dim, kHidden, kHidden, 1}, nn::Activation::kTanh,
                nn::Activation::kIdentity);
  p.log_std = nn::Tensor::zeros({act_dim});
  std::fill(p.log_std.values.begin(), p.log_std.values.end(), init_log_std);
  p.bound = bound;
  Rng pi_rng = rng.substream("pi-init");
  Rng v_rng = rng.substream("v-init");
  p.pi.init(pi_rng);
  p.v.init(v_rng);
  return p;
}

std::vector<double> GaussianPolicy::mean(std::span<const double> obs,
                                         nn::MlpCache* cache) const {
  return pi.forward(obs, cache);
}

double GaussianPolicy::value(std::span<const double> obs, nn::MlpCache* cache) const {
  return v.forward(obs, cache)[0];
}

double GaussianPolicy::squash(double u) const { return bound * std::tanh(u); }

std::vector<nn::ParamRef> GaussianPolicy::pi_params() {
  auto params = pi.params("policy");
  params.push_back({"policy.log_std", &log_std});
  return params;
}

void append_mlp_specs(const nn::Mlp& mlp, std::vector<nn::LayerSpec>& specs) {
  for (const auto& layer : mlp.layers) {
    specs.push_back({"dense", layer.in(), layer.out(),
                     nn::activation_to_string(layer.activation())});
  }
}

void store_mlp_tensors(const nn::Mlp& mlp, const std::string& prefix,
                       nn::Checkpoint& ckpt) {
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    ckpt.tensors[prefix + "." + std::to_string(k) + ".w"] = mlp.layers[k].w;
    ckpt.tensors[prefix + "." + std::to_string(k) + ".b"] = mlp.layers[k].b;
  }
}

nn::Mlp mlp_from_checkpoint(const nn::Checkpoint& ckpt, const std::string& prefix,
                            std::size_t first_spec, std::size_t n_layers) {
  if (first_spec + n_layers > ckpt.layer_specs.size())
    throw ConfigError("checkpoint: too few layer_specs for network_kind '" +
                      ckpt.network_kind + "'");
  std::vector<std::size_t> dims;
  std::vector<nn::Activation> acts;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto& spec = ckpt.layer_specs[first_spec + k];
    if (spec.kind != "dense")
      throw ConfigError("checkpoint: expected dense layer in '" + prefix + "'");
    if (k == 0) dims.push_back(spec.in);
    dims.push_back(spec.out);
    acts.push_back(nn::activation_from_string(spec.activation));
  }
  nn::Mlp mlp;
  for (std::size_t k = 0; k < n_layers; ++k)
    mlp.layers.emplace_back(dims[k], dims[k + 1], acts[k]);
  for (std::size_t k = 0; k < n_layers; ++k) {
    const std::string base = prefix + "." + std::to_string(k);
    auto wit = ckpt.tensors.find(base + ".w");
    auto bit = ckpt.tensors.find(base + ".b");
    if (wit == ckpt.tensors.end() || bit == ckpt.tensors.end())
      throw ConfigError("checkpoint: missing tensor '" + base + "'");
    if (wit->second.size() != mlp.layers[k].w.size() ||
        bit->second.size() != mlp.layers[k].b.size())
      throw ConfigError("checkpoint: tensor size mismatch at '" + base + "'");
    mlp.layers[k].w = wit->second;
    mlp.layers[k].b = bit->second;
  }
  return mlp;
}

nn::Checkpoint CategoricalPolicy::to_checkpoint(const std::string& network_kind) const {
  nn::Checkpoint ckpt;
  ckpt.network_kind = network_kind;
  append_mlp_specs(pi, ckpt.layer_specs);
  append_mlp_specs(v, ckpt.layer_specs);
  store_mlp_tensors(pi, "policy", ckpt);
  store_mlp_tensors(v, "value", ckpt);
  return ckpt;
}

CategoricalPolicy CategoricalPolicy::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.layer_specs.size() % 2 != 0)
    throw ConfigError("checkpoint: uneven layer_specs for actor-critic pair");
  const std::size_t half = ckpt.layer_specs.size() / 2;
  CategoricalPolicy p;
  p.pi = mlp_from_checkpoint(ckpt, "policy", 0, half);
  p.v = mlp_from_checkpoint(ckpt, "value", half, half);
  return p;
}

nn::Checkpoint GaussianPolicy::to_checkpoint(const std::string& network_kind) const {
  nn::Checkpoint ckpt;
  ckpt.network_kind = network_kind;
  append_mlp_specs(pi, ckpt.layer_specs);
  append_mlp_specs(v, ckpt.layer_specs);
  store_mlp_tensors(pi, "policy", ckpt);
  store_mlp_tensors(v, "value", ckpt);
  ckpt.tensors["policy.log_std"] = log_std;
  return ckpt;
}

GaussianPolicy GaussianPolicy::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.layer_specs.size() % 2 != 0)
    throw ConfigError("checkpoint: uneven layer_specs for actor-critic pair");
  const std::size_t half = ckpt.layer_specs.size() / 2;
  GaussianPolicy p;
  p.pi = mlp_from_checkpoint(ckpt, "policy", 0, half);
  p.v = mlp_from_checkpoint(ckpt, "value", half, half);
  auto it = ckpt.tensors.find("policy.log_std");
  if (it == ckpt.tensors.end())
    throw ConfigError("checkpoint: missing policy.log_std for residual policy");
  p.log_std = it->second;
  return p;
}

}  // namespace advisory::rl
