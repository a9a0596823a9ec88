// Policy networks and action spaces: the discrete-speed advisory policy,
// the bounded-residual Gaussian policy, and the hold-length controller.
#pragma once

#include <string>
#include <vector>

#include "advisory/checkpoint.hpp"
#include "advisory/heads.hpp"
#include "advisory/mlp.hpp"

namespace advisory::rl {

struct SpeedActionSpace {
  int count = 18;           // alpha
  double max_speed = 35.0;  // A_max

  double spacing() const { return max_speed / (count - 1); }
  double speed(int index) const;
  int nearest_index(double speed) const;
  void validate() const;
};

struct ResidualActionSpace {
  double bound = 6.0;  // epsilon, m/s
};

// clamp(a_pcp + residual, 0, a_max)
double compose_advice(double a_pcp, double residual, double a_max);

// a_driver - |a_driver - a_pcp|
double reward_perp(double a_driver, double a_pcp);

// Holds an advised action constant for exactly `hold_length` env steps.
class HoldController {
 public:
  explicit HoldController(int hold_length);
  bool needs_decision() const { return remaining_ == 0; }
  void set(double action);
  double tick();  // consumes one step of the window, returns the held action
  double held() const { return held_; }
  int hold_length() const { return hold_; }

 private:
  int hold_;
  int remaining_ = 0;
  double held_ = 0.0;
};

// MLP actor over a discrete action set plus a scalar value trunk.
struct CategoricalPolicy {
  nn::Mlp pi;  // obs -> logits
  nn::Mlp v;   // obs -> scalar

  static CategoricalPolicy make(std::size_t obs_dim, std::size_t n_actions, Rng& rng);

  std::vector<double> logits(std::span<const double> obs, nn::MlpCache* cache = nullptr) const;
  double value(std::span<const double> obs, nn::MlpCache* cache = nullptr) const;

  std::vector<nn::ParamRef> pi_params() { return pi.params("policy"); }
  std::vector<nn::ParamRef> v_params() { return v.params("value"); }

  nn::Checkpoint to_checkpoint(const std::string& network_kind) const;
  static CategoricalPolicy from_checkpoint(const nn::Checkpoint& ckpt);
};

// MLP actor emitting a diagonal-Gaussian mean with a learnable global
// log-std; actions are tanh-squashed to [-bound, bound].
struct GaussianPolicy {
  nn::Mlp pi;  // obs -> pre-squash mean
  nn::Mlp v;
  nn::Tensor log_std;  // [act_dim]
  double bound = 6.0;

  static GaussianPolicy make(std::size_t obs_dim, std::size_t act_dim, double bound,
                             Rng& rng, double init_log_std = -0.5);

  std::vector<double> mean(std::span<const double> obs, nn::MlpCache* cache = nullptr) const;
  double value(std::span<const double> obs, nn::MlpCache* cache = nullptr) const;
  double squash(double u) const;  // bound * tanh(u)

  std::vector<nn::ParamRef> pi_params();
  std::vector<nn::ParamRef> v_params() { return v.params("value"); }

  nn::Checkpoint to_checkpoint(const std::string& network_kind) const;
  static GaussianPolicy from_checkpoint(const nn::Checkpoint& ckpt);
};

// Shared helpers for the MLP <-> checkpoint mapping.
void append_mlp_specs(const nn::Mlp& mlp, std::vector<nn::LayerSpec>& specs);
void store_mlp_tensors(const nn::Mlp& mlp, const std::string& prefix, nn::Checkpoint& ckpt);
nn::Mlp mlp_from_checkpoint(const nn::Checkpoint& ckpt, const std::string& prefix,
                            std::size_t first_spec, std::size_t n_layers);

}  // namespace advisory::rl
