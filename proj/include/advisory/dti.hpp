// Unsupervised driver-trait inference: an LSTM VAE over fixed-length windows
// of ego observations. Trait labels ride along for evaluation only; the
// training loss never sees them.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advisory/checkpoint.hpp"
#include "advisory/dense.hpp"
#include "advisory/lstm.hpp"
#include "advisory/policy.hpp"
#include "advisory/ring.hpp"
#include "advisory/rng.hpp"

namespace advisory::dti {

inline constexpr int kObsDim = 3;

struct Trajectory {
  std::vector<std::array<double, 3>> states;  // length == window
  int trait_label = 2;       // evaluation-only metadata
  double trait_mean = 0.0;
};

using Dataset = std::vector<Trajectory>;

void save_dataset_jsonl(const Dataset& data, const std::string& path);
Dataset load_dataset_jsonl(const std::string& path);

struct DtiConfig {
  int window = 20;      // T
  int latent_dim = 2;   // l
  int hidden_size = 32;
  double beta_recon = 1.0;
  double beta_kl = 1e-4;
  double learning_rate = 1e-4;
  int batch_size = 16;
  int epochs = 100;
  double train_split = 0.8;
  // dataset collection
  int n_per_trait = 1000;
  int collect_warmup = 600;
  int collect_horizon = 1000;

  void validate() const;
};

// z = z_mu + eps * exp(z_logstd), elementwise.
std::vector<double> reparameterize(std::span<const double> z_mu,
                                   std::span<const double> z_logstd,
                                   std::span<const double> eps);

// KL(N(mu, exp(logstd)) || N(0, 1)) summed over dims.
double gaussian_kl(std::span<const double> z_mu, std::span<const double> z_logstd);

struct DtiModel {
  nn::LstmCell encoder;    // obs(3) -> hidden
  nn::DenseLayer f_mu;     // hidden -> latent
  nn::DenseLayer f_sigma;  // hidden -> latent
  nn::LstmCell decoder;    // latent -> hidden
  nn::DenseLayer f_dec;    // hidden -> obs(3)
  int window = 20;

  static DtiModel make(const DtiConfig& cfg, Rng& rng);

  int latent_dim() const { return static_cast<int>(f_mu.out()); }

  // (z_mu, z_logstd) from the final encoder hidden state. Throws ConfigError
  // on a wrong window length.
  std::pair<std::vector<double>, std::vector<double>> encode(
      std::span<const std::array<double, 3>> window_states) const;

  // z repeated as the decoder input at every step, zero initial state.
  std::vector<std::array<double, 3>> decode(std::span<const double> z) const;

  // Deterministic inference: the posterior mean.
  std::vector<double> infer(std::span<const std::array<double, 3>> window_states) const;

  std::vector<nn::ParamRef> params();
  nn::Checkpoint to_checkpoint() const;
  static DtiModel from_checkpoint(const nn::Checkpoint& ckpt);
};

// beta_recon * MSE(xhat, x) + beta_kl * KL. MSE averages over all window
// elements.
double dti_loss(const std::vector<std::array<double, 3>>& x,
                const std::vector<std::array<double, 3>>& xhat,
                std::span<const double> z_mu, std::span<const double> z_logstd,
                double beta_recon, double beta_kl);

// Forward pass with caches kept for the backward pass; eps is injected so
// gradient checks can hold it fixed.
struct DtiForward {
  std::vector<double> z_mu, z_logstd, z;
  std::vector<std::array<double, 3>> xhat;
  double loss = 0.0, recon = 0.0, kl = 0.0;
  nn::LstmSequenceCache enc_cache;
  nn::DenseCache mu_cache, sigma_cache;
  nn::LstmSequenceCache dec_cache;
  std::vector<nn::DenseCache> dec_out_caches;
};

DtiForward dti_forward(const DtiModel& model, const Trajectory& x,
                       std::span<const double> eps, double beta_recon, double beta_kl);
void dti_backward(DtiModel& model, const DtiForward& fwd, const Trajectory& x,
                  std::span<const double> eps, double beta_recon, double beta_kl);

struct DtiEpochLog {
  int epoch = 0;
  double train_loss = 0.0, train_recon = 0.0, train_kl = 0.0;
};

// Shuffled minibatch training with the adaptive-moment optimizer. Labels are
// never read. Returns the per-epoch loss trace.
std::vector<DtiEpochLog> train_dti(DtiModel& model, const Dataset& train,
                                   const DtiConfig& cfg, Rng& rng);

// Deterministic 80/20-style split: every k-th item (by fraction) goes to eval.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction);

struct DtiEvalReport {
  double accuracy = 0.0;  // nearest-centroid, 5-class
  std::vector<std::array<double, 2>> centroids;  // per trait label
  std::vector<double> within_std;                // mean within-cluster std per label
  // scatter rows: z1, z2, label (eval split)
  std::vector<std::array<double, 3>> scatter;
};

DtiEvalReport eval_dti(const DtiModel& model, const Dataset& train,
                       const Dataset& eval);

// Rollouts with trait-conditioned drivers following the advisory policy's
// greedy advice at the given hold length; post-warm-up observations are cut
// into disjoint windows, n_per_trait per trait, labels attached for
// evaluation only. Windows from collided episodes are discarded.
Dataset collect_dataset(const rl::CategoricalPolicy& pcp,
                        const rl::SpeedActionSpace& space,
                        const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                        const DtiConfig& cfg, int delta, std::uint64_t master_seed);

}  // namespace advisory::dti
