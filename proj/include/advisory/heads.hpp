// Stochastic policy heads: categorical over logits and diagonal Gaussian.
#pragma once

#include <span>
#include <vector>

#include "advisory/rng.hpp"

namespace advisory::nn {

struct CategoricalResult {
  std::vector<double> probs;
  int sample = 0;
  double log_prob = 0.0;
  double entropy = 0.0;
};

std::vector<double> softmax(std::span<const double> logits);
int argmax(std::span<const double> v);
double categorical_entropy(std::span<const double> probs);

// Throws NumericError on non-finite logits.
CategoricalResult categorical_head(std::span<const double> logits, Rng& rng);

// d(log p[action])/dlogits = onehot(action) - p, scaled by coeff.
void categorical_logp_grad(std::span<const double> probs, int action, double coeff,
                           std::span<double> dlogits);
// dH/dlogits = -p * (log p + H), scaled by coeff.
void categorical_entropy_grad(std::span<const double> probs, double entropy,
                              double coeff, std::span<double> dlogits);

struct GaussianSample {
  std::vector<double> sample;  // mean + eps * exp(log_std)
  double log_prob = 0.0;
  double entropy = 0.0;
};

// Throws NumericError on non-finite mean/log_std.
GaussianSample gaussian_head(std::span<const double> mean,
                             std::span<const double> log_std, Rng& rng);

double gaussian_log_prob(std::span<const double> u, std::span<const double> mean,
                         std::span<const double> log_std);
double gaussian_entropy(std::span<const double> log_std);

// Per-dimension gradients of log N(u; mean, exp(log_std)).
void gaussian_logp_grad(std::span<const double> u, std::span<const double> mean,
                        std::span<const double> log_std, double coeff,
                        std::span<double> dmean, std::span<double> dlog_std);

// log |d/du of bound*tanh(u)| summed over dims; the squash correction term.
double tanh_squash_log_det(std::span<const double> u, double bound);

}  // namespace advisory::nn
