#include "advisory/heads.hpp"

#include <algorithm>
#include <cmath>

#include "advisory/common.hpp"

namespace advisory::nn {

std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double categorical_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

CategoricalResult categorical_head(std::span<const double> logits, Rng& rng) {
  for (double v : logits)
    if (!std::isfinite(v)) throw NumericError("categorical head: non-finite logit");
  CategoricalResult r;
  r.probs = softmax(logits);
  const double u = rng.uniform01();
  double cdf = 0.0;
  r.sample = static_cast<int>(r.probs.size()) - 1;
  for (std::size_t i = 0; i < r.probs.size(); ++i) {
    cdf += r.probs[i];
    if (u < cdf) {
      r.sample = static_cast<int>(i);
      break;
    }
  }
  r.log_prob = std::log(std::max(r.probs[r.sample], 1e-300));
  r.entropy = categorical_entropy(r.probs);
  return r;
}

void categorical_logp_grad(std::span<const double> probs, int action, double coeff,
                           std::span<double> dlogits) {
  for (std::size_t i = 0; i < probs.size(); ++i)
    dlogits[i] += coeff * ((static_cast<int>(i) == action ? 1.0 : 0.0) - probs[i]);
}

void categorical_entropy_grad(std::span<const double> probs, double entropy,
                              double coeff, std::span<double> dlogits) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double lp = probs[i] > 0.0 ? std::log(probs[i]) : 0.0;
    dlogits[i] += coeff * (-probs[i] * (lp + entropy));
  }
}

GaussianSample gaussian_head(std::span<const double> mean,
                             std::span<const double> log_std, Rng& rng) {
  GaussianSample s;
  s.sample.resize(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) {
    if (!std::isfinite(mean[d]) || !std::isfinite(log_std[d]))
      throw NumericError("gaussian head: non-finite parameters");
    s.sample[d] = mean[d] + rng.normal() * std::exp(log_std[d]);
  }
  s.log_prob = gaussian_log_prob(s.sample, mean, log_std);
  s.entropy = gaussian_entropy(log_std);
  return s;
}

double gaussian_log_prob(std::span<const double> u, std::span<const double> mean,
                         std::span<const double> log_std) {
  double lp = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) {
    const double z = (u[d] - mean[d]) / std::exp(log_std[d]);
    lp += -0.5 * z * z - log_std[d] - 0.5 * std::log(2.0 * kPi);
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  return h;
}

void gaussian_logp_grad(std::span<const double> u, std::span<const double> mean,
                        std::span<const double> log_std, double coeff,
                        std::span<double> dmean, std::span<double> dlog_std) {
  for (std::size_t d = 0; d < u.size(); ++d) {
    const double inv_var = std::exp(-2.0 * log_std[d]);
    const double diff = u[d] - mean[d];
    dmean[d] += coeff * diff * inv_var;
    dlog_std[d] += coeff * (diff * diff * inv_var - 1.0);
  }
}

double tanh_squash_log_det(std::span<const double> u, double bound) {
  // log(bound * (1 - tanh(u)^2)) per dim; log(1 - tanh^2 u) is written as
  // 2*(log 2 - |u| - log1p(exp(-2|u|))) so it stays finite for large |u|.
  double s = 0.0;
  for (double v : u) {
    const double a = std::abs(v);
    s += std::log(bound) + 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
  }
  return s;
}

}  // namespace advisory::nn
