#include "advisory/adam.hpp"

#include <cmath>

#include "advisory/common.hpp"

namespace advisory::nn {

void Adam::step(const std::vector<ParamRef>& params) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k].assign(params[k].tensor->size(), 0.0);
      v_[k].assign(params[k].tensor->size(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw ConfigError("adam: parameter list changed between steps");

  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& t = *params[k].tensor;
    t.ensure_grad();
    if (m_[k].size() != t.size())
      throw ConfigError("adam: size mismatch for parameter '" + params[k].name + "'");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double g = t.grad[i];
      if (!std::isfinite(g))
        throw TrainingError("adam: non-finite gradient in parameter '" +
                            params[k].name + "'");
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
      const double mhat = m_[k][i] / bc1;
      const double vhat = v_[k][i] / bc2;
      t.values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void zero_grads(const std::vector<ParamRef>& params) {
  for (const auto& p : params) p.tensor->zero_grad();
}

}  // namespace advisory::nn
