// Adaptive-moment optimizer with bias correction.
#pragma once

#include <vector>

#include "advisory/tensor.hpp"

namespace advisory::nn {

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update over the parameter list; grads must be populated. Throws
  // TrainingError naming the parameter on a non-finite gradient.
  void step(const std::vector<ParamRef>& params);

  long step_count() const { return step_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;  // first/second moments, by param order
};

void zero_grads(const std::vector<ParamRef>& params);

}  // namespace advisory::nn
