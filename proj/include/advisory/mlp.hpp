// Stack of dense layers (the (64, 64) policy/value trunks).
#pragma once

#include <span>
#include <vector>

#include "advisory/dense.hpp"

namespace advisory::nn {

struct MlpCache {
  std::vector<DenseCache> layers;
};

class Mlp {
 public:
  Mlp() = default;
  // dims = {in, hidden..., out}; hidden layers use `hidden`, last uses `out_act`.
  Mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation out_act);

  void init(Rng& rng);

  std::vector<double> forward(std::span<const double> x, MlpCache* cache = nullptr) const;

  // Accumulates parameter grads; optionally the input grad into dx.
  void backward(const MlpCache& cache, std::span<const double> dy,
                std::span<double> dx = {});

  std::vector<ParamRef> params(const std::string& prefix);
  void zero_grads();

  std::size_t in() const { return layers.empty() ? 0 : layers.front().in(); }
  std::size_t out() const { return layers.empty() ? 0 : layers.back().out(); }

  std::vector<DenseLayer> layers;
};

}  // namespace advisory::nn
