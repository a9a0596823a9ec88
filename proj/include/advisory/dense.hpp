// Fully connected layer with cached-intermediate backprop.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "advisory/rng.hpp"
#include "advisory/tensor.hpp"

namespace advisory::nn {

enum class Activation { kIdentity, kTanh, kRelu };

Activation activation_from_string(const std::string& s);
std::string activation_to_string(Activation a);

// Per-call intermediates; owned by the caller so that forward() stays const
// and frozen layers can be evaluated concurrently.
struct DenseCache {
  std::vector<double> input;
  std::vector<double> pre;   // W.x + b
  std::vector<double> post;  // activation(pre)
};

class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act);

  // Uniform init in +-sqrt(6/(fan_in+fan_out)); bias zero.
  void init(Rng& rng);

  // y = activation(W.x + b). Cache may be null when no backward pass follows.
  void forward(std::span<const double> x, std::span<double> y,
               DenseCache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> x,
                              DenseCache* cache = nullptr) const;

  // Accumulates parameter gradients; when dx is non-empty it also
  // accumulates the gradient w.r.t. the layer input into dx.
  void backward(const DenseCache& cache, std::span<const double> dy,
                std::span<double> dx = {});

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Activation activation() const { return act_; }

  Tensor w;  // [out, in]
  Tensor b;  // [out]

 private:
  std::size_t in_ = 0, out_ = 0;
  Activation act_ = Activation::kIdentity;
};

}  // namespace advisory::nn
