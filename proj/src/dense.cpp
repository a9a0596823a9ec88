#include "advisory/dense.hpp"

#include <cmath>

#include "advisory/common.hpp"

namespace advisory::nn {

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "identity";
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : in_(in), out_(out), act_(act) {
  w = Tensor::zeros({out, in});
  b = Tensor::zeros({out});
}

void DenseLayer::init(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_ + out_));
  for (double& v : w.values) v = rng.uniform(-bound, bound);
  std::fill(b.values.begin(), b.values.end(), 0.0);
}

void DenseLayer::forward(std::span<const double> x, std::span<double> y,
                         DenseCache* cache) const {
  if (x.size() != in_ || y.size() != out_)
    throw ConfigError("dense forward: shape mismatch (got " +
                      std::to_string(x.size()) + " -> " + std::to_string(y.size()) +
                      ", layer is " + std::to_string(in_) + " -> " +
                      std::to_string(out_) + ")");
  for (std::size_t j = 0; j < out_; ++j) {
    const double* wr = &w.values[j * in_];
    double acc = b.values[j];
    for (std::size_t i = 0; i < in_; ++i) acc += wr[i] * x[i];
    y[j] = acc;
  }
  if (cache != nullptr) {
    cache->input.assign(x.begin(), x.end());
    cache->pre.assign(y.begin(), y.end());
  }
  switch (act_) {
    case Activation::kIdentity:
      break;
    case Activation::kTanh:
      for (std::size_t j = 0; j < out_; ++j) y[j] = std::tanh(y[j]);
      break;
    case Activation::kRelu:
      for (std::size_t j = 0; j < out_; ++j) y[j] = y[j] > 0.0 ? y[j] : 0.0;
      break;
  }
  if (cache != nullptr) cache->post.assign(y.begin(), y.end());
}

std::vector<double> DenseLayer::forward(std::span<const double> x,
                                        DenseCache* cache) const {
  std::vector<double> y(out_);
  forward(x, y, cache);
  return y;
}

void DenseLayer::backward(const DenseCache& cache, std::span<const double> dy,
                          std::span<double> dx) {
  if (dy.size() != out_ || cache.input.size() != in_)
    throw ConfigError("dense backward: shape mismatch");
  w.ensure_grad();
  b.ensure_grad();
  for (std::size_t j = 0; j < out_; ++j) {
    double dpre = dy[j];
    switch (act_) {
      case Activation::kIdentity:
        break;
      case Activation::kTanh:
        dpre *= 1.0 - cache.post[j] * cache.post[j];
        break;
      case Activation::kRelu:
        dpre = cache.pre[j] > 0.0 ? dpre : 0.0;
        break;
    }
    b.grad[j] += dpre;
    double* wgr = &w.grad[j * in_];
    const double* wr = &w.values[j * in_];
    for (std::size_t i = 0; i < in_; ++i) {
      wgr[i] += dpre * cache.input[i];
      if (!dx.empty()) dx[i] += dpre * wr[i];
    }
  }
}

}  // namespace advisory::nn
