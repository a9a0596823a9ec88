#include "advisory/mlp.hpp"

#include "advisory/common.hpp"

namespace advisory::nn {

Mlp::Mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation out_act) {
  if (dims.size() < 2) throw ConfigError("mlp needs at least input and output dims");
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const bool last = (k + 2 == dims.size());
    layers.emplace_back(dims[k], dims[k + 1], last ? out_act : hidden);
  }
}

void Mlp::init(Rng& rng) {
  for (auto& l : layers) l.init(rng);
}

std::vector<double> Mlp::forward(std::span<const double> x, MlpCache* cache) const {
  if (cache != nullptr) cache->layers.resize(layers.size());
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    cur = layers[k].forward(cur, cache != nullptr ? &cache->layers[k] : nullptr);
  }
  return cur;
}

void Mlp::backward(const MlpCache& cache, std::span<const double> dy,
                   std::span<double> dx) {
  if (cache.layers.size() != layers.size())
    throw ConfigError("mlp backward: cache does not match layer count");
  std::vector<double> dcur(dy.begin(), dy.end());
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (k == 0) {
      layers[k].backward(cache.layers[k], dcur, dx);
    } else {
      std::vector<double> dprev(layers[k].in(), 0.0);
      layers[k].backward(cache.layers[k], dcur, dprev);
      dcur = std::move(dprev);
    }
  }
}

std::vector<ParamRef> Mlp::params(const std::string& prefix) {
  std::vector<ParamRef> out;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    out.push_back({prefix + "." + std::to_string(k) + ".w", &layers[k].w});
    out.push_back({prefix + "." + std::to_string(k) + ".b", &layers[k].b});
  }
  return out;
}

void Mlp::zero_grads() {
  for (auto& l : layers) {
    l.w.zero_grad();
    l.b.zero_grad();
  }
}

}  // namespace advisory::nn
