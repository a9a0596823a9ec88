// Flat row-major tensor holding parameter values and (optionally) gradients.
#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "advisory/common.hpp"

namespace advisory::nn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;  // row-major, length == product(shape)
  std::vector<double> grad;    // empty, or same length as values

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shp) {
    Tensor t;
    std::size_t n = 1;
    for (std::size_t d : shp) n *= d;
    t.shape = std::move(shp);
    t.values.assign(n, 0.0);
    return t;
  }

  std::size_t size() const { return values.size(); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  }

  void check(const std::string& name) const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    if (n != values.size())
      throw ConfigError("tensor '" + name + "': shape/value length mismatch");
    if (!grad.empty() && grad.size() != values.size())
      throw ConfigError("tensor '" + name + "': grad length mismatch");
  }
};

// Named handle used by the optimizer and the checkpoint writer.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

}  // namespace advisory::nn
