// LSTM cell with backprop-through-time via per-step caches.
#pragma once

#include <span>
#include <vector>

#include "advisory/rng.hpp"
#include "advisory/tensor.hpp"

namespace advisory::nn {

// Gate order inside the packed tensors: input, forget, cell, output.
struct LstmCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, g, o;  // post-activation gate values
  std::vector<double> c;           // new cell state
  std::vector<double> tanh_c;
};

class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(std::size_t input_size, std::size_t hidden_size);

  // Uniform +-sqrt(6/(fan_in+fan_out)) weights; forget-gate bias 1, rest 0.
  void init(Rng& rng);

  void forward(std::span<const double> x, std::span<const double> h_in,
               std::span<const double> c_in, std::span<double> h_out,
               std::span<double> c_out, LstmCache* cache = nullptr) const;

  // Accumulates parameter grads. dh/dc are the gradients flowing into h_out
  // and c_out; the input-side gradients are accumulated into dx, dh_prev,
  // dc_prev (any of which may be empty).
  void backward(const LstmCache& cache, std::span<const double> dh,
                std::span<const double> dc, std::span<double> dx,
                std::span<double> dh_prev, std::span<double> dc_prev);

  std::size_t input_size() const { return in_; }
  std::size_t hidden_size() const { return hidden_; }

  Tensor w_x;  // [4H, in]
  Tensor w_h;  // [4H, H]
  Tensor b;    // [4H]

 private:
  std::size_t in_ = 0, hidden_ = 0;
};

// Runs a full sequence with zero initial state; caches every step for BPTT.
struct LstmSequenceCache {
  std::vector<LstmCache> steps;
  std::vector<std::vector<double>> hidden;  // h after each step
};

std::vector<double> lstm_run_sequence(const LstmCell& cell,
                                      std::span<const std::vector<double>> inputs,
                                      LstmSequenceCache* cache = nullptr);

}  // namespace advisory::nn
