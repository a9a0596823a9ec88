#include "advisory/lstm.hpp"

#include <cmath>

#include "advisory/common.hpp"

namespace advisory::nn {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

LstmCell::LstmCell(std::size_t input_size, std::size_t hidden_size)
    : in_(input_size), hidden_(hidden_size) {
  w_x = Tensor::zeros({4 * hidden_size, input_size});
  w_h = Tensor::zeros({4 * hidden_size, hidden_size});
  b = Tensor::zeros({4 * hidden_size});
}

void LstmCell::init(Rng& rng) {
  const double bx = std::sqrt(6.0 / static_cast<double>(in_ + hidden_));
  const double bh = std::sqrt(6.0 / static_cast<double>(2 * hidden_));
  for (double& v : w_x.values) v = rng.uniform(-bx, bx);
  for (double& v : w_h.values) v = rng.uniform(-bh, bh);
  std::fill(b.values.begin(), b.values.end(), 0.0);
  for (std::size_t j = hidden_; j < 2 * hidden_; ++j) b.values[j] = 1.0;  // forget gate
}

void LstmCell::forward(std::span<const double> x, std::span<const double> h_in,
                       std::span<const double> c_in, std::span<double> h_out,
                       std::span<double> c_out, LstmCache* cache) const {
  if (x.size() != in_ || h_in.size() != hidden_ || c_in.size() != hidden_ ||
      h_out.size() != hidden_ || c_out.size() != hidden_)
    throw ConfigError("lstm forward: shape mismatch");

  std::vector<double> pre(4 * hidden_);
  for (std::size_t j = 0; j < 4 * hidden_; ++j) {
    double acc = b.values[j];
    const double* wx = &w_x.values[j * in_];
    for (std::size_t i = 0; i < in_; ++i) acc += wx[i] * x[i];
    const double* wh = &w_h.values[j * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) acc += wh[i] * h_in[i];
    pre[j] = acc;
  }

  std::vector<double> gi(hidden_), gf(hidden_), gg(hidden_), go(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    gi[j] = sigmoid(pre[j]);
    gf[j] = sigmoid(pre[hidden_ + j]);
    gg[j] = std::tanh(pre[2 * hidden_ + j]);
    go[j] = sigmoid(pre[3 * hidden_ + j]);
  }
  std::vector<double> tc(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    c_out[j] = gf[j] * c_in[j] + gi[j] * gg[j];
    tc[j] = std::tanh(c_out[j]);
    h_out[j] = go[j] * tc[j];
  }

  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_in.begin(), h_in.end());
    cache->c_prev.assign(c_in.begin(), c_in.end());
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->c.assign(c_out.begin(), c_out.end());
    cache->tanh_c = std::move(tc);
  }
}

void LstmCell::backward(const LstmCache& cache, std::span<const double> dh,
                        std::span<const double> dc, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) {
  w_x.ensure_grad();
  w_h.ensure_grad();
  b.ensure_grad();

  std::vector<double> dpre(4 * hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double dhj = dh.empty() ? 0.0 : dh[j];
    const double dcj = (dc.empty() ? 0.0 : dc[j]) +
                       dhj * cache.o[j] * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
    const double di = dcj * cache.g[j];
    const double df = dcj * cache.c_prev[j];
    const double dg = dcj * cache.i[j];
    const double dout = dhj * cache.tanh_c[j];
    dpre[j] = di * cache.i[j] * (1.0 - cache.i[j]);
    dpre[hidden_ + j] = df * cache.f[j] * (1.0 - cache.f[j]);
    dpre[2 * hidden_ + j] = dg * (1.0 - cache.g[j] * cache.g[j]);
    dpre[3 * hidden_ + j] = dout * cache.o[j] * (1.0 - cache.o[j]);
    if (!dc_prev.empty()) dc_prev[j] += dcj * cache.f[j];
  }

  for (std::size_t j = 0; j < 4 * hidden_; ++j) {
    const double d = dpre[j];
    b.grad[j] += d;
    double* wxg = &w_x.grad[j * in_];
    const double* wx = &w_x.values[j * in_];
    for (std::size_t i = 0; i < in_; ++i) {
      wxg[i] += d * cache.x[i];
      if (!dx.empty()) dx[i] += d * wx[i];
    }
    double* whg = &w_h.grad[j * hidden_];
    const double* wh = &w_h.values[j * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) {
      whg[i] += d * cache.h_prev[i];
      if (!dh_prev.empty()) dh_prev[i] += d * wh[i];
    }
  }
}

std::vector<double> lstm_run_sequence(const LstmCell& cell,
                                      std::span<const std::vector<double>> inputs,
                                      LstmSequenceCache* cache) {
  const std::size_t h = cell.hidden_size();
  std::vector<double> hidden(h, 0.0), cstate(h, 0.0);
  std::vector<double> h_next(h), c_next(h);
  if (cache != nullptr) {
    cache->steps.resize(inputs.size());
    cache->hidden.resize(inputs.size());
  }
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    cell.forward(inputs[t], hidden, cstate, h_next, c_next,
                 cache != nullptr ? &cache->steps[t] : nullptr);
    hidden = h_next;
    cstate = c_next;
    if (cache != nullptr) cache->hidden[t] = hidden;
  }
  return hidden;
}

}  // namespace advisory::nn
