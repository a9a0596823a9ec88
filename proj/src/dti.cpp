#include "advisory/dti.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "advisory/adam.hpp"
#include "advisory/common.hpp"
#include "advisory/driver.hpp"
#include "advisory/heads.hpp"

namespace advisory::dti {

using nlohmann::json;

void DtiConfig::validate() const {
  if (window < 1) throw ConfigError("dti: window must be >= 1");
  if (latent_dim < 1 || hidden_size < 1) throw ConfigError("dti: bad network sizes");
  if (beta_recon < 0 || beta_kl < 0) throw ConfigError("dti: betas must be >= 0");
  if (learning_rate <= 0) throw ConfigError("dti: learning rate must be positive");
  if (batch_size < 1 || epochs < 0) throw ConfigError("dti: bad batch/epochs");
  if (train_split <= 0.0 || train_split >= 1.0)
    throw ConfigError("dti: train_split must be in (0, 1)");
  if (n_per_trait < 1 || collect_warmup < 0 || collect_horizon < window)
    throw ConfigError("dti: bad collection parameters");
}

void save_dataset_jsonl(const Dataset& data, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw MissingArtifactError("cannot write dataset: " + path);
  for (const auto& traj : data) {
    json states = json::array();
    for (const auto& s : traj.states) states.push_back({s[0], s[1], s[2]});
    json rec = {{"trait_mean", traj.trait_mean}, {"states", states}};
    out << rec.dump() << "\n";
  }
}

Dataset load_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("dataset not found: " + path);
  Dataset data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("dataset '" + path + "': invalid JSON line: " + e.what());
    }
    Trajectory traj;
    traj.trait_mean = rec.at("trait_mean").get<double>();
    traj.trait_label = sim::trait_from_value(traj.trait_mean).label;
    for (const auto& s : rec.at("states")) {
      if (s.size() != kObsDim)
        throw ConfigError("dataset '" + path + "': state tuples must have 3 entries");
      traj.states.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    data.push_back(std::move(traj));
  }
  return data;
}

std::vector<double> reparameterize(std::span<const double> z_mu,
                                   std::span<const double> z_logstd,
                                   std::span<const double> eps) {
  std::vector<double> z(z_mu.size());
  for (std::size_t d = 0; d < z.size(); ++d)
    z[d] = z_mu[d] + eps[d] * std::exp(z_logstd[d]);
  return z;
}

double gaussian_kl(std::span<const double> z_mu, std::span<const double> z_logstd) {
  double kl = 0.0;
  for (std::size_t d = 0; d < z_mu.size(); ++d)
    kl += 0.5 * (z_mu[d] * z_mu[d] + std::exp(2.0 * z_logstd[d]) - 1.0) - z_logstd[d];
  return kl;
}

DtiModel DtiModel::make(const DtiConfig& cfg, Rng& rng) {
  cfg.validate();
  DtiModel m;
  const auto h = static_cast<std::size_t>(cfg.hidden_size);
  const auto l = static_cast<std::size_t>(cfg.latent_dim);
  m.encoder = nn::LstmCell(kObsDim, h);
  m.f_mu = nn::DenseLayer(h, l, nn::Activation::kIdentity);
  m.f_sigma = nn::DenseLayer(h, l, nn::Activation::kIdentity);
  m.decoder = nn::LstmCell(l, h);
  m.f_dec = nn::DenseLayer(h, kObsDim, nn::Activation::kIdentity);
  m.window = cfg.window;
  Rng r1 = rng.substream("dti-enc"), r2 = rng.substream("dti-mu"),
      r3 = rng.substream("dti-sigma"), r4 = rng.substream("dti-dec"),
      r5 = rng.substream("dti-out");
  m.encoder.init(r1);
  m.f_mu.init(r2);
  m.f_sigma.init(r3);
  m.decoder.init(r4);
  m.f_dec.init(r5);
  return m;
}

namespace {
std::vector<std::vector<double>> to_rows(std::span<const std::array<double, 3>> w) {
  std::vector<std::vector<double>> rows;
  rows.reserve(w.size());
  for (const auto& s : w) rows.push_back({s[0], s[1], s[2]});
  return rows;
}
}  // namespace

std::pair<std::vector<double>, std::vector<double>> DtiModel::encode(
    std::span<const std::array<double, 3>> window_states) const {
  if (static_cast<int>(window_states.size()) != window)
    throw ConfigError("dti encode: window must have exactly " +
                      std::to_string(window) + " states");
  const auto rows = to_rows(window_states);
  const auto e = nn::lstm_run_sequence(encoder, rows);
  return {f_mu.forward(e), f_sigma.forward(e)};
}

std::vector<std::array<double, 3>> DtiModel::decode(std::span<const double> z) const {
  const std::vector<std::vector<double>> inputs(
      static_cast<std::size_t>(window), std::vector<double>(z.begin(), z.end()));
  nn::LstmSequenceCache cache;
  nn::lstm_run_sequence(decoder, inputs, &cache);
  std::vector<std::array<double, 3>> out(static_cast<std::size_t>(window));
  for (int t = 0; t < window; ++t) {
    const auto y = f_dec.forward(cache.hidden[static_cast<std::size_t>(t)]);
    out[static_cast<std::size_t>(t)] = {y[0], y[1], y[2]};
  }
  return out;
}

std::vector<double> DtiModel::infer(
    std::span<const std::array<double, 3>> window_states) const {
  return encode(window_states).first;
}

std::vector<nn::ParamRef> DtiModel::params() {
  return {
      {"encoder.lstm.w_x", &encoder.w_x}, {"encoder.lstm.w_h", &encoder.w_h},
      {"encoder.lstm.b", &encoder.b},     {"f_mu.w", &f_mu.w},
      {"f_mu.b", &f_mu.b},                {"f_sigma.w", &f_sigma.w},
      {"f_sigma.b", &f_sigma.b},          {"decoder.lstm.w_x", &decoder.w_x},
      {"decoder.lstm.w_h", &decoder.w_h}, {"decoder.lstm.b", &decoder.b},
      {"f_dec.w", &f_dec.w},              {"f_dec.b", &f_dec.b},
  };
}

double dti_loss(const std::vector<std::array<double, 3>>& x,
                const std::vector<std::array<double, 3>>& xhat,
                std::span<const double> z_mu, std::span<const double> z_logstd,
                double beta_recon, double beta_kl) {
  if (x.size() != xhat.size()) throw ConfigError("dti loss: window length mismatch");
  double mse = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t)
    for (int d = 0; d < kObsDim; ++d) {
      const double e = xhat[t][d] - x[t][d];
      mse += e * e;
    }
  mse /= static_cast<double>(x.size() * kObsDim);
  return beta_recon * mse + beta_kl * gaussian_kl(z_mu, z_logstd);
}

DtiForward dti_forward(const DtiModel& model, const Trajectory& x,
                       std::span<const double> eps, double beta_recon,
                       double beta_kl) {
  if (static_cast<int>(x.states.size()) != model.window)
    throw ConfigError("dti forward: window length mismatch");
  DtiForward f;
  const auto rows = to_rows(x.states);
  const auto e = nn::lstm_run_sequence(model.encoder, rows, &f.enc_cache);
  f.z_mu = model.f_mu.forward(e, &f.mu_cache);
  f.z_logstd = model.f_sigma.forward(e, &f.sigma_cache);
  f.z = reparameterize(f.z_mu, f.z_logstd, eps);

  const std::vector<std::vector<double>> dec_inputs(
      static_cast<std::size_t>(model.window), f.z);
  nn::lstm_run_sequence(model.decoder, dec_inputs, &f.dec_cache);
  f.dec_out_caches.resize(static_cast<std::size_t>(model.window));
  f.xhat.resize(static_cast<std::size_t>(model.window));
  for (int t = 0; t < model.window; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const auto y = model.f_dec.forward(f.dec_cache.hidden[st], &f.dec_out_caches[st]);
    f.xhat[st] = {y[0], y[1], y[2]};
  }

  double mse = 0.0;
  for (int t = 0; t < model.window; ++t)
    for (int d = 0; d < kObsDim; ++d) {
      const auto st = static_cast<std::size_t>(t);
      const double err = f.xhat[st][static_cast<std::size_t>(d)] -
                         x.states[st][static_cast<std::size_t>(d)];
      mse += err * err;
    }
  mse /= static_cast<double>(model.window * kObsDim);
  f.recon = mse;
  f.kl = gaussian_kl(f.z_mu, f.z_logstd);
  f.loss = beta_recon * f.recon + beta_kl * f.kl;
  return f;
}

void dti_backward(DtiModel& model, const DtiForward& fwd, const Trajectory& x,
                  std::span<const double> eps, double beta_recon, double beta_kl) {
  const int T = model.window;
  const std::size_t hidden = model.decoder.hidden_size();
  const std::size_t latent = fwd.z.size();
  const double mse_scale = beta_recon * 2.0 / static_cast<double>(T * kObsDim);

  // Decoder: walk backwards through time, feeding each step's output-layer
  // gradient into the recurrent path, and accumulate d(loss)/dz from the
  // repeated input.
  std::vector<double> dz(latent, 0.0);
  std::vector<double> dh(hidden, 0.0), dc(hidden, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    std::array<double, 3> dy{};
    for (int d = 0; d < kObsDim; ++d)
      dy[static_cast<std::size_t>(d)] =
          mse_scale * (fwd.xhat[st][static_cast<std::size_t>(d)] -
                       x.states[st][static_cast<std::size_t>(d)]);
    model.f_dec.backward(fwd.dec_out_caches[st], dy, dh);

    std::vector<double> dh_prev(hidden, 0.0), dc_prev(hidden, 0.0);
    model.decoder.backward(fwd.dec_cache.steps[st], dh, dc, dz, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }

  // Latent path: dz flows into z_mu directly and into z_logstd through
  // eps * exp(logstd); the KL term adds its own analytic gradients.
  std::vector<double> dz_mu(latent, 0.0), dz_logstd(latent, 0.0);
  for (std::size_t d = 0; d < latent; ++d) {
    dz_mu[d] = dz[d] + beta_kl * fwd.z_mu[d];
    dz_logstd[d] = dz[d] * eps[d] * std::exp(fwd.z_logstd[d]) +
                   beta_kl * (std::exp(2.0 * fwd.z_logstd[d]) - 1.0);
  }

  std::vector<double> de(model.encoder.hidden_size(), 0.0);
  model.f_mu.backward(fwd.mu_cache, dz_mu, de);
  model.f_sigma.backward(fwd.sigma_cache, dz_logstd, de);

  std::vector<double> dhe = std::move(de);
  std::vector<double> dce(model.encoder.hidden_size(), 0.0);
  for (int t = T - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    std::vector<double> dh_prev(model.encoder.hidden_size(), 0.0),
        dc_prev(model.encoder.hidden_size(), 0.0);
    model.encoder.backward(fwd.enc_cache.steps[st], dhe, dce, {}, dh_prev, dc_prev);
    dhe = std::move(dh_prev);
    dce = std::move(dc_prev);
  }
}

std::vector<DtiEpochLog> train_dti(DtiModel& model, const Dataset& train,
                                   const DtiConfig& cfg, Rng& rng) {
  cfg.validate();
  if (train.empty()) throw ConfigError("dti train: empty dataset");
  nn::Adam opt(cfg.learning_rate);
  auto params = model.params();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  Rng shuffle_rng = rng.substream("dti-shuffle");
  Rng eps_rng = rng.substream("dti-eps");
  std::vector<DtiEpochLog> logs;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our own stream, for reproducibility.
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(shuffle_rng.uniform_int(static_cast<int>(i)))]);

    DtiEpochLog elog;
    elog.epoch = epoch;
    std::size_t i = 0;
    while (i < order.size()) {
      const std::size_t batch_end = std::min(order.size(), i + static_cast<std::size_t>(cfg.batch_size));
      const double batch_n = static_cast<double>(batch_end - i);
      nn::zero_grads(params);
      double scale_fixup = 1.0 / batch_n;
      for (; i < batch_end; ++i) {
        const Trajectory& item = train[order[i]];
        std::vector<double> eps(static_cast<std::size_t>(model.latent_dim()));
        for (double& e : eps) e = eps_rng.normal();
        // Per-sample grads are accumulated at weight beta/batch_n by scaling
        // the betas; loss parts are logged at full scale.
        DtiForward fwd = dti_forward(model, item, eps, cfg.beta_recon, cfg.beta_kl);
        dti_backward(model, fwd, item, eps, cfg.beta_recon * scale_fixup,
                     cfg.beta_kl * scale_fixup);
        elog.train_loss += fwd.loss;
        elog.train_recon += fwd.recon;
        elog.train_kl += fwd.kl;
      }
      opt.step(params);
    }
    const double n = static_cast<double>(train.size());
    elog.train_loss /= n;
    elog.train_recon /= n;
    elog.train_kl /= n;
    logs.push_back(elog);
  }
  return logs;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction) {
  Dataset train, eval;
  for (std::size_t i = 0; i < data.size(); ++i) {
    // Deterministic interleaved split keeps the per-trait balance.
    const double pos = static_cast<double>(i % 10) / 10.0;
    (pos < train_fraction ? train : eval).push_back(data[i]);
  }
  return {train, eval};
}

DtiEvalReport eval_dti(const DtiModel& model, const Dataset& train, const Dataset& eval) {
  DtiEvalReport report;
  const std::size_t latent = static_cast<std::size_t>(model.latent_dim());
  if (latent != 2)
    log::warn("eval_dti: scatter/centroid report assumes a 2-dim latent");

  std::array<std::vector<std::array<double, 2>>, sim::kTraitCount> by_label;
  for (const auto& item : train) {
    const auto z = model.infer(item.states);
    by_label[static_cast<std::size_t>(item.trait_label)].push_back(
        {z[0], latent > 1 ? z[1] : 0.0});
  }
  report.centroids.resize(sim::kTraitCount, {0.0, 0.0});
  report.within_std.resize(sim::kTraitCount, 0.0);
  for (int c = 0; c < sim::kTraitCount; ++c) {
    const auto& pts = by_label[static_cast<std::size_t>(c)];
    if (pts.empty()) continue;
    auto& ctr = report.centroids[static_cast<std::size_t>(c)];
    for (const auto& p : pts) {
      ctr[0] += p[0];
      ctr[1] += p[1];
    }
    ctr[0] /= static_cast<double>(pts.size());
    ctr[1] /= static_cast<double>(pts.size());
    double var = 0.0;
    for (const auto& p : pts)
      var += (p[0] - ctr[0]) * (p[0] - ctr[0]) + (p[1] - ctr[1]) * (p[1] - ctr[1]);
    report.within_std[static_cast<std::size_t>(c)] =
        std::sqrt(var / static_cast<double>(pts.size()));
  }

  std::size_t correct = 0;
  for (const auto& item : eval) {
    const auto z = model.infer(item.states);
    const std::array<double, 2> p = {z[0], latent > 1 ? z[1] : 0.0};
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < sim::kTraitCount; ++c) {
      const auto& ctr = report.centroids[static_cast<std::size_t>(c)];
      const double d = (p[0] - ctr[0]) * (p[0] - ctr[0]) + (p[1] - ctr[1]) * (p[1] - ctr[1]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == item.trait_label) ++correct;
    report.scatter.push_back({p[0], p[1], static_cast<double>(item.trait_label)});
  }
  report.accuracy = eval.empty() ? 0.0 : static_cast<double>(correct) / eval.size();
  return report;
}

Dataset collect_dataset(const rl::CategoricalPolicy& pcp,
                        const rl::SpeedActionSpace& space,
                        const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                        const DtiConfig& cfg, int delta, std::uint64_t master_seed) {
  cfg.validate();
  space.validate();
  Dataset data;
  Rng root(master_seed);
  const int windows_per_episode = cfg.collect_horizon / cfg.window;
  if (windows_per_episode < 1)
    throw ConfigError("collect: horizon shorter than one window");

  for (int label = 0; label < sim::kTraitCount; ++label) {
    sim::DriverProfile driver;
    driver.trait = sim::trait_from_label(label);
    int collected = 0;
    std::uint64_t episode = 0;
    const std::uint64_t max_episodes =
        50ull + 50ull * static_cast<std::uint64_t>(cfg.n_per_trait) /
                    static_cast<std::uint64_t>(windows_per_episode);
    while (collected < cfg.n_per_trait) {
      if (episode >= max_episodes)
        throw TrainingError("collect: trait " + std::to_string(label) +
                            " keeps colliding; advisory policy looks unsafe");
      Rng ep_rng = root.substream("collect", static_cast<std::uint64_t>(label) * 1000000 + episode);
      Rng driver_rng = ep_rng.substream("driver");
      ++episode;

      sim::RingEnv env(env_cfg, idm);
      env.reset(ep_rng.seed());
      env.warmup(cfg.collect_warmup);

      rl::HoldController hold(delta);
      std::vector<std::array<double, 3>> states;
      states.reserve(static_cast<std::size_t>(cfg.collect_horizon));
      bool collided = false;
      for (int t = 0; t < cfg.collect_horizon && !collided; ++t) {
        if (hold.needs_decision()) {
          const auto logits = pcp.logits(env.observe_ego().as_array());
          hold.set(space.speed(nn::argmax(logits)));
        }
        const double advised = hold.tick();
        const double cmd = driver.act(advised, env_cfg.v_max, driver_rng);
        collided = env.step(cmd);
        states.push_back(env.observe_ego().as_array());
      }
      if (collided) {
        log::debug("collect: discarding collided episode for trait " +
                   std::to_string(label));
        continue;
      }
      for (int w = 0; w < windows_per_episode && collected < cfg.n_per_trait; ++w) {
        Trajectory traj;
        traj.trait_label = label;
        traj.trait_mean = driver.trait.value;
        const auto begin = states.begin() + w * cfg.window;
        traj.states.assign(begin, begin + cfg.window);
        data.push_back(std::move(traj));
        ++collected;
      }
    }
  }
  return data;
}

nn::Checkpoint DtiModel::to_checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.network_kind = "dti";
  ckpt.layer_specs = {
      {"lstm", encoder.input_size(), encoder.hidden_size(), "tanh"},
      {"dense", f_mu.in(), f_mu.out(), nn::activation_to_string(f_mu.activation())},
      {"dense", f_sigma.in(), f_sigma.out(), nn::activation_to_string(f_sigma.activation())},
      {"lstm", decoder.input_size(), decoder.hidden_size(), "tanh"},
      {"dense", f_dec.in(), f_dec.out(), nn::activation_to_string(f_dec.activation())},
  };
  ckpt.tensors["encoder.lstm.w_x"] = encoder.w_x;
  ckpt.tensors["encoder.lstm.w_h"] = encoder.w_h;
  ckpt.tensors["encoder.lstm.b"] = encoder.b;
  ckpt.tensors["f_mu.w"] = f_mu.w;
  ckpt.tensors["f_mu.b"] = f_mu.b;
  ckpt.tensors["f_sigma.w"] = f_sigma.w;
  ckpt.tensors["f_sigma.b"] = f_sigma.b;
  ckpt.tensors["decoder.lstm.w_x"] = decoder.w_x;
  ckpt.tensors["decoder.lstm.w_h"] = decoder.w_h;
  ckpt.tensors["decoder.lstm.b"] = decoder.b;
  ckpt.tensors["f_dec.w"] = f_dec.w;
  ckpt.tensors["f_dec.b"] = f_dec.b;
  return ckpt;
}

DtiModel DtiModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.network_kind != "dti")
    throw ConfigError("checkpoint: expected network_kind 'dti', got '" +
                      ckpt.network_kind + "'");
  if (ckpt.layer_specs.size() != 5)
    throw ConfigError("checkpoint: dti expects 5 layer specs");
  const auto& specs = ckpt.layer_specs;
  DtiModel m;
  m.encoder = nn::LstmCell(specs[0].in, specs[0].out);
  m.f_mu = nn::DenseLayer(specs[1].in, specs[1].out,
                          nn::activation_from_string(specs[1].activation));
  m.f_sigma = nn::DenseLayer(specs[2].in, specs[2].out,
                             nn::activation_from_string(specs[2].activation));
  m.decoder = nn::LstmCell(specs[3].in, specs[3].out);
  m.f_dec = nn::DenseLayer(specs[4].in, specs[4].out,
                           nn::activation_from_string(specs[4].activation));
  auto fetch = [&](const std::string& name, nn::Tensor& dst) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end())
      throw ConfigError("checkpoint: missing tensor '" + name + "'");
    if (it->second.size() != dst.size())
      throw ConfigError("checkpoint: tensor size mismatch at '" + name + "'");
    dst = it->second;
  };
  fetch("encoder.lstm.w_x", m.encoder.w_x);
  fetch("encoder.lstm.w_h", m.encoder.w_h);
  fetch("encoder.lstm.b", m.encoder.b);
  fetch("f_mu.w", m.f_mu.w);
  fetch("f_mu.b", m.f_mu.b);
  fetch("f_sigma.w", m.f_sigma.w);
  fetch("f_sigma.b", m.f_sigma.b);
  fetch("decoder.lstm.w_x", m.decoder.w_x);
  fetch("decoder.lstm.w_h", m.decoder.w_h);
  fetch("decoder.lstm.b", m.decoder.b);
  fetch("f_dec.w", m.f_dec.w);
  fetch("f_dec.b", m.f_dec.b);
  return m;
}

}  // namespace advisory::dti
