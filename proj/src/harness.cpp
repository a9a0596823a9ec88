#include "advisory/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "advisory/common.hpp"
#include "advisory/heads.hpp"

namespace advisory::evalh {

std::string kind_to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kIdm: return "idm";
    case PolicyKind::kOsl: return "osl";
    case PolicyKind::kPcp: return "pcp";
    case PolicyKind::kVrp: return "vrp";
    case PolicyKind::kTarp: return "tarp";
    case PolicyKind::kPerp: return "perp";
  }
  return "idm";
}

PolicyKind kind_from_string(const std::string& s) {
  if (s == "idm") return PolicyKind::kIdm;
  if (s == "osl") return PolicyKind::kOsl;
  if (s == "pcp") return PolicyKind::kPcp;
  if (s == "vrp") return PolicyKind::kVrp;
  if (s == "tarp") return PolicyKind::kTarp;
  if (s == "perp") return PolicyKind::kPerp;
  throw ConfigError("unknown policy kind '" + s + "'");
}

double emissions_proxy(const std::vector<std::vector<double>>& speeds,
                       const std::vector<std::vector<double>>& accels,
                       const EmissionsParams& p) {
  if (speeds.size() != accels.size())
    throw ConfigError("emissions_proxy: speed/accel step counts differ");
  double total = 0.0;
  for (std::size_t t = 0; t < speeds.size(); ++t) {
    if (speeds[t].size() != accels[t].size())
      throw ConfigError("emissions_proxy: speed/accel vehicle counts differ");
    for (std::size_t i = 0; i < speeds[t].size(); ++i) {
      const double v = speeds[t][i];
      const double a = std::max(0.0, accels[t][i]);
      total += std::max(0.0, p.c0 + p.c1 * v + p.c2 * v * v + p.c3 * v * a);
    }
  }
  return total;
}

std::vector<double> residual_input(PolicyKind kind, const sim::EgoObservation& obs,
                                   double pcp_norm, int trait_label,
                                   std::span<const double> z) {
  std::vector<double> in = {obs.v_ego_norm, obs.v_leader_norm, obs.h_leader_norm,
                            pcp_norm};
  switch (kind) {
    case PolicyKind::kVrp:
      break;
    case PolicyKind::kTarp:
      for (int c = 0; c < sim::kTraitCount; ++c)
        in.push_back(c == trait_label ? 1.0 : 0.0);
      break;
    case PolicyKind::kPerp:
      in.insert(in.end(), z.begin(), z.end());
      break;
    default:
      throw ConfigError("residual_input: not a residual policy kind");
  }
  return in;
}

EpisodeMetrics run_episode(const PolicyBundle& bundle, const sim::RingConfig& env_cfg,
                           const sim::IdmParams& idm, const EpisodeOptions& opt,
                           std::uint64_t seed) {
  sim::RingEnv env(env_cfg, idm);
  env.reset(seed);
  Rng base(seed);
  Rng driver_rng = base.substream("driver");
  Rng trait_rng = base.substream("trait");
  Rng policy_rng = base.substream("policy-sample");

  sim::DriverProfile driver;
  driver.trait = opt.pinned_trait >= 0 ? sim::trait_from_label(opt.pinned_trait)
                                       : sim::sample_trait(trait_rng);

  EpisodeMetrics m;
  m.trait_label = driver.trait.label;

  const int n = env_cfg.n_vehicles;
  long steps_counted = 0;
  double speed_sum = 0.0, std_sum = 0.0, emissions = 0.0;
  std::vector<double> prev_v;

  const auto account = [&](double ego_cmd) {
    const auto& v = env.state().vel;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n;
    speed_sum += mean;
    std_sum += std::sqrt(var);
    for (int i = 0; i < n; ++i) {
      const double a = (v[i] - prev_v[i]) / env_cfg.dt;
      const double ap = std::max(0.0, a);
      emissions += std::max(0.0, opt.emissions.c0 + opt.emissions.c1 * v[i] +
                                     opt.emissions.c2 * v[i] * v[i] +
                                     opt.emissions.c3 * v[i] * ap);
    }
    ++steps_counted;
    if (opt.dump != nullptr)
      opt.dump->write(env.state().step, env.state().pos, v, ego_cmd, env.collided());
  };

  for (int t = 0; t < opt.warmup; ++t) {
    env.step_idm();
    if (opt.dump != nullptr)
      opt.dump->write(env.state().step, env.state().pos, env.state().vel,
                      env.state().vel[sim::RingState::kEgoIndex], false);
  }

  if (bundle.kind == PolicyKind::kIdm) {
    for (int t = 0; t < opt.horizon; ++t) {
      prev_v = env.state().vel;
      env.step_idm();
      account(env.state().vel[sim::RingState::kEgoIndex]);
    }
  } else {
    rl::HoldController hold(opt.delta);
    double a_pcp = 0.0;

    const auto decide = [&]() -> double {
      const auto obs = env.observe_ego();
      const auto o = obs.as_array();
      if (bundle.kind == PolicyKind::kOsl) {
        a_pcp = bundle.osl_speed;
        return bundle.osl_speed;
      }
      if (bundle.pcp == nullptr) throw MissingArtifactError("episode: missing base policy");
      const auto logits = bundle.pcp->logits(o);
      const int idx = opt.greedy ? nn::argmax(logits)
                                 : nn::categorical_head(logits, policy_rng).sample;
      a_pcp = bundle.space.speed(idx);
      if (bundle.kind == PolicyKind::kPcp) return a_pcp;

      if (bundle.residual == nullptr)
        throw MissingArtifactError("episode: missing residual policy");
      std::vector<double> z;
      if (bundle.kind == PolicyKind::kPerp) {
        if (bundle.dti == nullptr)
          throw MissingArtifactError("episode: missing trait-inference model");
        z = bundle.dti->infer(env.recent_observations(bundle.dti_window));
      }
      const auto in = residual_input(bundle.kind, obs, a_pcp / bundle.space.max_speed,
                                     driver.trait.label, z);
      const auto mean = bundle.residual->mean(in);
      double u = mean[0];
      if (!opt.greedy)
        u = nn::gaussian_head(mean, bundle.residual->log_std.values, policy_rng)
                .sample[0];
      const double residual = bundle.residual->squash(u);
      return rl::compose_advice(a_pcp, residual, bundle.space.max_speed);
    };

    for (int t = 0; t < opt.horizon; ++t) {
      if (hold.needs_decision()) hold.set(decide());
      const double advised = hold.tick();
      if (opt.advised_trace != nullptr) opt.advised_trace->push_back(advised);
      const double cmd =
          opt.perfect_driver ? advised
                             : driver.act(advised, env_cfg.v_max, driver_rng);
      prev_v = env.state().vel;
      const bool collided = env.step(cmd);
      account(cmd);
      if (collided) {
        m.collided = true;
        break;
      }
    }
  }

  if (steps_counted > 0) {
    m.avg_speed = speed_sum / static_cast<double>(steps_counted);
    m.speed_std = std_sum / static_cast<double>(steps_counted);
    m.emissions = emissions;
  }
  return m;
}

EvaluateResult evaluate(const PolicyBundle& bundle, const sim::RingConfig& env_cfg,
                        const sim::IdmParams& idm, const EpisodeOptions& opt,
                        int n_iterations, std::uint64_t master_seed, int workers) {
  EvaluateResult result;
  result.episodes.resize(static_cast<std::size_t>(std::max(0, n_iterations)));
  if (n_iterations <= 0) return result;

  Rng base(master_seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_iterations));
  for (int i = 0; i < n_iterations; ++i)
    seeds[static_cast<std::size_t>(i)] =
        base.substream("eval-episode", static_cast<std::uint64_t>(i)).seed();

  workers = std::max(1, workers);
  if (workers == 1) {
    for (int i = 0; i < n_iterations; ++i)
      result.episodes[static_cast<std::size_t>(i)] =
          run_episode(bundle, env_cfg, idm, opt, seeds[static_cast<std::size_t>(i)]);
  } else {
    // Episodes are independent; results land in index order regardless of
    // scheduling, so parallel evaluation stays deterministic.
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int i = w; i < n_iterations; i += workers)
          result.episodes[static_cast<std::size_t>(i)] =
              run_episode(bundle, env_cfg, idm, opt, seeds[static_cast<std::size_t>(i)]);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& ep : result.episodes) {
    if (ep.collided) {
      ++result.collisions;
      continue;
    }
    ++result.valid;
    result.mean_avg_speed += ep.avg_speed;
    result.mean_speed_std += ep.speed_std;
    result.mean_emissions += ep.emissions;
  }
  if (result.valid > 0) {
    result.mean_avg_speed /= result.valid;
    result.mean_speed_std /= result.valid;
    result.mean_emissions /= result.valid;
  }
  return result;
}

double equilibrium_gap(const sim::RingConfig& cfg) {
  return cfg.circumference / cfg.n_vehicles - cfg.vehicle_length;
}

double optimal_uniform_speed(const sim::RingConfig& cfg, const sim::IdmParams& idm) {
  return sim::idm_equilibrium_speed(equilibrium_gap(cfg), idm);
}

GridSearchResult grid_search_constant_speed(const sim::RingConfig& cfg,
                                            const sim::IdmParams& idm, double lo,
                                            double hi, double step, int n_seeds,
                                            int horizon, std::uint64_t master_seed) {
  if (step <= 0.0 || hi < lo) throw ConfigError("grid search: bad speed grid");
  GridSearchResult result;
  Rng base(master_seed);
  // The check isolates the equilibrium property: noise and jitter are off so
  // a held speed is scored against the settled ring, not against whichever
  // stochastic wave happens to reach the ego first. Speeds above the
  // equilibrium root are infeasible (the leader settles below them and the
  // constant-speed ego runs into it) and score zero via collision.
  sim::RingConfig quiet_cfg = cfg;
  quiet_cfg.init_jitter = 0.0;
  sim::IdmParams quiet_idm = idm;
  quiet_idm.accel_noise_std = 0.0;
  for (double c = lo; c <= hi + 1e-9; c += step) {
    double mean_avg = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
      sim::RingEnv env(quiet_cfg, quiet_idm);
      env.reset(base.substream("grid", static_cast<std::uint64_t>(s)).seed());
      env.set_uniform_speed(c);  // no spin-up transient around the held speed
      double speed_sum = 0.0;
      long counted = 0;
      bool collided = false;
      for (int t = 0; t < horizon && !collided; ++t) {
        collided = env.step(c);
        if (t >= horizon / 2) {
          const auto& v = env.state().vel;
          double mean = 0.0;
          for (double x : v) mean += x;
          speed_sum += mean / cfg.n_vehicles;
          ++counted;
        }
      }
      mean_avg += (collided || counted == 0) ? 0.0 : speed_sum / counted;
    }
    mean_avg /= std::max(1, n_seeds);
    result.table.emplace_back(c, mean_avg);
    if (mean_avg > result.best_avg) {
      result.best_avg = mean_avg;
      result.best_speed = c;
    }
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

CompareResult compare(const std::vector<CompareCell>& cells,
                      const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                      const rl::SpeedActionSpace& space, double residual_bound,
                      const CompareOptions& opt) {
  CompareResult out;
  struct Row {
    std::string policy;
    int delta, seed;
    double avg_speed, avg_std, emissions;
    int collisions;
    int episodes;
  };
  std::vector<Row> rows;

  for (const auto& cell : cells) {
    PolicyBundle bundle;
    bundle.kind = cell.kind;
    bundle.space = space;

    rl::CategoricalPolicy pcp;
    rl::GaussianPolicy residual;
    dti::DtiModel dti_model;
    try {
      if (cell.kind == PolicyKind::kOsl)
        bundle.osl_speed = optimal_uniform_speed(env_cfg, idm);
      if (cell.kind == PolicyKind::kPcp || cell.kind == PolicyKind::kVrp ||
          cell.kind == PolicyKind::kTarp || cell.kind == PolicyKind::kPerp) {
        if (!cell.pcp_path)
          throw MissingArtifactError("compare: no base policy path for " +
                                     kind_to_string(cell.kind));
        pcp = rl::CategoricalPolicy::from_checkpoint(nn::load_checkpoint(*cell.pcp_path));
        bundle.pcp = &pcp;
      }
      if (cell.kind == PolicyKind::kVrp || cell.kind == PolicyKind::kTarp ||
          cell.kind == PolicyKind::kPerp) {
        if (!cell.residual_path)
          throw MissingArtifactError("compare: no residual path for " +
                                     kind_to_string(cell.kind));
        residual =
            rl::GaussianPolicy::from_checkpoint(nn::load_checkpoint(*cell.residual_path));
        residual.bound = residual_bound;
        bundle.residual = &residual;
      }
      if (cell.kind == PolicyKind::kPerp) {
        if (!cell.dti_path)
          throw MissingArtifactError("compare: no trait-inference path for perp");
        dti_model = dti::DtiModel::from_checkpoint(nn::load_checkpoint(*cell.dti_path));
        bundle.dti = &dti_model;
        bundle.dti_window = dti_model.window;
      }
    } catch (const MissingArtifactError& e) {
      const std::string msg = std::string("(") + kind_to_string(cell.kind) +
                              ", delta=" + std::to_string(cell.delta) +
                              ", seed=" + std::to_string(cell.seed) + "): " + e.what();
      log::warn("compare: skipping cell " + msg);
      out.skipped.push_back(msg);
      continue;
    }

    EpisodeOptions ep = opt.episode;
    ep.delta = cell.delta;
    // Per-cell seed stream: distinct per (policy, delta, seed).
    const std::uint64_t cell_seed =
        Rng(opt.master_seed)
            .substream(kind_to_string(cell.kind),
                       static_cast<std::uint64_t>(cell.delta) * 1000 +
                           static_cast<std::uint64_t>(cell.seed))
            .seed();
    const auto res = evaluate(bundle, env_cfg, idm, ep, opt.episodes_per_cell,
                              cell_seed, opt.workers);
    rows.push_back({kind_to_string(cell.kind), cell.delta, cell.seed,
                    res.mean_avg_speed, res.mean_speed_std, res.mean_emissions,
                    res.collisions, opt.episodes_per_cell});
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.policy != b.policy) return a.policy < b.policy;
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.seed < b.seed;
  });

  std::string csv = "policy,delta,seed,avg_speed,avg_std,collisions,emissions_proxy\n";
  for (const auto& r : rows) {
    csv += r.policy + "," + std::to_string(r.delta) + "," + std::to_string(r.seed) +
           "," + fmt(r.avg_speed) + "," + fmt(r.avg_std) + "," +
           std::to_string(r.collisions) + "," + fmt(r.emissions) + "\n";
  }
  out.data_rows = static_cast<int>(rows.size());

  // Summary rows (seed column 'mean'/'std'), mirroring the per-delta layout.
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double s1 = 0, s2 = 0, q1 = 0, q2 = 0, se = 0;
    int coll = 0;
    while (j < rows.size() && rows[j].policy == rows[i].policy &&
           rows[j].delta == rows[i].delta) {
      s1 += rows[j].avg_speed;
      q1 += rows[j].avg_speed * rows[j].avg_speed;
      s2 += rows[j].avg_std;
      q2 += rows[j].avg_std * rows[j].avg_std;
      se += rows[j].emissions;
      coll += rows[j].collisions;
      ++j;
    }
    const double k = static_cast<double>(j - i);
    const double m1 = s1 / k, m2 = s2 / k;
    const double sd1 = std::sqrt(std::max(0.0, q1 / k - m1 * m1));
    const double sd2 = std::sqrt(std::max(0.0, q2 / k - m2 * m2));
    csv += rows[i].policy + "," + std::to_string(rows[i].delta) + ",mean," + fmt(m1) +
           "," + fmt(m2) + "," + std::to_string(coll) + "," + fmt(se / k) + "\n";
    csv += rows[i].policy + "," + std::to_string(rows[i].delta) + ",std," + fmt(sd1) +
           "," + fmt(sd2) + ",0," + fmt(0.0) + "\n";
    i = j;
  }
  out.csv = std::move(csv);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw MissingArtifactError("cannot write file: " + path);
  out << content;
}

}  // namespace advisory::evalh
