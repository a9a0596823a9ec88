#include "advisory/commands.hpp"

#include <cstdio>
#include <filesystem>

#include "advisory/common.hpp"
#include "advisory/perp.hpp"

namespace advisory::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_dti_log_csv(const std::vector<dti::DtiEpochLog>& logs,
                       const std::string& path) {
  std::string csv = "epoch,train_loss,train_recon,train_kl\n";
  char buf[128];
  for (const auto& row : logs) {
    std::snprintf(buf, sizeof(buf), "%d,%.8f,%.8f,%.8f\n", row.epoch, row.train_loss,
                  row.train_recon, row.train_kl);
    csv += buf;
  }
  evalh::write_text_file(path, csv);
}

void write_scatter_csv(const dti::DtiEvalReport& report, const std::string& path) {
  std::string csv = "z1,z2,label\n";
  char buf[96];
  for (const auto& row : report.scatter) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d\n", row[0], row[1],
                  static_cast<int>(row[2]));
    csv += buf;
  }
  evalh::write_text_file(path, csv);
}

evalh::EpisodeOptions eval_options(const cfg::Config& config) {
  evalh::EpisodeOptions opt;
  opt.warmup = config.get_int("eval.warmup");
  opt.horizon = config.get_int("eval.horizon");
  opt.greedy = true;
  opt.perfect_driver = false;
  opt.pinned_trait = config.pinned_trait();
  opt.emissions = config.emissions();
  return opt;
}

}  // namespace

void cmd_simulate(const cfg::Config& config, std::uint64_t seed, int steps,
                  const std::string& dump_path) {
  const auto env_cfg = config.env();
  const auto idm = config.idm();
  sim::RingEnv env(env_cfg, idm);
  env.reset(seed);
  std::unique_ptr<sim::TrajectoryWriter> dump;
  if (!dump_path.empty()) dump = std::make_unique<sim::TrajectoryWriter>(dump_path);

  double speed_sum = 0.0;
  for (int t = 0; t < steps; ++t) {
    env.step_idm();
    const auto& st = env.state();
    if (dump)
      dump->write(st.step, st.pos, st.vel, st.vel[sim::RingState::kEgoIndex], false);
    for (double v : st.vel) speed_sum += v;
  }
  const double avg =
      steps > 0 ? speed_sum / (static_cast<double>(steps) * env_cfg.n_vehicles) : 0.0;
  std::printf("simulate: %d all-IDM steps, avg speed %s m/s%s\n", steps,
              fmt(avg).c_str(),
              dump_path.empty() ? "" : (", dump " + dump_path).c_str());
}

void cmd_equilibrium(const cfg::Config& config, std::uint64_t seed, bool cross_check) {
  const auto env_cfg = config.env();
  const auto idm = config.idm();
  const double gap = evalh::equilibrium_gap(env_cfg);
  const double v_eq = evalh::optimal_uniform_speed(env_cfg, idm);
  std::printf("equilibrium: gap_eq %s m, uniform speed %s m/s\n", fmt(gap).c_str(),
              fmt(v_eq).c_str());
  if (cross_check) {
    const auto grid = evalh::grid_search_constant_speed(
        env_cfg, idm, 0.25, 12.0, 0.25, 1, 3000, seed);
    std::printf("equilibrium: grid-search best constant %s m/s (avg %s m/s), |diff| %s\n",
                fmt(grid.best_speed).c_str(), fmt(grid.best_avg).c_str(),
                fmt(std::abs(grid.best_speed - v_eq)).c_str());
  }
}

void cmd_train_pcp(const cfg::Config& config, std::uint64_t seed, int delta,
                   const std::string& out_path, const std::string& log_path) {
  const auto result = rl::train_pcp(config.env(), config.idm(), config.action_space(),
                                    config.pcp_train(), delta, seed);
  auto ckpt = result.policy.to_checkpoint("pcp");
  nn::save_checkpoint(ckpt, out_path);
  if (!log_path.empty()) rl::write_train_log_csv(result.log, log_path);
  std::printf("train-pcp: delta %d, %zu iterations, best eval avg speed %s m/s (iter %d) -> %s\n",
              delta, result.log.size(), fmt(result.best_eval_speed).c_str(),
              result.best_iter, out_path.c_str());
}

void cmd_collect(const cfg::Config& config, std::uint64_t seed, int delta,
                 const std::string& pcp_path, const std::string& out_path) {
  const auto pcp =
      rl::CategoricalPolicy::from_checkpoint(nn::load_checkpoint(pcp_path));
  const auto data = dti::collect_dataset(pcp, config.action_space(), config.env(),
                                         config.idm(), config.dti(), delta, seed);
  dti::save_dataset_jsonl(data, out_path);
  std::printf("collect-dti-data: %zu windows (%d per trait) -> %s\n", data.size(),
              config.dti().n_per_trait, out_path.c_str());
}

void cmd_train_dti(const cfg::Config& config, std::uint64_t seed,
                   const std::string& data_path, const std::string& out_path,
                   const std::string& log_path) {
  const auto data = dti::load_dataset_jsonl(data_path);
  const auto dti_cfg = config.dti();
  const auto [train, eval] = dti::split_dataset(data, dti_cfg.train_split);
  Rng rng(seed);
  Rng init_rng = rng.substream("dti-model");
  auto model = dti::DtiModel::make(dti_cfg, init_rng);
  Rng train_rng = rng.substream("dti-train");
  const auto logs = dti::train_dti(model, train, dti_cfg, train_rng);
  nn::save_checkpoint(model.to_checkpoint(), out_path);
  if (!log_path.empty()) write_dti_log_csv(logs, log_path);
  const auto report = dti::eval_dti(model, train, eval);
  std::printf("train-dti: %zu train / %zu eval windows, %d epochs, final loss %.6f, "
              "held-out accuracy %.1f%% -> %s\n",
              train.size(), eval.size(), dti_cfg.epochs,
              logs.empty() ? 0.0 : logs.back().train_loss, 100.0 * report.accuracy,
              out_path.c_str());
}

void cmd_eval_dti(const cfg::Config& config, const std::string& ckpt_path,
                  const std::string& data_path, const std::string& scatter_path) {
  const auto model = dti::DtiModel::from_checkpoint(nn::load_checkpoint(ckpt_path));
  const auto data = dti::load_dataset_jsonl(data_path);
  const auto [train, eval] = dti::split_dataset(data, config.dti().train_split);
  const auto report = dti::eval_dti(model, train, eval);
  for (int c = 0; c < sim::kTraitCount; ++c) {
    std::printf("eval-dti: trait %+.1f centroid (%s, %s), within-cluster std %s\n",
                sim::kTraitMeans[static_cast<std::size_t>(c)],
                fmt(report.centroids[static_cast<std::size_t>(c)][0]).c_str(),
                fmt(report.centroids[static_cast<std::size_t>(c)][1]).c_str(),
                fmt(report.within_std[static_cast<std::size_t>(c)]).c_str());
  }
  if (!scatter_path.empty()) write_scatter_csv(report, scatter_path);
  std::printf("eval-dti: nearest-centroid accuracy %.1f%% on %zu held-out windows\n",
              100.0 * report.accuracy, eval.size());
}

void cmd_train_perp(const cfg::Config& config, std::uint64_t seed,
                    const std::string& variant, int delta, const std::string& pcp_path,
                    const std::string& dti_path, const std::string& out_path,
                    const std::string& log_path) {
  const auto kind = evalh::kind_from_string(variant);
  if (kind != evalh::PolicyKind::kPerp && kind != evalh::PolicyKind::kVrp &&
      kind != evalh::PolicyKind::kTarp)
    throw ConfigError("train-perp: variant must be one of perp|vrp|tarp");
  const auto base =
      rl::CategoricalPolicy::from_checkpoint(nn::load_checkpoint(pcp_path));
  dti::DtiModel dti_model;
  const dti::DtiModel* dti_ptr = nullptr;
  if (kind == evalh::PolicyKind::kPerp) {
    if (dti_path.empty())
      throw MissingArtifactError("train-perp: variant perp needs --dti");
    dti_model = dti::DtiModel::from_checkpoint(nn::load_checkpoint(dti_path));
    dti_model.window = config.dti().window;
    dti_ptr = &dti_model;
  }
  const auto result = rl::train_perp(config.env(), config.idm(), config.action_space(),
                                     config.perp_train(), config.perp_epsilon(),
                                     config.perp_init_log_std(), kind, base, dti_ptr,
                                     delta, seed);
  nn::save_checkpoint(result.policy.to_checkpoint("residual-" + variant), out_path);
  if (!log_path.empty()) rl::write_train_log_csv(result.log, log_path);
  std::printf("train-perp: variant %s, delta %d, %zu iterations, best eval avg speed %s m/s -> %s\n",
              variant.c_str(), delta, result.log.size(),
              fmt(result.best_eval_speed).c_str(), out_path.c_str());
}

void cmd_evaluate(const cfg::Config& config, std::uint64_t seed,
                  const std::string& policy, int delta, const std::string& pcp_path,
                  const std::string& residual_path, const std::string& dti_path,
                  int iterations, const std::string& dump_path) {
  const auto kind = evalh::kind_from_string(policy);
  const auto env_cfg = config.env();
  const auto idm = config.idm();
  const auto space = config.action_space();

  evalh::PolicyBundle bundle;
  bundle.kind = kind;
  bundle.space = space;
  rl::CategoricalPolicy pcp;
  rl::GaussianPolicy residual;
  dti::DtiModel dti_model;
  if (kind == evalh::PolicyKind::kOsl)
    bundle.osl_speed = evalh::optimal_uniform_speed(env_cfg, idm);
  if (kind == evalh::PolicyKind::kPcp || kind == evalh::PolicyKind::kVrp ||
      kind == evalh::PolicyKind::kTarp || kind == evalh::PolicyKind::kPerp) {
    if (pcp_path.empty()) throw MissingArtifactError("evaluate: --pcp required");
    pcp = rl::CategoricalPolicy::from_checkpoint(nn::load_checkpoint(pcp_path));
    bundle.pcp = &pcp;
  }
  if (kind == evalh::PolicyKind::kVrp || kind == evalh::PolicyKind::kTarp ||
      kind == evalh::PolicyKind::kPerp) {
    if (residual_path.empty())
      throw MissingArtifactError("evaluate: --residual required");
    residual = rl::GaussianPolicy::from_checkpoint(nn::load_checkpoint(residual_path));
    residual.bound = config.perp_epsilon();
    bundle.residual = &residual;
  }
  if (kind == evalh::PolicyKind::kPerp) {
    if (dti_path.empty()) throw MissingArtifactError("evaluate: --dti required");
    dti_model = dti::DtiModel::from_checkpoint(nn::load_checkpoint(dti_path));
    bundle.dti = &dti_model;
    bundle.dti_window = dti_model.window;
  }

  auto opt = eval_options(config);
  opt.delta = delta;
  std::unique_ptr<sim::TrajectoryWriter> dump;
  if (!dump_path.empty()) {
    dump = std::make_unique<sim::TrajectoryWriter>(dump_path);
    opt.dump = dump.get();
  }
  const auto res = evalh::evaluate(bundle, env_cfg, idm, opt, iterations, seed,
                                   opt.dump != nullptr ? 1 : config.eval_workers());
  std::printf("evaluate: %s delta %d, %d episodes, avg speed %s m/s, speed std %s, "
              "collisions %d/%d\n",
              policy.c_str(), delta, iterations, fmt(res.mean_avg_speed).c_str(),
              fmt(res.mean_speed_std).c_str(), res.collisions, iterations);
}

void cmd_compare(const cfg::Config& config, std::uint64_t seed,
                 const std::string& out_path) {
  const auto deltas = config.get_int_list("eval.deltas");
  const auto seeds = config.get_int_list("eval.seeds");
  const std::string policies_text = config.get_string("eval.policies");

  std::vector<evalh::PolicyKind> kinds;
  std::size_t pos = 0;
  while (pos < policies_text.size()) {
    auto comma = policies_text.find(',', pos);
    if (comma == std::string::npos) comma = policies_text.size();
    const std::string item = policies_text.substr(pos, comma - pos);
    if (!item.empty()) kinds.push_back(evalh::kind_from_string(item));
    pos = comma + 1;
  }

  const fs::path ckpt_dir = config.checkpoints_dir();
  std::vector<evalh::CompareCell> cells;
  bool any_learned_requested = false;
  for (const auto kind : kinds) {
    for (const int delta : deltas) {
      for (const int s : seeds) {
        evalh::CompareCell cell;
        cell.kind = kind;
        cell.delta = delta;
        cell.seed = s;
        if (kind != evalh::PolicyKind::kIdm && kind != evalh::PolicyKind::kOsl) {
          any_learned_requested = true;
          cell.pcp_path = (ckpt_dir / cfg::pcp_checkpoint_name(delta, s)).string();
        }
        if (kind == evalh::PolicyKind::kVrp || kind == evalh::PolicyKind::kTarp ||
            kind == evalh::PolicyKind::kPerp)
          cell.residual_path =
              (ckpt_dir / cfg::residual_checkpoint_name(evalh::kind_to_string(kind),
                                                        delta, s))
                  .string();
        if (kind == evalh::PolicyKind::kPerp)
          cell.dti_path = (ckpt_dir / cfg::dti_checkpoint_name(delta, s)).string();
        cells.push_back(std::move(cell));
      }
    }
  }

  evalh::CompareOptions opt;
  opt.episodes_per_cell = config.get_int("eval.n_iterations");
  opt.episode = eval_options(config);
  opt.master_seed = seed;
  opt.workers = config.eval_workers();

  const auto result = evalh::compare(cells, config.env(), config.idm(),
                                     config.action_space(), config.perp_epsilon(), opt);
  if (result.data_rows == 0 && any_learned_requested) {
    std::string msg = "compare: no trained checkpoints found; missing artifacts:";
    for (const auto& s : result.skipped) msg += "\n  " + s;
    throw MissingArtifactError(msg);
  }
  evalh::write_text_file(out_path, result.csv);
  std::printf("compare: %d cells -> %s (%zu skipped)\n", result.data_rows,
              out_path.c_str(), result.skipped.size());
}

PipelineOutcome run_pipeline(cfg::Config config, std::uint64_t seed, int delta,
                             const std::string& out_dir, bool all_variants) {
  // Desk-scale presets; explicit user settings win.
  config.set_default_if_untouched("pcp.iterations", "200");
  config.set_default_if_untouched("perp.iterations", "50");
  config.set_default_if_untouched("dti.epochs", "60");
  config.set_default_if_untouched("dti.n_per_trait", "1000");
  config.set_default_if_untouched("eval.n_iterations", "20");
  config.set_default_if_untouched("eval.policies",
                                  all_variants ? "idm,osl,pcp,vrp,tarp,perp"
                                               : "idm,osl,pcp,perp");
  config.set("eval.deltas", std::to_string(delta));
  config.set("eval.seeds", std::to_string(seed));
  config.set("paths.checkpoints", out_dir);
  config.set("paths.datasets", out_dir);
  config.set("paths.reports", out_dir);

  const int iseed = static_cast<int>(seed);
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  const std::string pcp_path = (dir / cfg::pcp_checkpoint_name(delta, iseed)).string();
  const std::string data_path = (dir / cfg::dataset_name(delta, iseed)).string();
  const std::string dti_path = (dir / cfg::dti_checkpoint_name(delta, iseed)).string();
  const std::string report_path =
      (dir / ("report_d" + std::to_string(delta) + "_s" + std::to_string(iseed) + ".csv"))
          .string();

  Rng root(seed);
  PipelineOutcome outcome;

  cmd_train_pcp(config, root.substream("pipeline-pcp").seed(), delta, pcp_path,
                (dir / ("pcp_train_d" + std::to_string(delta) + "_s" +
                        std::to_string(iseed) + ".csv"))
                    .string());
  cmd_collect(config, root.substream("pipeline-collect").seed(), delta, pcp_path,
              data_path);
  cmd_train_dti(config, root.substream("pipeline-dti").seed(), data_path, dti_path,
                (dir / ("dti_train_d" + std::to_string(delta) + "_s" +
                        std::to_string(iseed) + ".csv"))
                    .string());
  cmd_eval_dti(config, dti_path, data_path,
               (dir / ("dti_latent_d" + std::to_string(delta) + "_s" +
                       std::to_string(iseed) + ".csv"))
                   .string());

  std::vector<std::string> variants = {"perp"};
  if (all_variants) {
    variants.push_back("vrp");
    variants.push_back("tarp");
  }
  for (const auto& variant : variants) {
    cmd_train_perp(config, root.substream("pipeline-" + variant).seed(), variant,
                   delta, pcp_path, variant == "perp" ? dti_path : "",
                   (dir / cfg::residual_checkpoint_name(variant, delta, iseed)).string(),
                   (dir / (variant + "_train_d" + std::to_string(delta) + "_s" +
                           std::to_string(iseed) + ".csv"))
                       .string());
  }

  cmd_compare(config, root.substream("pipeline-compare").seed(), report_path);
  outcome.report_path = report_path;
  std::printf("pipeline: done, report at %s\n", report_path.c_str());
  return outcome;
}

}  // namespace advisory::cli
