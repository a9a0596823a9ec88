// Single entry-point binary exposing the full pipeline as subcommands.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advisory/commands.hpp"
#include "advisory/common.hpp"

using namespace advisory;
using namespace advisory::cli;

namespace {

std::string config_key_help() {
  std::string out = "Config keys (CLI flag > config file > built-in default):\n";
  for (const auto& spec : cfg::key_registry()) {
    out += "  " + spec.key;
    out += std::string(spec.key.size() < 26 ? 26 - spec.key.size() : 1, ' ');
    out += "default " + (spec.def.empty() ? std::string("(empty)") : spec.def) + " — " +
           spec.desc + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ring-road co-operative speed advisory stack: microsimulation, "
               "piecewise-constant advisory policies, driver-trait inference and "
               "personalized residual policies."};
  app.require_subcommand(1);
  app.fallthrough();  // global --config/--seed/--set may follow the subcommand
  app.footer(config_key_help());

  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "INI config file")->envname("ADVISORY_CONFIG");
  app.add_option("--seed", seed, "master seed; all runs derive their streams from it");
  app.add_option("--set", sets, "override a config key: section.key=value")
      ->take_all();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run an all-IDM ring simulation");
  int sim_steps = 600;
  std::string sim_dump;
  sim_cmd->add_option("--steps", sim_steps, "number of steps");
  sim_cmd->add_option("--dump", sim_dump, "JSON-lines trajectory dump path");

  // equilibrium
  auto* eq_cmd = app.add_subcommand("equilibrium",
                                    "solve the ring's optimal uniform speed");
  bool eq_cross = false;
  eq_cmd->add_flag("--cross-check", eq_cross, "grid-search the constant speed in simulation");

  // train-pcp
  auto* tp_cmd = app.add_subcommand("train-pcp", "train the piecewise-constant advisory policy");
  int tp_delta = 20;
  int tp_iters = -1;
  std::string tp_out = "artifacts/checkpoints/pcp.json", tp_log;
  tp_cmd->add_option("--delta", tp_delta, "hold length in steps");
  tp_cmd->add_option("--iters", tp_iters, "training iterations (overrides pcp.iterations)");
  tp_cmd->add_option("--out", tp_out, "checkpoint output path");
  tp_cmd->add_option("--log", tp_log, "per-iteration CSV log path");

  // collect-dti-data
  auto* cd_cmd = app.add_subcommand("collect-dti-data",
                                    "collect trait-labelled observation windows");
  int cd_delta = 20, cd_n = -1;
  std::string cd_pcp, cd_out = "artifacts/datasets/dti_data.jsonl";
  cd_cmd->add_option("--pcp", cd_pcp, "trained advisory checkpoint")->required();
  cd_cmd->add_option("--delta", cd_delta, "hold length in steps");
  cd_cmd->add_option("--n-per-trait", cd_n, "windows per trait (overrides dti.n_per_trait)");
  cd_cmd->add_option("--out", cd_out, "dataset JSONL output path");

  // train-dti
  auto* td_cmd = app.add_subcommand("train-dti", "train the trait-inference VAE");
  int td_epochs = -1;
  std::string td_data, td_out = "artifacts/checkpoints/dti.json", td_log;
  td_cmd->add_option("--data", td_data, "dataset JSONL path")->required();
  td_cmd->add_option("--epochs", td_epochs, "training epochs (overrides dti.epochs)");
  td_cmd->add_option("--out", td_out, "checkpoint output path");
  td_cmd->add_option("--log", td_log, "per-epoch CSV log path");

  // eval-dti
  auto* ed_cmd = app.add_subcommand("eval-dti", "evaluate trait-inference quality");
  std::string ed_ckpt, ed_data, ed_scatter;
  ed_cmd->add_option("--checkpoint", ed_ckpt, "VAE checkpoint")->required();
  ed_cmd->add_option("--data", ed_data, "dataset JSONL path")->required();
  ed_cmd->add_option("--scatter", ed_scatter, "latent scatter CSV output (z1,z2,label)");

  // train-perp
  auto* tr_cmd = app.add_subcommand("train-perp", "train a residual policy variant");
  std::string tr_variant = "perp", tr_pcp, tr_dti, tr_out = "artifacts/checkpoints/perp.json", tr_log;
  int tr_delta = 20, tr_iters = -1;
  tr_cmd->add_option("--variant", tr_variant, "perp | vrp | tarp")
      ->check(CLI::IsMember({"perp", "vrp", "tarp"}));
  tr_cmd->add_option("--delta", tr_delta, "hold length in steps");
  tr_cmd->add_option("--iters", tr_iters, "training iterations (overrides perp.iterations)");
  tr_cmd->add_option("--pcp", tr_pcp, "frozen advisory checkpoint")->required();
  tr_cmd->add_option("--dti", tr_dti, "frozen trait-inference checkpoint (perp only)");
  tr_cmd->add_option("--out", tr_out, "checkpoint output path");
  tr_cmd->add_option("--log", tr_log, "per-iteration CSV log path");

  // evaluate
  auto* ev_cmd = app.add_subcommand("evaluate", "evaluate one policy over seeded episodes");
  std::string ev_policy = "pcp", ev_pcp, ev_residual, ev_dti, ev_dump;
  int ev_delta = 20, ev_iters = -1;
  ev_cmd->add_option("--policy", ev_policy, "idm | osl | pcp | vrp | tarp | perp");
  ev_cmd->add_option("--delta", ev_delta, "hold length in steps");
  ev_cmd->add_option("--iterations", ev_iters, "episodes (overrides eval.n_iterations)");
  ev_cmd->add_option("--pcp", ev_pcp, "advisory checkpoint");
  ev_cmd->add_option("--residual", ev_residual, "residual checkpoint");
  ev_cmd->add_option("--dti", ev_dti, "trait-inference checkpoint");
  ev_cmd->add_option("--dump", ev_dump, "JSON-lines trajectory dump (forces 1 worker)");

  // compare
  auto* cp_cmd = app.add_subcommand("compare", "evaluate all configured policies into a CSV report");
  std::string cp_out = "artifacts/reports/report.csv";
  cp_cmd->add_option("--out", cp_out, "report CSV path");

  // pipeline
  auto* pl_cmd = app.add_subcommand("pipeline",
                                    "desk-scale train-pcp -> collect -> train-dti -> train-perp -> compare");
  int pl_delta = 20;
  std::string pl_dir = "artifacts/pipeline";
  bool pl_all = false;
  pl_cmd->add_option("--delta", pl_delta, "hold length in steps");
  pl_cmd->add_option("--out-dir", pl_dir, "artifact output directory");
  pl_cmd->add_flag("--all-variants", pl_all, "also train the vrp/tarp baselines");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg::Config config = cfg::Config::defaults();
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& s : sets) config.set_override(s);

    if (sim_cmd->parsed()) {
      cmd_simulate(config, seed, sim_steps, sim_dump);
    } else if (eq_cmd->parsed()) {
      cmd_equilibrium(config, seed, eq_cross);
    } else if (tp_cmd->parsed()) {
      if (tp_iters >= 0) config.set("pcp.iterations", std::to_string(tp_iters));
      cmd_train_pcp(config, seed, tp_delta, tp_out, tp_log);
    } else if (cd_cmd->parsed()) {
      if (cd_n >= 0) config.set("dti.n_per_trait", std::to_string(cd_n));
      cmd_collect(config, seed, cd_delta, cd_pcp, cd_out);
    } else if (td_cmd->parsed()) {
      if (td_epochs >= 0) config.set("dti.epochs", std::to_string(td_epochs));
      cmd_train_dti(config, seed, td_data, td_out, td_log);
    } else if (ed_cmd->parsed()) {
      cmd_eval_dti(config, ed_ckpt, ed_data, ed_scatter);
    } else if (tr_cmd->parsed()) {
      if (tr_iters >= 0) config.set("perp.iterations", std::to_string(tr_iters));
      cmd_train_perp(config, seed, tr_variant, tr_delta, tr_pcp, tr_dti, tr_out, tr_log);
    } else if (ev_cmd->parsed()) {
      const int iters = ev_iters >= 0 ? ev_iters : config.get_int("eval.n_iterations");
      cmd_evaluate(config, seed, ev_policy, ev_delta, ev_pcp, ev_residual, ev_dti,
                   iters, ev_dump);
    } else if (cp_cmd->parsed()) {
      cmd_compare(config, seed, cp_out);
    } else if (pl_cmd->parsed()) {
      run_pipeline(config, seed, pl_delta, pl_dir, pl_all);
    }
  } catch (const ConfigError& e) {
    log::error(e.what());
    return kExitConfigError;
  } catch (const MissingArtifactError& e) {
    log::error(e.what());
    return kExitMissingArtifact;
  } catch (const NumericError& e) {
    log::error(e.what());
    return kExitNumericFailure;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
  return kExitOk;
}
