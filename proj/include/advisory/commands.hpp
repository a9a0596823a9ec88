// Subcommand implementations shared by the CLI binary and the acceptance
// suite. Each prints a one-line summary and throws typed errors that the
// CLI maps to exit codes.
#pragma once

#include <cstdint>
#include <string>

#include "advisory/config.hpp"

namespace advisory::cli {

void cmd_simulate(const cfg::Config& config, std::uint64_t seed, int steps,
                  const std::string& dump_path);

void cmd_equilibrium(const cfg::Config& config, std::uint64_t seed, bool cross_check);

void cmd_train_pcp(const cfg::Config& config, std::uint64_t seed, int delta,
                   const std::string& out_path, const std::string& log_path);

void cmd_collect(const cfg::Config& config, std::uint64_t seed, int delta,
                 const std::string& pcp_path, const std::string& out_path);

void cmd_train_dti(const cfg::Config& config, std::uint64_t seed,
                   const std::string& data_path, const std::string& out_path,
                   const std::string& log_path);

void cmd_eval_dti(const cfg::Config& config, const std::string& ckpt_path,
                  const std::string& data_path, const std::string& scatter_path);

void cmd_train_perp(const cfg::Config& config, std::uint64_t seed,
                    const std::string& variant, int delta, const std::string& pcp_path,
                    const std::string& dti_path, const std::string& out_path,
                    const std::string& log_path);

void cmd_evaluate(const cfg::Config& config, std::uint64_t seed,
                  const std::string& policy, int delta, const std::string& pcp_path,
                  const std::string& residual_path, const std::string& dti_path,
                  int iterations, const std::string& dump_path);

void cmd_compare(const cfg::Config& config, std::uint64_t seed,
                 const std::string& out_path);

struct PipelineOutcome {
  std::string report_path;
  double pcp_eval_speed = 0.0;
  double residual_eval_speed = 0.0;
  double dti_accuracy = 0.0;
};

// train-pcp -> collect -> train-dti -> train-perp -> compare, with
// desk-scale presets applied to keys the user did not set explicitly.
PipelineOutcome run_pipeline(cfg::Config config, std::uint64_t seed, int delta,
                             const std::string& out_dir, bool all_variants);

}  // namespace advisory::cli
