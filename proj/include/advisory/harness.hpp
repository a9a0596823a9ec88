// Evaluation and comparison: seeded greedy episodes over all policy kinds,
// the paper-style metrics, the ring's optimal uniform speed, and the CSV
// comparison report.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advisory/driver.hpp"
#include "advisory/dti.hpp"
#include "advisory/policy.hpp"
#include "advisory/ring.hpp"

namespace advisory::evalh {

struct EmissionsParams {
  double c0 = 0.1;   // idle burn per vehicle-step
  double c1 = 0.01;  // linear speed term
  double c2 = 0.002; // quadratic speed term
  double c3 = 0.5;   // positive-acceleration term
};

// Sum over vehicles and steps of max(0, c0 + c1 v + c2 v^2 + c3 v max(0, a)).
double emissions_proxy(const std::vector<std::vector<double>>& speeds,
                       const std::vector<std::vector<double>>& accels,
                       const EmissionsParams& p);

struct EpisodeMetrics {
  double avg_speed = 0.0;  // mean over all vehicles and post-warm-up steps
  double speed_std = 0.0;  // per-step cross-vehicle std, averaged over steps
  double emissions = 0.0;
  bool collided = false;
  int trait_label = -1;
};

enum class PolicyKind { kIdm, kOsl, kPcp, kVrp, kTarp, kPerp };
std::string kind_to_string(PolicyKind k);
PolicyKind kind_from_string(const std::string& s);

// Everything an episode needs to turn observations into advised speeds.
struct PolicyBundle {
  PolicyKind kind = PolicyKind::kIdm;
  double osl_speed = 0.0;
  const rl::CategoricalPolicy* pcp = nullptr;
  const rl::GaussianPolicy* residual = nullptr;
  const dti::DtiModel* dti = nullptr;
  rl::SpeedActionSpace space;
  int dti_window = 20;
};

struct EpisodeOptions {
  int delta = 20;
  int warmup = 600;
  int horizon = 4000;
  bool greedy = true;          // argmax base + mean residual
  bool perfect_driver = false; // ego executes the advice exactly
  int pinned_trait = -1;       // -1: sampled uniformly per episode
  EmissionsParams emissions;
  std::vector<double>* advised_trace = nullptr;  // per-step advised speed
  sim::TrajectoryWriter* dump = nullptr;
};

// Residual-policy input assembly shared by training and evaluation:
// (obs, a_pcp/A_max) plus nothing (vrp), a one-hot trait (tarp), or the
// inferred latent (perp).
std::vector<double> residual_input(PolicyKind kind, const sim::EgoObservation& obs,
                                   double pcp_norm, int trait_label,
                                   std::span<const double> z);

EpisodeMetrics run_episode(const PolicyBundle& bundle, const sim::RingConfig& env_cfg,
                           const sim::IdmParams& idm, const EpisodeOptions& opt,
                           std::uint64_t seed);

struct EvaluateResult {
  std::vector<EpisodeMetrics> episodes;
  int collisions = 0;
  int valid = 0;  // non-collided episodes included in the aggregates
  double mean_avg_speed = 0.0;
  double mean_speed_std = 0.0;
  double mean_emissions = 0.0;
};

// Collided episodes are counted but excluded from the speed aggregates.
EvaluateResult evaluate(const PolicyBundle& bundle, const sim::RingConfig& env_cfg,
                        const sim::IdmParams& idm, const EpisodeOptions& opt,
                        int n_iterations, std::uint64_t master_seed, int workers = 1);

// Equilibrium gap on the ring: circumference/n - vehicle_length.
double equilibrium_gap(const sim::RingConfig& cfg);

// Analytic network-optimal uniform speed (the OSL constant).
double optimal_uniform_speed(const sim::RingConfig& cfg, const sim::IdmParams& idm);

struct GridSearchResult {
  double best_speed = 0.0;
  double best_avg = 0.0;
  std::vector<std::pair<double, double>> table;  // candidate -> mean avg speed
};

// Simulated cross-check: perfect driver holds each candidate speed from a
// uniform standstill start; scores the mean speed over the settled half.
GridSearchResult grid_search_constant_speed(const sim::RingConfig& cfg,
                                            const sim::IdmParams& idm, double lo,
                                            double hi, double step, int n_seeds,
                                            int horizon, std::uint64_t master_seed);

struct CompareCell {
  PolicyKind kind;
  int delta;
  int seed;  // training-chain seed
  std::optional<std::string> pcp_path, residual_path, dti_path;
};

struct CompareOptions {
  int episodes_per_cell = 20;
  EpisodeOptions episode;  // delta overridden per cell
  std::uint64_t master_seed = 0;
  int workers = 1;
};

struct CompareResult {
  std::string csv;
  std::vector<std::string> skipped;  // cells dropped for missing artifacts
  int data_rows = 0;
};

// Rows {policy, delta, seed, avg_speed, avg_std, collisions, emissions_proxy}
// ordered by (policy, delta, seed), then per-(policy, delta) mean/std
// summary rows.
CompareResult compare(const std::vector<CompareCell>& cells,
                      const sim::RingConfig& env_cfg, const sim::IdmParams& idm,
                      const rl::SpeedActionSpace& space, double residual_bound,
                      const CompareOptions& opt);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace advisory::evalh
