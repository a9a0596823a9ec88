// Single-lane circular-track microsimulation: ring wraparound kinematics,
// IDM-controlled background vehicles, direct speed control of the ego.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "advisory/rng.hpp"

namespace advisory::sim {

struct RingConfig {
  double circumference = 640.0;  // meters
  int n_vehicles = 40;
  double vehicle_length = 5.0;  // meters
  double dt = 0.1;              // seconds
  double v_max = 35.0;          // m/s, also the advisory A_max
  int warmup_steps = 600;
  int horizon_steps = 4000;
  double init_jitter = 2.0;  // +- meters of positional jitter at reset

  double h_max() const { return circumference - vehicle_length; }
  void validate() const;
};

// Defaults are tuned so the default ring is string-unstable enough to grow
// visible stop-and-go waves within a 600-step warm-up while keeping the
// uniform-flow equilibrium near 9 m/s (s0 + v_eq*T ~ 11 m, the ring's
// equilibrium gap).
struct IdmParams {
  double v0 = 30.0;               // desired speed, m/s
  double time_headway = 0.5;      // s
  double max_accel = 1.0;         // m/s^2
  double comfortable_decel = 1.5; // m/s^2
  double accel_exponent = 4.0;
  double min_gap = 6.5;           // s0, meters
  double accel_noise_std = 0.2;   // m/s^2, background vehicles only

  void validate() const;
};

// Deterministic IDM acceleration (no noise, no speed clamping).
// Requires gap > 0; the caller flags collisions before calling.
double idm_accel(double v, double v_leader, double gap, const IdmParams& p);

// Equilibrium speed for a given bumper-to-bumper gap: the root of
// 1 - (v/v0)^exponent - ((s0 + v*T)/gap)^2, found by bisection on [0, v0].
double idm_equilibrium_speed(double gap, const IdmParams& p, double tol = 1e-6);

struct EgoObservation {
  double v_ego_norm = 0.0;
  double v_leader_norm = 0.0;
  double h_leader_norm = 0.0;

  std::array<double, 3> as_array() const {
    return {v_ego_norm, v_leader_norm, h_leader_norm};
  }
};

struct RingState {
  std::vector<double> pos;  // [0, circumference)
  std::vector<double> vel;  // >= 0
  long step = 0;
  static constexpr int kEgoIndex = 0;
};

// JSON-lines trajectory dump: one record per step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::string& path);
  void write(long step, const std::vector<double>& positions,
             const std::vector<double>& speeds, double ego_command, bool collided);

 private:
  std::ofstream out_;
};

class RingEnv {
 public:
  RingEnv(const RingConfig& cfg, const IdmParams& idm);

  // Evenly spaced vehicles with seeded jitter, all speeds zero.
  void reset(std::uint64_t seed);

  // Overwrites every vehicle's speed (clamped to [0, v_max]); used to start
  // episodes in a moving state.
  void set_uniform_speed(double v);

  // One step with every vehicle (incl. the ego) under IDM. Gap floors keep
  // all vehicles behind their leaders; cannot collide.
  void step_idm();

  // One step with the ego speed set to the command (clamped to [0, v_max],
  // warning on out-of-range). Background vehicles follow IDM. Returns true
  // iff the ego bumper-to-bumper gap closed to <= 0.
  bool step(double ego_speed_command);

  // All-IDM warm-up phase; observation history keeps accumulating.
  void warmup(int steps);

  const RingState& state() const { return st_; }
  const RingConfig& config() const { return cfg_; }
  const IdmParams& idm() const { return idm_; }

  // Bumper-to-bumper gap to the immediate leader (ring order is fixed:
  // the leader of i is (i+1) % n).
  double headway(int vehicle) const;
  int leader_of(int vehicle) const { return (vehicle + 1) % cfg_.n_vehicles; }

  EgoObservation observe_ego() const;
  bool collided() const { return collided_; }

  // One observation per state visited so far (reset + every step).
  const std::vector<EgoObservation>& obs_history() const { return obs_history_; }

  // Most recent `window` observations, left-padded with the earliest
  // available when history is shorter (flagged via a log warning).
  std::vector<std::array<double, 3>> recent_observations(int window) const;

 private:
  enum class EgoMode { kIdm, kCommand };
  void advance(EgoMode mode, double ego_command);

  RingConfig cfg_;
  IdmParams idm_;
  RingState st_;
  Rng rng_;
  bool collided_ = false;
  bool warned_cmd_range_ = false;
  std::vector<EgoObservation> obs_history_;

  static constexpr double kGapFloor = 0.01;  // meters, IDM vehicles only
};

}  // namespace advisory::sim
