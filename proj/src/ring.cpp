#include "advisory/ring.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "advisory/common.hpp"

namespace advisory::sim {

void RingConfig::validate() const {
  if (n_vehicles < 2) throw ConfigError("env: need at least 2 vehicles");
  if (n_vehicles * vehicle_length >= circumference)
    throw ConfigError("env: vehicles do not fit on the ring");
  if (dt <= 0.0) throw ConfigError("env: dt must be positive");
  if (v_max <= 0.0) throw ConfigError("env: v_max must be positive");
  if (warmup_steps < 0 || horizon_steps < 0)
    throw ConfigError("env: negative step counts");
  if (init_jitter < 0.0) throw ConfigError("env: negative init_jitter");
  // jitter beyond half the slot spacing could reorder vehicles at reset
  const double spacing = circumference / n_vehicles;
  if (init_jitter >= 0.5 * (spacing - vehicle_length))
    throw ConfigError("env: init_jitter too large for the vehicle spacing");
}

void IdmParams::validate() const {
  if (v0 <= 0 || time_headway <= 0 || max_accel <= 0 || comfortable_decel <= 0 ||
      accel_exponent <= 0 || min_gap <= 0)
    throw ConfigError("idm: all parameters must be positive");
  if (accel_noise_std < 0) throw ConfigError("idm: negative accel_noise_std");
}

double idm_accel(double v, double v_leader, double gap, const IdmParams& p) {
  if (gap <= 0.0) throw NumericError("idm_accel: non-positive gap");
  const double s_star = p.min_gap + v * p.time_headway +
                        v * (v - v_leader) /
                            (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
  return p.max_accel *
         (1.0 - std::pow(v / p.v0, p.accel_exponent) - (s_star / gap) * (s_star / gap));
}

double idm_equilibrium_speed(double gap, const IdmParams& p, double tol) {
  const auto f = [&](double v) {
    const double s = (p.min_gap + v * p.time_headway) / gap;
    return 1.0 - std::pow(v / p.v0, p.accel_exponent) - s * s;
  };
  double lo = 0.0, hi = p.v0;
  if (f(lo) <= 0.0)
    throw ConfigError("equilibrium: no root in [0, v0] (gap below standstill spacing)");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TrajectoryWriter::TrajectoryWriter(const std::string& path) : out_(path) {
  if (!out_) throw MissingArtifactError("cannot open trajectory dump: " + path);
}

void TrajectoryWriter::write(long step, const std::vector<double>& positions,
                             const std::vector<double>& speeds, double ego_command,
                             bool collided) {
  nlohmann::json rec = {{"step", step},
                        {"positions", positions},
                        {"speeds", speeds},
                        {"ego_command", ego_command},
                        {"collided", collided}};
  out_ << rec.dump() << "\n";
}

RingEnv::RingEnv(const RingConfig& cfg, const IdmParams& idm)
    : cfg_(cfg), idm_(idm), rng_(0) {
  cfg_.validate();
  idm_.validate();
}

void RingEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed).substream("ring-env");
  const int n = cfg_.n_vehicles;
  const double spacing = cfg_.circumference / n;
  st_.pos.assign(n, 0.0);
  st_.vel.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double p = i * spacing + rng_.uniform(-cfg_.init_jitter, cfg_.init_jitter);
    p = std::fmod(p + cfg_.circumference, cfg_.circumference);
    st_.pos[i] = p;
  }
  st_.step = 0;
  collided_ = false;
  warned_cmd_range_ = false;
  obs_history_.clear();
  obs_history_.push_back(observe_ego());
}

void RingEnv::set_uniform_speed(double v) {
  const double clamped = std::clamp(v, 0.0, cfg_.v_max);
  std::fill(st_.vel.begin(), st_.vel.end(), clamped);
  if (!obs_history_.empty()) obs_history_.back() = observe_ego();
}

double RingEnv::headway(int vehicle) const {
  const int lead = leader_of(vehicle);
  double d = st_.pos[lead] - st_.pos[vehicle];
  if (d <= 0.0) d += cfg_.circumference;
  return d - cfg_.vehicle_length;
}

EgoObservation RingEnv::observe_ego() const {
  const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EgoObservation o;
  o.v_ego_norm = clamp01(st_.vel[RingState::kEgoIndex] / cfg_.v_max);
  o.v_leader_norm = clamp01(st_.vel[leader_of(RingState::kEgoIndex)] / cfg_.v_max);
  o.h_leader_norm = clamp01(headway(RingState::kEgoIndex) / cfg_.h_max());
  return o;
}

std::vector<std::array<double, 3>> RingEnv::recent_observations(int window) const {
  std::vector<std::array<double, 3>> out;
  out.reserve(window);
  const long have = static_cast<long>(obs_history_.size());
  if (have < window)
    log::warn("observation history shorter than window; left-padding with the earliest state");
  for (long k = static_cast<long>(window) - 1; k >= 0; --k) {
    const long idx = std::max<long>(0, have - 1 - k);
    out.push_back(obs_history_[idx].as_array());
  }
  return out;
}

void RingEnv::advance(EgoMode mode, double ego_command) {
  const int n = cfg_.n_vehicles;
  const double dt = cfg_.dt;

  std::vector<double> gap(n), new_v(n);
  for (int i = 0; i < n; ++i) gap[i] = headway(i);

  // Synchronous speed update from the current state. The ego takes the
  // command directly; everyone else (and the ego during all-IDM phases)
  // follows IDM with noise on background vehicles only, acceleration
  // clamped so the next speed stays >= 0.
  for (int i = 0; i < n; ++i) {
    if (i == RingState::kEgoIndex && mode == EgoMode::kCommand) {
      if (ego_command < 0.0 || ego_command > cfg_.v_max) {
        if (!warned_cmd_range_) {
          log::warn("ego speed command outside [0, v_max]; clamping");
          warned_cmd_range_ = true;
        }
        ego_command = std::clamp(ego_command, 0.0, cfg_.v_max);
      }
      new_v[i] = ego_command;
      continue;
    }
    double a = idm_accel(st_.vel[i], st_.vel[leader_of(i)], gap[i], idm_);
    if (i != RingState::kEgoIndex && idm_.accel_noise_std > 0.0)
      a += idm_.accel_noise_std * rng_.normal();
    a = std::max(a, -st_.vel[i] / dt);
    new_v[i] = std::max(0.0, st_.vel[i] + a * dt);
  }

  // Gap floor for IDM vehicles: clip speeds so the next-step gap stays
  // above kGapFloor. Processing order starts at the vehicle behind the ego
  // and walks backwards around the ring, so every vehicle sees its leader's
  // final speed. The ego in IDM mode is floored first against its leader's
  // pre-floor speed (the ring is cyclic; IDM braking makes the difference
  // unobservable in practice).
  if (mode == EgoMode::kIdm) {
    const int ego = RingState::kEgoIndex;
    const double allowed = gap[ego] + new_v[leader_of(ego)] * dt - kGapFloor;
    if (new_v[ego] * dt > allowed) new_v[ego] = std::max(0.0, allowed / dt);
  }
  for (int i = n - 1; i >= 1; --i) {
    const double allowed = gap[i] + new_v[leader_of(i)] * dt - kGapFloor;
    if (new_v[i] * dt > allowed) new_v[i] = std::max(0.0, allowed / dt);
  }

  double ego_gap_after = gap[RingState::kEgoIndex] +
                         (new_v[leader_of(RingState::kEgoIndex)] -
                          new_v[RingState::kEgoIndex]) * dt;

  for (int i = 0; i < n; ++i) {
    double p = st_.pos[i] + new_v[i] * dt;
    if (p >= cfg_.circumference) p -= cfg_.circumference;
    st_.pos[i] = p;
    st_.vel[i] = new_v[i];
  }
  st_.step += 1;

  if (mode == EgoMode::kCommand && ego_gap_after <= 0.0) collided_ = true;
  obs_history_.push_back(observe_ego());
}

void RingEnv::step_idm() { advance(EgoMode::kIdm, 0.0); }

bool RingEnv::step(double ego_speed_command) {
  advance(EgoMode::kCommand, ego_speed_command);
  return collided_;
}

void RingEnv::warmup(int steps) {
  for (int t = 0; t < steps; ++t) step_idm();
}

}  // namespace advisory::sim
