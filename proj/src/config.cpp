#include "advisory/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "advisory/common.hpp"
#include "advisory/driver.hpp"

namespace advisory::cfg {

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> registry = {
      {"env.circumference", "640", "ring circumference in meters"},
      {"env.n_vehicles", "40", "number of vehicles on the ring"},
      {"env.vehicle_length", "5", "vehicle length in meters"},
      {"env.dt", "0.1", "simulation step in seconds"},
      {"env.v_max", "35", "maximum speed / advisory A_max in m/s"},
      {"env.warmup_steps", "600", "default all-IDM warm-up steps"},
      {"env.horizon_steps", "4000", "default episode horizon in steps"},
      {"env.init_jitter", "2", "+- positional jitter at reset in meters"},

      {"idm.v0", "30", "IDM desired speed in m/s"},
      {"idm.time_headway", "0.5", "IDM time headway in seconds"},
      {"idm.max_accel", "1", "IDM max acceleration in m/s^2"},
      {"idm.comfortable_decel", "1.5", "IDM comfortable deceleration in m/s^2"},
      {"idm.accel_exponent", "4", "IDM acceleration exponent"},
      {"idm.min_gap", "6.5", "IDM standstill minimum gap s0 in meters"},
      {"idm.accel_noise_std", "0.2", "acceleration noise std for background vehicles"},

      {"driver.trait", "", "pin the driver trait mean (-5|-2.5|0|2.5|5); empty = sampled"},

      {"pcp.alpha", "18", "number of discrete advisory speeds"},
      {"pcp.iterations", "1000", "advisory policy training iterations"},
      {"pcp.warmup", "1000", "advisory training warm-up steps"},
      {"pcp.horizon", "2000", "advisory training horizon steps"},
      {"pcp.gamma", "0.99", "discount per decision step"},
      {"pcp.learning_rate", "0.0001", "optimizer learning rate"},
      {"pcp.gae_lambda", "0.95", "advantage-estimation lambda"},
      {"pcp.clip_ratio", "0.2", "surrogate clip ratio"},
      {"pcp.epochs_per_batch", "10", "gradient epochs per rollout batch"},
      {"pcp.episodes_per_iter", "4", "episodes collected per iteration"},
      {"pcp.entropy_coef", "0.01", "entropy bonus coefficient"},
      {"pcp.eval_episodes", "2", "greedy evaluation episodes per iteration"},

      {"dti.window", "20", "trait-inference observation window T"},
      {"dti.latent_dim", "2", "latent dimension l"},
      {"dti.hidden_size", "32", "LSTM hidden/cell size"},
      {"dti.beta_recon", "1", "reconstruction loss weight"},
      {"dti.beta_kl", "0.0001", "KL loss weight"},
      {"dti.learning_rate", "0.0001", "optimizer learning rate"},
      {"dti.batch_size", "16", "minibatch size"},
      {"dti.epochs", "100", "training epochs"},
      {"dti.train_split", "0.8", "train fraction of the dataset"},
      {"dti.n_per_trait", "7350", "collected windows per trait"},
      {"dti.collect_warmup", "600", "collection warm-up steps"},
      {"dti.collect_horizon", "1000", "collection horizon steps per episode"},

      {"perp.epsilon", "6", "residual action bound in m/s"},
      {"perp.iterations", "200", "residual policy training iterations"},
      {"perp.warmup", "600", "residual training warm-up steps"},
      {"perp.horizon", "4000", "residual training horizon steps"},
      {"perp.gamma", "0.99", "discount per decision step"},
      {"perp.learning_rate", "0.0001", "optimizer learning rate"},
      {"perp.gae_lambda", "0.95", "advantage-estimation lambda"},
      {"perp.clip_ratio", "0.2", "surrogate clip ratio"},
      {"perp.epochs_per_batch", "10", "gradient epochs per rollout batch"},
      {"perp.episodes_per_iter", "4", "episodes collected per iteration"},
      {"perp.entropy_coef", "0.01", "entropy bonus coefficient"},
      {"perp.eval_episodes", "2", "greedy evaluation episodes per iteration"},
      {"perp.init_log_std", "-0.5", "initial residual log-std (pre-squash)"},

      {"eval.n_iterations", "100", "evaluation episodes per (policy, delta, seed)"},
      {"eval.warmup", "600", "evaluation warm-up steps"},
      {"eval.horizon", "4000", "evaluation horizon steps"},
      {"eval.deltas", "10,20,50,100", "hold lengths compared by `compare`"},
      {"eval.seeds", "0,1,2", "training-chain seeds compared by `compare`"},
      {"eval.policies", "idm,osl,pcp,vrp,tarp,perp", "policy kinds compared"},
      {"eval.workers", "0", "parallel evaluation workers (0 = all cores)"},
      {"eval.emissions_c0", "0.1", "emissions proxy constant term"},
      {"eval.emissions_c1", "0.01", "emissions proxy linear speed term"},
      {"eval.emissions_c2", "0.002", "emissions proxy quadratic speed term"},
      {"eval.emissions_c3", "0.5", "emissions proxy speed*accel term"},

      {"paths.checkpoints", "artifacts/checkpoints", "checkpoint directory"},
      {"paths.datasets", "artifacts/datasets", "dataset directory"},
      {"paths.reports", "artifacts/reports", "report directory"},
  };
  return registry;
}

namespace {

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : key_registry())
    if (spec.key == key) return &spec;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& spec : key_registry()) c.values_[spec.key] = spec.def;
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr)
    throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
  explicit_.insert(key);
}

void Config::set_default_if_untouched(const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr)
    throw ConfigError("unknown config key '" + key + "'");
  if (!is_explicit(key)) values_[key] = value;
}

void Config::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like section.key=value, got '" +
                      assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("config file not found: " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (find_key(key) == nullptr)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    values_[key] = value;
    explicit_.insert(key);
  }
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return x;
}

int Config::get_int(const std::string& key) const {
  const double x = get_double(key);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config key '" + key + "': expected an integer");
  return i;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const std::string item = trim(v.substr(pos, comma - pos));
    if (!item.empty()) {
      char* end = nullptr;
      const long x = std::strtol(item.c_str(), &end, 10);
      if (end == item.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': bad list item '" + item + "'");
      out.push_back(static_cast<int>(x));
    }
    pos = comma + 1;
  }
  return out;
}

sim::RingConfig Config::env() const {
  sim::RingConfig c;
  c.circumference = get_double("env.circumference");
  c.n_vehicles = get_int("env.n_vehicles");
  c.vehicle_length = get_double("env.vehicle_length");
  c.dt = get_double("env.dt");
  c.v_max = get_double("env.v_max");
  c.warmup_steps = get_int("env.warmup_steps");
  c.horizon_steps = get_int("env.horizon_steps");
  c.init_jitter = get_double("env.init_jitter");
  c.validate();
  return c;
}

sim::IdmParams Config::idm() const {
  sim::IdmParams p;
  p.v0 = get_double("idm.v0");
  p.time_headway = get_double("idm.time_headway");
  p.max_accel = get_double("idm.max_accel");
  p.comfortable_decel = get_double("idm.comfortable_decel");
  p.accel_exponent = get_double("idm.accel_exponent");
  p.min_gap = get_double("idm.min_gap");
  p.accel_noise_std = get_double("idm.accel_noise_std");
  p.validate();
  return p;
}

rl::SpeedActionSpace Config::action_space() const {
  rl::SpeedActionSpace s;
  s.count = get_int("pcp.alpha");
  s.max_speed = get_double("env.v_max");
  s.validate();
  return s;
}

namespace {
rl::PgTrainConfig train_section(const Config& c, const std::string& sec) {
  rl::PgTrainConfig t;
  t.iterations = c.get_int(sec + ".iterations");
  t.warmup = c.get_int(sec + ".warmup");
  t.horizon = c.get_int(sec + ".horizon");
  t.gamma = c.get_double(sec + ".gamma");
  t.learning_rate = c.get_double(sec + ".learning_rate");
  t.gae_lambda = c.get_double(sec + ".gae_lambda");
  t.clip_ratio = c.get_double(sec + ".clip_ratio");
  t.epochs_per_batch = c.get_int(sec + ".epochs_per_batch");
  t.episodes_per_iter = c.get_int(sec + ".episodes_per_iter");
  t.entropy_coef = c.get_double(sec + ".entropy_coef");
  t.eval_episodes = c.get_int(sec + ".eval_episodes");
  t.validate();
  return t;
}
}  // namespace

rl::PgTrainConfig Config::pcp_train() const { return train_section(*this, "pcp"); }
rl::PgTrainConfig Config::perp_train() const { return train_section(*this, "perp"); }

double Config::perp_epsilon() const { return get_double("perp.epsilon"); }
double Config::perp_init_log_std() const { return get_double("perp.init_log_std"); }

dti::DtiConfig Config::dti() const {
  dti::DtiConfig d;
  d.window = get_int("dti.window");
  d.latent_dim = get_int("dti.latent_dim");
  d.hidden_size = get_int("dti.hidden_size");
  d.beta_recon = get_double("dti.beta_recon");
  d.beta_kl = get_double("dti.beta_kl");
  d.learning_rate = get_double("dti.learning_rate");
  d.batch_size = get_int("dti.batch_size");
  d.epochs = get_int("dti.epochs");
  d.train_split = get_double("dti.train_split");
  d.n_per_trait = get_int("dti.n_per_trait");
  d.collect_warmup = get_int("dti.collect_warmup");
  d.collect_horizon = get_int("dti.collect_horizon");
  d.validate();
  return d;
}

evalh::EmissionsParams Config::emissions() const {
  evalh::EmissionsParams p;
  p.c0 = get_double("eval.emissions_c0");
  p.c1 = get_double("eval.emissions_c1");
  p.c2 = get_double("eval.emissions_c2");
  p.c3 = get_double("eval.emissions_c3");
  return p;
}

int Config::pinned_trait() const {
  const std::string v = get_string("driver.trait");
  if (v.empty()) return -1;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("driver.trait: expected a trait mean, got '" + v + "'");
  return sim::trait_from_value(x).label;
}

std::string Config::checkpoints_dir() const { return get_string("paths.checkpoints"); }
std::string Config::datasets_dir() const { return get_string("paths.datasets"); }
std::string Config::reports_dir() const { return get_string("paths.reports"); }

int Config::eval_workers() const {
  const int w = get_int("eval.workers");
  if (w < 0) throw ConfigError("eval.workers must be >= 0");
  if (w > 0) return w;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string pcp_checkpoint_name(int delta, int seed) {
  return "pcp_d" + std::to_string(delta) + "_s" + std::to_string(seed) + ".json";
}
std::string residual_checkpoint_name(const std::string& variant, int delta, int seed) {
  return variant + "_d" + std::to_string(delta) + "_s" + std::to_string(seed) + ".json";
}
std::string dti_checkpoint_name(int delta, int seed) {
  return "dti_d" + std::to_string(delta) + "_s" + std::to_string(seed) + ".json";
}
std::string dataset_name(int delta, int seed) {
  return "dti_data_d" + std::to_string(delta) + "_s" + std::to_string(seed) + ".jsonl";
}

}  // namespace advisory::cfg
