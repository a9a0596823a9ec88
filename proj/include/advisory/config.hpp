// Layered run configuration: built-in defaults, an INI-style config file,
// then CLI overrides, with unknown keys rejected by full path.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "advisory/dti.hpp"
#include "advisory/harness.hpp"
#include "advisory/ppo.hpp"
#include "advisory/ring.hpp"

namespace advisory::cfg {

struct KeySpec {
  std::string key;   // "section.name"
  std::string def;   // default value as text
  std::string desc;  // one-line description for --help
};

const std::vector<KeySpec>& key_registry();

class Config {
 public:
  static Config defaults();

  // INI file: [section] headers, key = value lines, '#'/';' comments.
  void load_file(const std::string& path);
  // "section.key=value" (CLI --set and flag shims).
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool is_explicit(const std::string& key) const { return explicit_.count(key) > 0; }
  // Applies a value only when the user did not set the key (pipeline
  // desk-scale presets).
  void set_default_if_untouched(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // typed module bundles
  sim::RingConfig env() const;
  sim::IdmParams idm() const;
  rl::SpeedActionSpace action_space() const;
  rl::PgTrainConfig pcp_train() const;
  rl::PgTrainConfig perp_train() const;
  double perp_epsilon() const;
  double perp_init_log_std() const;
  dti::DtiConfig dti() const;
  evalh::EmissionsParams emissions() const;
  int pinned_trait() const;  // -1 when the trait is sampled per episode
  std::string checkpoints_dir() const;
  std::string datasets_dir() const;
  std::string reports_dir() const;
  int eval_workers() const;  // resolved (0 = auto -> hardware)

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

// Conventional artifact names used by the CLI and the pipeline.
std::string pcp_checkpoint_name(int delta, int seed);
std::string residual_checkpoint_name(const std::string& variant, int delta, int seed);
std::string dti_checkpoint_name(int delta, int seed);
std::string dataset_name(int delta, int seed);

}  // namespace advisory::cfg
