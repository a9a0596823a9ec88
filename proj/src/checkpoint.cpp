#include "advisory/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "advisory/common.hpp"

namespace advisory::nn {

using nlohmann::json;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json specs = json::array();
  for (const auto& s : ckpt.layer_specs) {
    specs.push_back({{"kind", s.kind},
                     {"in", s.in},
                     {"out", s.out},
                     {"activation", s.activation}});
  }
  json tensors = json::object();
  for (const auto& [name, t] : ckpt.tensors) {
    tensors[name] = {{"shape", t.shape}, {"values", t.values}};
  }
  const json doc = {{"format_version", ckpt.format_version},
                    {"network_kind", ckpt.network_kind},
                    {"layer_specs", specs},
                    {"tensors", tensors}};
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw MissingArtifactError("cannot write checkpoint: " + path);
  out << doc.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("checkpoint not found: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint '" + path + "': invalid JSON: " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.format_version = doc.at("format_version").get<int>();
    if (ckpt.format_version != 1)
      throw ConfigError("checkpoint '" + path + "': unsupported format_version " +
                        std::to_string(ckpt.format_version));
    ckpt.network_kind = doc.at("network_kind").get<std::string>();
    for (const auto& s : doc.at("layer_specs")) {
      LayerSpec spec;
      spec.kind = s.at("kind").get<std::string>();
      spec.in = s.at("in").get<std::size_t>();
      spec.out = s.at("out").get<std::size_t>();
      spec.activation = s.at("activation").get<std::string>();
      ckpt.layer_specs.push_back(spec);
    }
    for (const auto& [name, t] : doc.at("tensors").items()) {
      Tensor tensor;
      tensor.shape = t.at("shape").get<std::vector<std::size_t>>();
      tensor.values = t.at("values").get<std::vector<double>>();
      tensor.check(name);
      ckpt.tensors[name] = std::move(tensor);
    }
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint '" + path + "': schema violation: " + e.what());
  }
  return ckpt;
}

}  // namespace advisory::nn
