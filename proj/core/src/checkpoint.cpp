#include "occur/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace occur {

using nlohmann::json;

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
  const ModelState& m = checkpoint.model;
  json layers = json::array();
  for (const LayerSpec& l : m.layers) {
    layers.push_back({{"fan_in", l.fan_in}, {"fan_out", l.fan_out}, {"activation", std::string(to_string(l.activation))}});
  }
  json doc = {{"format", "occur-checkpoint"},
              {"version", kCheckpointVersion},
              {"layers", layers},
              {"step_count", m.step_count},
              {"params", m.params}};
  if (checkpoint.rng) doc["rng"] = {{"seed", checkpoint.rng->seed()}, {"state", checkpoint.rng->state()}};
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  if (doc.value("format", "") != "occur-checkpoint") throw std::runtime_error("checkpoint: unknown format tag");
  int version = doc.value("version", 0);
  if (version < 1 || version > kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint out;
  try {
    for (const json& l : doc.at("layers")) {
      out.model.layers.push_back({l.at("fan_in").get<std::size_t>(), l.at("fan_out").get<std::size_t>(),
                                  parse_activation(l.at("activation").get<std::string>())});
    }
    out.model.params = doc.at("params").get<std::vector<double>>();
    out.model.step_count = doc.at("step_count").get<std::uint64_t>();
    if (doc.contains("rng")) {
      out.rng = Rng::from_state(doc["rng"].at("seed").get<std::uint64_t>(), doc["rng"].at("state").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  validate_layers(out.model.layers);
  if (out.model.params.size() != parameter_count(out.model.layers)) {
    throw std::runtime_error("checkpoint: parameter count does not match layers");
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(checkpoint);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace occur
