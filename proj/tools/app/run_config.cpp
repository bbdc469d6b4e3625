#include "app/run_config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace occur::app {

namespace fs = std::filesystem;
using nlohmann::json;

Strategy parse_strategy(std::string_view name) {
  if (name == "baseline") return Strategy::baseline;
  if (name == "pros") return Strategy::pros;
  if (name == "pbos") return Strategy::pbos;
  throw std::invalid_argument("strategy must be baseline, pros or pbos, got '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::baseline: return "baseline";
    case Strategy::pros: return "pros";
    case Strategy::pbos: return "pbos";
  }
  return "?";
}

namespace {

void check(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw std::invalid_argument("config key '" + key + "': " + rule);
}

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void RunConfig::validate() const {
  check(image_size >= 8, "image_size", "must be at least 8");
  check(channels == 1 || channels == 3, "channels", "must be 1 or 3");
  check(classes >= 2 && classes <= kGlyphCount, "classes", "must lie in [2, 10]");
  check(samples >= classes, "samples", "must be at least the class count");
  check(noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
  check(position_jitter >= 0.0 && position_jitter <= 0.5, "position_jitter", "must lie in [0, 0.5]");
  check(split.size() == 3, "split", "needs three fractions (train, val, test)");
  for (double f : split) check(f > 0.0 && f < 1.0, "split", "fractions must lie in (0, 1)");
  check(std::abs(split[0] + split[1] + split[2] - 1.0) <= 1e-9, "split", "fractions must sum to 1");
  check(channels == 1 || data_dir.empty(), "channels", "image directories are read as single-channel PGM");

  parse_strategy(strategy);
  parse_loss_variant(variant);
  check(stages >= 1, "stages", "must be >= 1");
  check(is_fraction(max_level), "max_level", "must lie in [0, 1]");
  check(border_width >= 1, "border_width", "must be >= 1");

  check(lambda1 >= 0.0, "lambda1", "must be >= 0");
  check(lambda2 >= 0.0, "lambda2", "must be >= 0");
  check(lambda3 >= 0.0, "lambda3", "must be >= 0");
  check(bins >= 1, "bins", "must be >= 1");
  check(ground == "bin_index" || ground == "fraction", "ground", "must be bin_index or fraction");
  check(max_transition_w1 >= 0.0, "max_transition_w1", "must be >= 0 (0 disables subdivision)");
  check(is_fraction(alpha), "alpha", "must lie in [0, 1]");
  check(!candidate_levels.empty(), "candidate_levels", "must not be empty");
  for (double l : candidate_levels) check(l >= 0.0 && l <= alpha, "candidate_levels", "entries must lie in [0, alpha]");
  check(probe_size >= 1, "probe_size", "must be >= 1");
  parse_metric_kind(metric);
  check(projection_dim >= 1 && projection_dim <= 20, "projection_dim", "must lie in [1, 20]");
  check(beta >= 0.0, "beta", "must be >= 0");
  check(geodesic_steps >= 1, "geodesic_steps", "must be >= 1");

  check(learning_rate >= 0.0, "learning_rate", "must be >= 0");
  check(batch_size >= 1, "batch_size", "must be >= 1");
  for (std::size_t h : hidden) check(h >= 1, "hidden", "layer widths must be >= 1");

  check(is_fraction(eval_level), "eval_level", "must lie in [0, 1]");
  check(eval_strategy == "auto" || eval_strategy == "areal" || eval_strategy == "border", "eval_strategy",
        "must be auto, areal or border");
  check(run_name.find('/') == std::string::npos, "run_name", "must not contain '/'");
}

std::size_t RunConfig::effective_stages() const { return strategy_kind() == Strategy::baseline ? 1 : stages; }

std::size_t RunConfig::effective_delta() const { return strategy_kind() == Strategy::baseline ? 0 : delta; }

OcclusionStrategy RunConfig::train_occlusion() const {
  return strategy_kind() == Strategy::pbos ? OcclusionStrategy::border : OcclusionStrategy::areal;
}

OcclusionStrategy RunConfig::eval_occlusion() const {
  if (eval_strategy == "auto") return train_occlusion();
  return parse_occlusion_strategy(eval_strategy);
}

TaskSpec RunConfig::task() const {
  TaskSpec spec;
  spec.height = spec.width = image_size;
  spec.channels = channels;
  spec.classes = classes;
  spec.samples = samples;
  spec.noise_sigma = noise_sigma;
  spec.position_jitter = position_jitter;
  return spec;
}

LossConfig RunConfig::loss() const {
  LossConfig cfg;
  cfg.variant = parse_loss_variant(variant);
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.lambda3 = lambda3;
  cfg.bins = bins;
  cfg.ground = ground == "fraction" ? GroundScale::occlusion_fraction : GroundScale::bin_index;
  cfg.max_transition_w1 = max_transition_w1;
  cfg.ial.alpha = alpha;
  cfg.ial.candidate_levels = candidate_levels;
  cfg.ial.probe_size = probe_size;
  cfg.geometry.metric = parse_metric_kind(metric);
  cfg.geometry.projection_dim = projection_dim;
  cfg.geometry.beta = beta;
  cfg.geometry.probe_size = probe_size;
  cfg.geometry.projection_seed = seed;
  cfg.geometry.shooting.steps = geodesic_steps;
  return cfg;
}

std::string RunConfig::strategy_label() const {
  std::string label;
  switch (strategy_kind()) {
    case Strategy::baseline: label = "Baseline"; break;
    case Strategy::pros: label = "PROS"; break;
    case Strategy::pbos: label = "PBOS"; break;
  }
  LossVariant v = parse_loss_variant(variant);
  if (v != LossVariant::baseline) {
    std::string name(occur::to_string(v));
    for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    label += "+" + name;
  }
  return label;
}

std::string RunConfig::dataset_label() const {
  if (!data_dir.empty()) {
    fs::path p = fs::path(data_dir).lexically_normal();
    if (!p.has_filename()) p = p.parent_path();
    return p.filename().string();
  }
  return "synthetic-" + std::to_string(classes);
}

std::string RunConfig::default_run_name() const {
  std::string v = variant == "baseline" ? "plain" : variant;
  return strategy + "-" + v + "-seed" + std::to_string(seed);
}

json to_json(const RunConfig& c) {
  return json{
      {"data_dir", c.data_dir},
      {"image_size", c.image_size},
      {"channels", c.channels},
      {"classes", c.classes},
      {"samples", c.samples},
      {"noise_sigma", c.noise_sigma},
      {"position_jitter", c.position_jitter},
      {"split", c.split},
      {"strategy", c.strategy},
      {"variant", c.variant},
      {"stages", c.stages},
      {"delta", c.delta},
      {"max_level", c.max_level},
      {"border_width", c.border_width},
      {"lambda1", c.lambda1},
      {"lambda2", c.lambda2},
      {"lambda3", c.lambda3},
      {"bins", c.bins},
      {"ground", c.ground},
      {"max_transition_w1", c.max_transition_w1},
      {"alpha", c.alpha},
      {"candidate_levels", c.candidate_levels},
      {"probe_size", c.probe_size},
      {"metric", c.metric},
      {"projection_dim", c.projection_dim},
      {"beta", c.beta},
      {"geodesic_steps", c.geodesic_steps},
      {"epochs", c.epochs},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"hidden", c.hidden},
      {"eval_level", c.eval_level},
      {"eval_strategy", c.eval_strategy},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"run_name", c.run_name},
  };
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw std::invalid_argument("expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw std::invalid_argument("expected a string");
    } else {
      if (!it->is_array()) throw std::invalid_argument("expected an array");
    }
    out = it->get<T>();
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what() + ", got " + it->dump());
  }
}

}  // namespace

RunConfig from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig c;
  const json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  read_field(j, "data_dir", c.data_dir);
  read_field(j, "image_size", c.image_size);
  read_field(j, "channels", c.channels);
  read_field(j, "classes", c.classes);
  read_field(j, "samples", c.samples);
  read_field(j, "noise_sigma", c.noise_sigma);
  read_field(j, "position_jitter", c.position_jitter);
  read_field(j, "split", c.split);
  read_field(j, "strategy", c.strategy);
  read_field(j, "variant", c.variant);
  read_field(j, "stages", c.stages);
  read_field(j, "delta", c.delta);
  read_field(j, "max_level", c.max_level);
  read_field(j, "border_width", c.border_width);
  read_field(j, "lambda1", c.lambda1);
  read_field(j, "lambda2", c.lambda2);
  read_field(j, "lambda3", c.lambda3);
  read_field(j, "bins", c.bins);
  read_field(j, "ground", c.ground);
  read_field(j, "max_transition_w1", c.max_transition_w1);
  read_field(j, "alpha", c.alpha);
  read_field(j, "candidate_levels", c.candidate_levels);
  read_field(j, "probe_size", c.probe_size);
  read_field(j, "metric", c.metric);
  read_field(j, "projection_dim", c.projection_dim);
  read_field(j, "beta", c.beta);
  read_field(j, "geodesic_steps", c.geodesic_steps);
  read_field(j, "epochs", c.epochs);
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "hidden", c.hidden);
  read_field(j, "eval_level", c.eval_level);
  read_field(j, "eval_strategy", c.eval_strategy);
  read_field(j, "seed", c.seed);
  read_field(j, "output_dir", c.output_dir);
  read_field(j, "run_name", c.run_name);
  return c;
}

void apply_overrides(json& j, const std::map<std::string, std::string>& overrides) {
  const json defaults = to_json(RunConfig{});
  for (const auto& [key, text] : overrides) {
    auto known = defaults.find(key);
    // string-valued keys take the text verbatim, so run_name=2024 stays a string
    if (known != defaults.end() && known->is_string()) {
      j[key] = text;
      continue;
    }
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    j[key] = value;
  }
}

RunConfig resolve_config(const fs::path& file, const std::map<std::string, std::string>& overrides) {
  json j = json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read config file " + file.string());
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("config file " + file.string() + " is not valid JSON");
  }
  apply_overrides(j, overrides);
  RunConfig cfg = from_json(j);
  cfg.validate();
  if (cfg.strategy_kind() == Strategy::baseline) {
    cfg.stages = 1;
    cfg.delta = 0;
  }
  return cfg;
}

fs::path output_root(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "runs";
}

fs::path create_unique_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  for (int suffix = 1;; ++suffix) {
    fs::path candidate = root / (suffix == 1 ? name : name + "-" + std::to_string(suffix));
    // create_directory reports false when the path already exists
    if (fs::create_directory(candidate)) return candidate;
  }
}

}  // namespace occur::app
