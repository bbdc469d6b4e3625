#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "occur/datasets.hpp"
#include "occur/training.hpp"

namespace occur::app {

enum class Strategy { baseline, pros, pbos };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

/// Every knob of one experiment. Stored on disk as a flat JSON object whose
/// keys are the field names below; see docs/config.md.
struct RunConfig {
  // data
  std::string data_dir;
  std::size_t image_size = 32;
  std::size_t channels = 1;
  std::size_t classes = 4;
  std::size_t samples = 400;
  double noise_sigma = 0.1;
  double position_jitter = 0.0625;
  std::vector<double> split{0.8, 0.1, 0.1};

  // curriculum
  std::string strategy = "pros";
  std::string variant = "plain";
  std::size_t stages = 3;
  std::size_t delta = 2;
  double max_level = 0.5;
  int border_width = 3;

  // regularizers
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  double lambda3 = 0.1;
  std::size_t bins = 16;
  std::string ground = "bin_index";
  double max_transition_w1 = 0.0;
  double alpha = 0.4;
  std::vector<double> candidate_levels{0.0, 0.1, 0.2, 0.3, 0.4};
  std::size_t probe_size = 40;
  std::string metric = "loss";
  std::size_t projection_dim = 4;
  double beta = 1.0;
  std::size_t geodesic_steps = 20;

  // optimisation
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::vector<std::size_t> hidden{64, 32};

  // evaluation
  double eval_level = 0.3;
  std::string eval_strategy = "auto";

  std::uint64_t seed = 1;
  std::string output_dir;
  std::string run_name;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  Strategy strategy_kind() const { return parse_strategy(strategy); }
  /// Stage count actually used: 1 for the baseline strategy.
  std::size_t effective_stages() const;
  /// Occlusion tiers actually used: 0 for the baseline strategy.
  std::size_t effective_delta() const;
  OcclusionStrategy train_occlusion() const;
  OcclusionStrategy eval_occlusion() const;

  TaskSpec task() const;
  LossConfig loss() const;

  /// "PROS+WCL", "Baseline", ...
  std::string strategy_label() const;
  std::string dataset_label() const;
  std::string default_run_name() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys and wrongly typed values are errors.
RunConfig from_json(const nlohmann::json& j);

/// Overrides applied on top of a file: each value is parsed as JSON when it
/// parses, otherwise taken as a string.
void apply_overrides(nlohmann::json& j, const std::map<std::string, std::string>& overrides);

/// File (optional) + overrides -> validated config.
RunConfig resolve_config(const std::filesystem::path& file, const std::map<std::string, std::string>& overrides);

inline constexpr const char* kOutputRootEnv = "OCCUR_OUTPUT_ROOT";

/// output_dir when set, else $OCCUR_OUTPUT_ROOT, else ./runs.
std::filesystem::path output_root(const RunConfig& cfg);

/// Creates root/name, or root/name-2, root/name-3, ... if taken.
std::filesystem::path create_unique_dir(const std::filesystem::path& root, const std::string& name);

}  // namespace occur::app
