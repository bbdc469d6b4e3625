#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "app/run_config.hpp"
#include "json.hpp"
#include "occur/checkpoint.hpp"
#include "occur/metrics.hpp"

namespace occur::app {

/// Independent generators forked from the run seed in a fixed order, so a
/// change in one stage of the pipeline never shifts another stage's draws.
struct SeedStreams {
  Rng data;
  Rng split;
  Rng expand;
  Rng train;
  Rng eval;
  std::uint64_t init_seed = 0;
};

SeedStreams seed_streams(std::uint64_t seed);

struct PreparedData {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
  NormalizationParams normalization;
  bool degenerate = false;
  /// Training samples with every occlusion tier.
  std::vector<Sample> expanded;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// synthesize or load -> split -> normalize (train statistics) -> expand levels.
PreparedData prepare_data(const RunConfig& cfg, SeedStreams& streams);

/// Ordered schedule after the optional W1 subdivision.
CurriculumSchedule build_schedule(const RunConfig& cfg, const PreparedData& data);

ModelState initial_model(const RunConfig& cfg, const PreparedData& data, std::uint64_t seed);

/// Test images occluded at eval_level with the evaluation mask family.
std::vector<Sample> occlude_test(const RunConfig& cfg, const PreparedData& data, Rng& rng);

struct Evaluation {
  MetricsReport clean;
  std::optional<MetricsReport> occluded;
};

Evaluation evaluate_model(const RunConfig& cfg, const ModelState& model, const PreparedData& data, Rng& eval_rng);

struct TrainOutcome {
  CurriculumSchedule schedule;
  TrainReport report;
  Evaluation evaluation;
  Rng final_rng;
};

/// The full training pipeline; progress lines go to `log`.
TrainOutcome run_training(const RunConfig& cfg, std::ostream& log);

nlohmann::json schedule_json(const RunConfig& cfg, const CurriculumSchedule& schedule);
nlohmann::json train_report_json(const RunConfig& cfg, const TrainOutcome& outcome);
nlohmann::json metrics_json(const MetricsReport& report);
/// Header plus the clean row and, when present, the occluded row.
std::string metrics_csv(const RunConfig& cfg, const Evaluation& evaluation);
std::string occluded_dataset_label(const RunConfig& cfg);

}  // namespace occur::app
