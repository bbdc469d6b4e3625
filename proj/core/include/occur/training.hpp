#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/infotheory.hpp"
#include "occur/loss_geometry.hpp"
#include "occur/network.hpp"
#include "occur/transport.hpp"

namespace occur {

/// Which regularized objective a run reports.
///   baseline: L
///   wcl:      L + λ1 W1(S_t, S_t+1)
///   ial:      L + λ1 W1 - λ2 I(Y; Ŷ)
///   gcl:      L + λ1 W1 - λ2 I(Y; Ŷ) + λ3 L_geo(M_t, M_t+1)
enum class LossVariant { baseline, wcl, ial, gcl };

LossVariant parse_loss_variant(std::string_view name);
std::string_view to_string(LossVariant variant);

struct LossConfig {
  LossVariant variant = LossVariant::baseline;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  double lambda3 = 0.1;
  std::size_t bins = 16;
  GroundScale ground = GroundScale::bin_index;
  /// When positive, transitions whose W1 exceeds this are subdivided.
  double max_transition_w1 = 0.0;
  IalConfig ial;
  GeometryConfig geometry;

  bool uses_w1() const noexcept { return variant != LossVariant::baseline; }
  bool uses_mi() const noexcept { return variant == LossVariant::ial || variant == LossVariant::gcl; }
  bool uses_geodesic() const noexcept { return variant == LossVariant::gcl; }

  void validate() const;
};

struct LossBreakdown {
  double data_loss = 0.0;
  double w1 = 0.0;
  double mi = 0.0;
  double l_geo = 0.0;
  double value = 0.0;
};

/// data_loss + λ1·w1 - λ2·mi + λ3·l_geo over the variant's active terms;
/// inactive terms are zeroed in the breakdown.
LossBreakdown composite_loss(double data_loss, double w1, double mi, double l_geo, const LossConfig& cfg);

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  /// Per-stage epoch counts for train_curriculum; overrides `epochs` when set.
  std::vector<std::size_t> stage_epochs;
};

struct StageResult {
  ModelState model;
  std::vector<double> epoch_losses;
};

/// Plain minibatch SGD on one stage. Minibatch order is reshuffled every
/// epoch; each epoch's loss is the sample-weighted mean of the batch losses
/// measured before their updates.
StageResult train_stage(ModelState model, std::span<const Sample> stage, const TrainConfig& cfg, Rng& rng);

struct StageReport {
  std::size_t stage = 0;
  std::size_t size = 0;
  double min_level = 0.0;
  double max_level = 0.0;
  std::vector<double> epoch_losses;
  /// IAL level chosen before the stage and the probe MI that chose it.
  std::optional<double> selected_level;
  std::optional<double> selection_mi;
  std::vector<LevelEvaluation> level_evaluations;
  /// W1(S_t, S_t+1); absent for the last stage.
  std::optional<double> transition_w1;
  /// L_geo(M_t, M_t+1); absent for the last stage or after a failed solve.
  std::optional<double> l_geo;
  std::string l_geo_error;
  LossBreakdown loss;
};

struct TrainReport {
  std::vector<StageReport> stages;
  std::vector<ModelState> snapshots;
  /// Subspace coordinates of each snapshot (GCL runs only).
  std::vector<std::vector<double>> snapshot_coordinates;
  ModelState final_model;
};

/// Extra inputs the regularized variants need.
struct CurriculumContext {
  /// Held-out samples for MI and curvature estimates.
  std::span<const Sample> probe;
  /// Clean images indexed by origin_index, used to re-occlude newly added
  /// samples at the IAL-selected level. Empty disables re-occlusion.
  std::span<const Sample> clean;
  OcclusionStrategy strategy = OcclusionStrategy::areal;
  int border_width = 3;
};

/// Occludes `image` at `level` without letting the achieved fraction exceed `cap`.
DenseArray occlude_capped(const DenseArray& image, double level, double cap, OcclusionStrategy strategy,
                          int border_width, Rng& rng, double* achieved = nullptr);

/// `total` epochs over `stages` stages, remainder going to the later stages.
std::vector<std::size_t> split_epochs(std::size_t total, std::size_t stages);

/// Applies the WCL schedule-shaping rule when max_transition_w1 is set.
CurriculumSchedule shape_schedule(const CurriculumSchedule& schedule, const LossConfig& cfg);

/// Staged curriculum training. For each stage t: (IAL/GCL) pick the
/// occlusion level by probe MI and re-occlude the samples that enter S_t,
/// then train on S_t and snapshot. Transition W1, probe MI and geodesic
/// lengths between consecutive snapshots are assembled afterwards.
TrainReport train_curriculum(ModelState initial, const CurriculumSchedule& schedule, const LossConfig& loss,
                             const TrainConfig& train, Rng& rng, const CurriculumContext& context = {});

}  // namespace occur
