#include "occur/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace occur {

LossVariant parse_loss_variant(std::string_view name) {
  if (name == "baseline" || name == "plain") return LossVariant::baseline;
  if (name == "wcl") return LossVariant::wcl;
  if (name == "ial") return LossVariant::ial;
  if (name == "gcl") return LossVariant::gcl;
  throw std::invalid_argument("unknown loss variant '" + std::string(name) + "'");
}

std::string_view to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::baseline: return "plain";
    case LossVariant::wcl: return "wcl";
    case LossVariant::ial: return "ial";
    case LossVariant::gcl: return "gcl";
  }
  return "?";
}

void LossConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) throw std::invalid_argument("loss weights must be >= 0");
  if (bins == 0) throw std::invalid_argument("histogram bins must be positive");
  if (uses_mi()) ial.validate();
  if (uses_geodesic()) geometry.validate();
}

LossBreakdown composite_loss(double data_loss, double w1, double mi, double l_geo, const LossConfig& cfg) {
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0 || cfg.lambda3 < 0.0) {
    throw std::invalid_argument("composite_loss: loss weights must be >= 0");
  }
  LossBreakdown out;
  out.data_loss = data_loss;
  out.w1 = cfg.uses_w1() ? w1 : 0.0;
  out.mi = cfg.uses_mi() ? mi : 0.0;
  out.l_geo = cfg.uses_geodesic() ? l_geo : 0.0;
  out.value = data_loss + cfg.lambda1 * out.w1 - cfg.lambda2 * out.mi + cfg.lambda3 * out.l_geo;
  return out;
}

StageResult train_stage(ModelState model, std::span<const Sample> stage, const TrainConfig& cfg, Rng& rng) {
  if (stage.empty()) throw std::invalid_argument("train_stage: empty stage");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("train_stage: learning rate must be >= 0");
  if (cfg.batch_size == 0) throw std::invalid_argument("train_stage: batch size must be positive");

  StageResult result;
  std::vector<std::size_t> order(stage.size());
  std::vector<Sample> batch;
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(stage[order[i]]);
      double loss = loss_and_gradient(model, batch, grad);
      total += loss * static_cast<double>(batch.size());
      for (std::size_t p = 0; p < grad.size(); ++p) model.params[p] -= cfg.learning_rate * grad[p];
      ++model.step_count;
    }
    result.epoch_losses.push_back(total / static_cast<double>(stage.size()));
  }
  result.model = std::move(model);
  return result;
}

DenseArray occlude_capped(const DenseArray& image, double level, double cap, OcclusionStrategy strategy,
                          int border_width, Rng& rng, double* achieved) {
  const Shape& shape = image.shape();
  const int h = static_cast<int>(shape.at(0));
  const int w = static_cast<int>(shape.at(1));
  double target = std::min(level, cap);
  for (int attempt = 0;; ++attempt) {
    Mask mask = generate_mask(strategy, h, w, target, rng, border_width);
    double got = occlusion_level(mask);
    if (got <= cap || attempt >= 32 || target <= 0.0) {
      if (got > cap) {
        mask = Mask::ones(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
        got = 0.0;
      }
      if (achieved) *achieved = got;
      return apply_mask(image, mask);
    }
    target = std::max(0.0, target - (got - cap) - 1.0 / static_cast<double>(h * w));
  }
}

std::vector<std::size_t> split_epochs(std::size_t total, std::size_t stages) {
  if (stages == 0) throw std::invalid_argument("split_epochs: stage count must be positive");
  std::vector<std::size_t> out(stages, total / stages);
  for (std::size_t i = 0; i < total % stages; ++i) ++out[stages - 1 - i];
  return out;
}

CurriculumSchedule shape_schedule(const CurriculumSchedule& schedule, const LossConfig& cfg) {
  if (!cfg.uses_w1() || !(cfg.max_transition_w1 > 0.0)) return schedule;
  auto levels_of = [](std::span<const Sample> stage) {
    std::vector<double> levels;
    levels.reserve(stage.size());
    for (const Sample& s : stage) levels.push_back(s.level);
    return levels;
  };
  return subdivide_transitions(
      schedule, cfg.max_transition_w1,
      [&](std::span<const Sample> a, std::span<const Sample> b) {
        return stage_transition_distance(levels_of(a), levels_of(b), cfg.bins, cfg.ground);
      });
}

namespace {

std::vector<double> levels_of(std::span<const Sample> samples) {
  std::vector<double> levels;
  levels.reserve(samples.size());
  for (const Sample& s : samples) levels.push_back(s.level);
  return levels;
}

}  // namespace

TrainReport train_curriculum(ModelState initial, const CurriculumSchedule& schedule, const LossConfig& loss,
                             const TrainConfig& train, Rng& rng, const CurriculumContext& context) {
  loss.validate();
  if (loss.uses_mi() && context.probe.empty()) {
    throw std::invalid_argument("train_curriculum: IAL/GCL variants need a probe set");
  }
  const std::size_t stages = schedule.stages();
  const std::size_t classes = initial.classes();
  if (!train.stage_epochs.empty() && train.stage_epochs.size() != stages) {
    throw std::invalid_argument("train_curriculum: " + std::to_string(train.stage_epochs.size()) +
                                " per-stage epoch counts for " + std::to_string(stages) + " stages");
  }

  std::vector<Sample> working(schedule.ordered().begin(), schedule.ordered().end());
  std::unordered_map<std::size_t, const Sample*> clean_by_origin;
  for (const Sample& s : context.clean) clean_by_origin.emplace(s.origin_index, &s);

  TrainReport report;
  ModelState model = std::move(initial);
  std::size_t previous_size = 0;
  for (std::size_t t = 1; t <= stages; ++t) {
    const std::size_t size = schedule.stage_sizes()[t - 1];
    StageReport stage;
    stage.stage = t;
    stage.size = size;

    if (loss.uses_mi()) {
      Classifier classify = [&model](const DenseArray& x) { return predict_class(model, x); };
      Occluder occlude = [&](const DenseArray& image, double level, Rng& r) {
        return occlude_capped(image, level, loss.ial.alpha, context.strategy, context.border_width, r);
      };
      LevelSelection selection = select_occlusion_level(classify, context.probe, loss.ial, occlude, rng, classes);
      stage.selected_level = selection.level;
      stage.selection_mi = selection.mi;
      stage.level_evaluations = selection.evaluations;

      if (!clean_by_origin.empty()) {
        Rng occlusion_rng = rng.fork();
        for (std::size_t i = previous_size; i < size; ++i) {
          Sample& s = working[i];
          if (s.level_index == 0) continue;
          auto it = clean_by_origin.find(s.origin_index);
          if (it == clean_by_origin.end()) {
            throw std::invalid_argument("train_curriculum: no clean image for origin " +
                                        std::to_string(s.origin_index));
          }
          double achieved = 0.0;
          s.image = occlude_capped(it->second->image, selection.level, loss.ial.alpha, context.strategy,
                                   context.border_width, occlusion_rng, &achieved);
          s.level = achieved;
        }
      }
    }

    std::span<const Sample> subset(working.data(), size);
    TrainConfig stage_cfg = train;
    if (!train.stage_epochs.empty()) stage_cfg.epochs = train.stage_epochs[t - 1];
    StageResult result = train_stage(std::move(model), subset, stage_cfg, rng);
    model = std::move(result.model);
    stage.epoch_losses = std::move(result.epoch_losses);
    auto levels = levels_of(subset);
    stage.min_level = *std::min_element(levels.begin(), levels.end());
    stage.max_level = *std::max_element(levels.begin(), levels.end());
    stage.loss.data_loss = mean_loss(model, subset);

    if (loss.uses_mi()) {
      Classifier classify = [&model](const DenseArray& x) { return predict_class(model, x); };
      Occluder occlude = [&](const DenseArray& image, double level, Rng& r) {
        return occlude_capped(image, level, loss.ial.alpha, context.strategy, context.border_width, r);
      };
      std::span<const Sample> probe = context.probe.first(std::min(context.probe.size(), loss.ial.probe_size));
      stage.loss.mi = probe_mutual_information(classify, probe, *stage.selected_level, occlude, rng.fork(), classes);
    }

    report.snapshots.push_back(model);
    report.stages.push_back(std::move(stage));
    previous_size = size;
  }

  if (loss.uses_w1()) {
    for (std::size_t t = 1; t < stages; ++t) {
      auto now = levels_of(std::span<const Sample>(working.data(), schedule.stage_sizes()[t - 1]));
      auto next = levels_of(std::span<const Sample>(working.data(), schedule.stage_sizes()[t]));
      report.stages[t - 1].transition_w1 = stage_transition_distance(now, next, loss.bins, loss.ground);
    }
  }

  if (loss.uses_geodesic()) {
    const GeometryConfig& geo = loss.geometry;
    HeadSubspace subspace(report.snapshots.front(), geo.projection_dim, geo.projection_seed);
    for (const ModelState& snap : report.snapshots) {
      Vec x = subspace.project(snap);
      report.snapshot_coordinates.emplace_back(x.data(), x.data() + x.size());
    }
    std::span<const Sample> probe = context.probe.first(std::min(context.probe.size(), geo.probe_size));
    for (std::size_t t = 1; t < stages; ++t) {
      const ModelState& next = report.snapshots[t];
      try {
        MetricField metric = geo.metric == MetricKind::identity
                                 ? MetricField::euclidean(geo.projection_dim)
                                 : loss_curvature_metric(next, subspace, probe, geo.beta, geo.shooting.fd_step);
        report.stages[t - 1].l_geo =
            geodesic_distance(subspace.project(report.snapshots[t - 1]), subspace.project(next), metric, geo.shooting);
      } catch (const std::exception& e) {
        report.stages[t - 1].l_geo_error = e.what();
      }
    }
  }

  for (StageReport& stage : report.stages) {
    stage.loss = composite_loss(stage.loss.data_loss, stage.transition_w1.value_or(0.0), stage.loss.mi,
                                stage.l_geo.value_or(0.0), loss);
  }
  report.final_model = std::move(model);
  return report;
}

}  // namespace occur
