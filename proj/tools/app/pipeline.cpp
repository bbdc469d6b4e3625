#include "app/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace occur::app {

using nlohmann::json;

SeedStreams seed_streams(std::uint64_t seed) {
  Rng master(seed);
  SeedStreams s{master.fork(), master.fork(), master.fork(), master.fork(), master.fork(), 0};
  s.init_seed = master.next_u64();
  return s;
}

PreparedData prepare_data(const RunConfig& cfg, SeedStreams& streams) {
  LabeledDataset full = cfg.data_dir.empty() ? generate_synthetic(cfg.task(), streams.data)
                                             : load_directory(cfg.data_dir, cfg.image_size, cfg.image_size);
  DatasetSplit parts = split(full, {cfg.split[0], cfg.split[1], cfg.split[2]}, streams.split);

  PreparedData out;
  NormalizedDataset fitted = normalize(parts.train);
  out.train = std::move(fitted.data);
  out.normalization = fitted.params;
  out.degenerate = fitted.degenerate;
  out.val = apply_normalization(parts.val, out.normalization);
  out.test = apply_normalization(parts.test, out.normalization);
  out.height = out.train.samples.front().image.shape()[0];
  out.width = out.train.samples.front().image.shape()[1];

  const std::size_t delta = cfg.effective_delta();
  out.expanded = expand_levels(out.train.samples, delta, linear_levels(delta, cfg.max_level), cfg.train_occlusion(),
                               streams.expand, cfg.border_width);
  return out;
}

CurriculumSchedule build_schedule(const RunConfig& cfg, const PreparedData& data) {
  return shape_schedule(make_schedule(data.expanded, cfg.effective_stages()), cfg.loss());
}

ModelState initial_model(const RunConfig& cfg, const PreparedData& data, std::uint64_t seed) {
  const std::size_t inputs = data.train.samples.front().image.size();
  return init_model(classifier_layers(inputs, cfg.hidden, data.train.classes()), seed);
}

std::vector<Sample> occlude_test(const RunConfig& cfg, const PreparedData& data, Rng& rng) {
  std::vector<Sample> out = data.test.samples;
  for (Sample& s : out) {
    Mask m = generate_mask(cfg.eval_occlusion(), static_cast<int>(data.height), static_cast<int>(data.width),
                           cfg.eval_level, rng, cfg.border_width);
    s.image = apply_mask(s.image, m);
    s.level = occlusion_level(m);
  }
  return out;
}

Evaluation evaluate_model(const RunConfig& cfg, const ModelState& model, const PreparedData& data, Rng& eval_rng) {
  Evaluation ev;
  ev.clean = report(model, data.test.samples);
  if (cfg.eval_level > 0.0) ev.occluded = report(model, occlude_test(cfg, data, eval_rng));
  return ev;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  SeedStreams streams = seed_streams(cfg.seed);
  PreparedData data = prepare_data(cfg, streams);
  log << "data: train=" << data.train.samples.size() << " val=" << data.val.samples.size()
      << " test=" << data.test.samples.size() << " expanded=" << data.expanded.size() << " classes="
      << data.train.classes() << "\n";
  if (data.degenerate) log << "warning: training images are constant; normalized to zeros\n";

  CurriculumSchedule schedule = build_schedule(cfg, data);
  log << "schedule: stages=" << schedule.stages() << " sizes=";
  for (std::size_t n : schedule.stage_sizes()) log << n << ' ';
  log << "\n";

  LossConfig loss = cfg.loss();
  TrainConfig train;
  train.learning_rate = cfg.learning_rate;
  train.batch_size = cfg.batch_size;
  train.stage_epochs = split_epochs(cfg.epochs, schedule.stages());

  CurriculumContext ctx;
  ctx.probe = data.val.samples;
  ctx.clean = data.train.samples;
  ctx.strategy = cfg.train_occlusion();
  ctx.border_width = cfg.border_width;

  Rng train_rng = streams.train;
  TrainReport rep = train_curriculum(initial_model(cfg, data, streams.init_seed), schedule, loss, train, train_rng, ctx);
  for (const StageReport& s : rep.stages) {
    log << "stage " << s.stage << ": size=" << s.size << " levels=[" << fmt("%.4f", s.min_level) << ", "
        << fmt("%.4f", s.max_level) << "] data_loss=" << fmt("%.6f", s.loss.data_loss);
    if (s.selected_level) log << " selected_level=" << fmt("%.4f", *s.selected_level) << " alpha=" << cfg.alpha;
    if (s.transition_w1) log << " w1_next=" << fmt("%.6f", *s.transition_w1);
    if (s.l_geo) log << " l_geo=" << fmt("%.6f", *s.l_geo);
    if (!s.l_geo_error.empty()) log << " l_geo_error=\"" << s.l_geo_error << "\"";
    log << " loss=" << fmt("%.6f", s.loss.value) << "\n";
  }

  Evaluation ev = evaluate_model(cfg, rep.final_model, data, streams.eval);
  log << "test: accuracy=" << fmt("%.2f", ev.clean.accuracy);
  if (ev.occluded) log << " occluded_accuracy=" << fmt("%.2f", ev.occluded->accuracy);
  log << "\n";
  log << "elapsed_seconds=" << fmt("%.3f", seconds_since(start)) << "\n";
  return TrainOutcome{std::move(schedule), std::move(rep), std::move(ev), train_rng};
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json schedule_json(const RunConfig& cfg, const CurriculumSchedule& schedule) {
  LossConfig loss = cfg.loss();
  json stages = json::array();
  for (std::size_t t = 1; t <= schedule.stages(); ++t) {
    auto levels = stage_levels(schedule, t);
    stages.push_back({{"stage", t},
                      {"size", schedule.stage_sizes()[t - 1]},
                      {"min_level", *std::min_element(levels.begin(), levels.end())},
                      {"max_level", *std::max_element(levels.begin(), levels.end())}});
  }
  json transitions = json::array();
  for (std::size_t t = 1; t < schedule.stages(); ++t) {
    transitions.push_back(
        {{"from", t},
         {"to", t + 1},
         {"w1", stage_transition_distance(stage_levels(schedule, t), stage_levels(schedule, t + 1), loss.bins,
                                          loss.ground)}});
  }
  return json{{"samples", schedule.size()}, {"bins", loss.bins}, {"stages", stages}, {"transitions", transitions}};
}

json train_report_json(const RunConfig& cfg, const TrainOutcome& outcome) {
  json stages = json::array();
  for (const StageReport& s : outcome.report.stages) {
    json evals = json::array();
    for (const LevelEvaluation& e : s.level_evaluations) evals.push_back({{"level", e.level}, {"mi", e.mi}});
    stages.push_back({{"stage", s.stage},
                      {"size", s.size},
                      {"min_level", s.min_level},
                      {"max_level", s.max_level},
                      {"epoch_losses", s.epoch_losses},
                      {"selected_level", optional_number(s.selected_level)},
                      {"selection_mi", optional_number(s.selection_mi)},
                      {"level_evaluations", evals},
                      {"transition_w1", optional_number(s.transition_w1)},
                      {"l_geo", optional_number(s.l_geo)},
                      {"l_geo_error", s.l_geo_error},
                      {"loss",
                       {{"data_loss", s.loss.data_loss},
                        {"w1", s.loss.w1},
                        {"mi", s.loss.mi},
                        {"l_geo", s.loss.l_geo},
                        {"value", s.loss.value}}}});
  }
  return json{{"strategy", cfg.strategy},
              {"variant", cfg.variant},
              {"seed", cfg.seed},
              {"alpha", cfg.alpha},
              {"lambda", {cfg.lambda1, cfg.lambda2, cfg.lambda3}},
              {"stage_sizes", std::vector<std::size_t>(outcome.schedule.stage_sizes().begin(),
                                                       outcome.schedule.stage_sizes().end())},
              {"snapshots", outcome.report.snapshots.size()},
              {"snapshot_coordinates", outcome.report.snapshot_coordinates},
              {"stages", stages}};
}

json metrics_json(const MetricsReport& r) {
  json per_class = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    per_class.push_back({{"class", c},
                         {"precision", r.per_class[c].precision},
                         {"recall", r.per_class[c].recall},
                         {"f1", r.per_class[c].f1},
                         {"roc_auc", c < r.per_class_auc.size() ? optional_number(r.per_class_auc[c]) : json(nullptr)}});
  }
  return json{{"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"roc_auc", optional_number(r.roc_auc)},
              {"accuracy", r.accuracy},
              {"averaging", std::string(to_string(r.averaging))},
              {"evaluated", r.evaluated},
              {"undefined_auc_classes", r.undefined_auc_classes},
              {"per_class", per_class}};
}

std::string occluded_dataset_label(const RunConfig& cfg) {
  return cfg.dataset_label() + "+occ" + fmt("%.2f", cfg.eval_level);
}

std::string metrics_csv(const RunConfig& cfg, const Evaluation& ev) {
  std::string out(kMetricsCsvHeader);
  out += "\n" + metrics_csv_row(cfg.strategy_label(), cfg.dataset_label(), ev.clean) + "\n";
  if (ev.occluded) out += metrics_csv_row(cfg.strategy_label(), occluded_dataset_label(cfg), *ev.occluded) + "\n";
  return out;
}

}  // namespace occur::app
