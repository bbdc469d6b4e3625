#include "app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "app/pipeline.hpp"
#include "app/run_config.hpp"
#include "occur/geometry.hpp"
#include "occur/loss_geometry.hpp"

namespace occur::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Carries extra fields into the structured error record.
struct CommandError : std::runtime_error {
  json detail;
  CommandError(const std::string& what, json d) : std::runtime_error(what), detail(std::move(d)) {}
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument(path.string() + " is not valid JSON");
  return j;
}

/// Options every config-driven subcommand accepts.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "KEY=VALUE override (repeatable)");
    for (const char* key : {"strategy", "variant", "seed", "stages", "delta", "epochs", "samples", "data_dir",
                            "output_dir", "run_name", "eval_level"}) {
      std::string flag = std::string("--") + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      cmd->add_option_function<std::string>(
          flag, [this, key](const std::string& v) { flags[key] = v; }, std::string("same as --set ") + key + "=...");
    }
  }

  std::map<std::string, std::string> overrides() const {
    std::map<std::string, std::string> out;
    for (const std::string& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects KEY=VALUE, got '" + s + "'");
      out[s.substr(0, eq)] = s.substr(eq + 1);
    }
    // dedicated flags win over --set
    for (const auto& [k, v] : flags) out[k] = v;
    return out;
  }

  RunConfig resolve() const {
    RunConfig cfg = resolve_config(file, overrides());
    if (cfg.run_name.empty()) cfg.run_name = cfg.default_run_name();
    return cfg;
  }
};

/// Writes every artifact of one training run into `dir`.
void train_into(const RunConfig& cfg, const fs::path& dir) {
  write_json(dir / "config.json", to_json(cfg));
  std::ofstream log(dir / "run.log");
  if (!log) throw std::runtime_error("cannot write " + (dir / "run.log").string());
  log << "run " << cfg.run_name << " seed=" << cfg.seed << " strategy=" << cfg.strategy << " variant=" << cfg.variant
      << "\n";
  TrainOutcome outcome = run_training(cfg, log);
  save_checkpoint(dir / "checkpoint.json", Checkpoint{outcome.report.final_model, outcome.final_rng});
  write_json(dir / "trainreport.json", train_report_json(cfg, outcome));
  write_text(dir / "metrics.csv", metrics_csv(cfg, outcome.evaluation));
  json metrics{{"dataset", cfg.dataset_label()}, {"strategy", cfg.strategy_label()},
               {"clean", metrics_json(outcome.evaluation.clean)}};
  if (outcome.evaluation.occluded) {
    metrics["occluded"] = metrics_json(*outcome.evaluation.occluded);
    metrics["occluded"]["dataset"] = occluded_dataset_label(cfg);
    metrics["occluded"]["level"] = cfg.eval_level;
  }
  write_json(dir / "metrics.json", metrics);
  log << "done\n";
}

int cmd_train(const ConfigOptions& opts, const std::string& seeds, std::ostream& out) {
  RunConfig cfg = opts.resolve();
  if (seeds.empty()) {
    fs::path dir = create_unique_dir(output_root(cfg), cfg.run_name);
    try {
      train_into(cfg, dir);
    } catch (const std::exception& e) {
      throw CommandError(e.what(), json{{"run_dir", dir.string()}});
    }
    out << dir.string() << "\n";
    return 0;
  }

  std::vector<std::uint64_t> list = parse_seed_range(seeds);
  std::string base = cfg.run_name;
  if (opts.overrides().count("run_name") == 0 && !opts.file.empty()) {
    // a run_name from the file is kept verbatim; only the default embeds the seed
    base = from_json(read_json(opts.file)).run_name;
  }
  if (base.empty() || base == cfg.default_run_name()) base = cfg.strategy + "-" + cfg.variant;
  fs::path sweep = create_unique_dir(output_root(cfg), base + "-seeds" + std::to_string(list.front()) + "-" +
                                                           std::to_string(list.back()));

  std::vector<RunConfig> configs;
  for (std::uint64_t s : list) {
    RunConfig c = cfg;
    c.seed = s;
    c.run_name = base + "-seed" + std::to_string(s);
    configs.push_back(c);
  }
  std::vector<fs::path> dirs(configs.size());
  std::vector<std::string> failures(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        dirs[i] = create_unique_dir(sweep, configs[i].run_name);
        train_into(configs[i], dirs[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  std::size_t threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, configs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string csv(kMetricsCsvHeader);
  csv += "\n";
  json summary{{"runs", json::array()}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!failures[i].empty()) {
      throw CommandError("seed " + std::to_string(configs[i].seed) + ": " + failures[i],
                         json{{"run_dir", dirs[i].string()}, {"seed", configs[i].seed}});
    }
    std::ifstream f(dirs[i] / "metrics.csv");
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line))
      if (!line.empty()) csv += line + "\n";
    json m = read_json(dirs[i] / "metrics.json");
    json entry{{"seed", configs[i].seed}, {"run_dir", dirs[i].filename().string()},
               {"accuracy", m["clean"]["accuracy"]}};
    if (m.contains("occluded")) entry["occluded_accuracy"] = m["occluded"]["accuracy"];
    summary["runs"].push_back(entry);
  }
  write_text(sweep / "metrics.csv", csv);
  write_json(sweep / "summary.json", summary);
  out << sweep.string() << "\n";
  return 0;
}

int cmd_synth(const ConfigOptions& opts, const std::string& out_dir, std::ostream& out) {
  RunConfig cfg = opts.resolve();
  if (!cfg.data_dir.empty()) throw std::invalid_argument("synth generates data; unset data_dir");
  if (cfg.channels != 1) throw std::invalid_argument("synth writes single-channel PGM; set channels=1");
  fs::path dir = out_dir.empty() ? create_unique_dir(output_root(cfg), cfg.run_name + "-data") : fs::path(out_dir);
  if (!out_dir.empty()) {
    if (fs::exists(dir) && !fs::is_empty(dir)) throw std::invalid_argument("output directory " + dir.string() + " is not empty");
    fs::create_directories(dir);
  }

  SeedStreams streams = seed_streams(cfg.seed);
  LabeledDataset ds = generate_synthetic(cfg.task(), streams.data);
  DatasetSplit parts = split(ds, {cfg.split[0], cfg.split[1], cfg.split[2]}, streams.split);
  std::vector<std::string> split_of(ds.samples.size());
  for (const auto* part : {&parts.train, &parts.val, &parts.test})
    for (const Sample& s : part->samples) split_of[s.origin_index] = std::string(to_string(part->split));

  json samples = json::array();
  for (const Sample& s : ds.samples) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.pgm", s.origin_index);
    fs::path rel = fs::path(ds.class_names[s.label]) / name;
    fs::create_directories(dir / rel.parent_path());
    write_pgm(dir / rel, s.image);
    samples.push_back({{"path", rel.generic_string()},
                       {"label", s.label},
                       {"class", ds.class_names[s.label]},
                       {"split", split_of[s.origin_index]}});
  }
  write_json(dir / "manifest.json", json{{"classes", ds.class_names},
                                         {"height", cfg.image_size},
                                         {"width", cfg.image_size},
                                         {"seed", cfg.seed},
                                         {"samples", samples}});
  out << dir.string() << "\n";
  return 0;
}

int cmd_inspect(const ConfigOptions& opts, std::ostream& out) {
  RunConfig cfg = opts.resolve();
  SeedStreams streams = seed_streams(cfg.seed);
  PreparedData data = prepare_data(cfg, streams);
  CurriculumSchedule schedule = build_schedule(cfg, data);
  fs::path dir = create_unique_dir(output_root(cfg), cfg.run_name + "-schedule");
  write_json(dir / "config.json", to_json(cfg));
  write_json(dir / "schedule.json", schedule_json(cfg, schedule));
  out << dir.string() << "\n";
  return 0;
}

Vec parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad coordinate list '" + text + "'");
    v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument("empty coordinate list");
  return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct GeodesicOptions {
  std::string manifold;
  std::string from;
  std::string to;
  std::vector<std::string> checkpoints;
  std::size_t steps = 1000;
  std::string method = "rk4";
  std::string out;
};

double oracle_length(const std::string& manifold, const Vec& a, const Vec& b) {
  if (manifold == "euclidean") return (a - b).norm();
  if (manifold == "polar") {
    double dphi = std::remainder(b(1) - a(1), 2.0 * std::numbers::pi);
    return std::sqrt(a(0) * a(0) + b(0) * b(0) - 2.0 * a(0) * b(0) * std::cos(dphi));
  }
  return std::acosh(1.0 + (a - b).squaredNorm() / (2.0 * a(1) * b(1)));
}

int cmd_geodesic(const ConfigOptions& opts, const GeodesicOptions& g, std::ostream& out) {
  ShootingConfig shooting;
  shooting.steps = g.steps;
  shooting.method = parse_integrator(g.method);
  json result;
  RunConfig cfg = opts.resolve();

  auto solve = [&](const Vec& a, const Vec& b, const MetricField& metric) {
    try {
      return solve_geodesic(a, b, metric, shooting);
    } catch (const ShootingError& e) {
      throw CommandError(e.what(), json{{"residual", e.residual()}, {"iterations", e.iterations()}});
    }
  };

  if (!g.manifold.empty()) {
    if (!g.checkpoints.empty()) throw std::invalid_argument("use either --manifold or --checkpoints, not both");
    if (g.from.empty() || g.to.empty()) throw std::invalid_argument("--manifold needs --from and --to");
    Vec a = parse_point(g.from), b = parse_point(g.to);
    if (a.size() != b.size()) throw std::invalid_argument("--from and --to differ in dimension");
    MetricField metric = MetricField::euclidean(static_cast<std::size_t>(a.size()));
    if (g.manifold == "polar" || g.manifold == "halfplane") {
      if (a.size() != 2) throw std::invalid_argument(g.manifold + " points are two-dimensional");
      metric = g.manifold == "polar" ? MetricField::polar() : MetricField::halfplane();
    } else if (g.manifold != "euclidean") {
      throw std::invalid_argument("manifold must be euclidean, polar or halfplane, got '" + g.manifold + "'");
    }
    GeodesicSolution sol = solve(a, b, metric);
    double oracle = oracle_length(g.manifold, a, b);
    json path = json::array();
    for (const Vec& p : sol.path.points) path.push_back(vec_json(p));
    result = {{"manifold", g.manifold}, {"from", vec_json(a)}, {"to", vec_json(b)},
              {"method", g.method},     {"steps", g.steps},     {"length", sol.length},
              {"oracle_length", oracle}, {"oracle_error", std::abs(sol.length - oracle)},
              {"residual", sol.residual}, {"iterations", sol.iterations}, {"path", path}};
  } else {
    if (g.checkpoints.size() != 2) throw std::invalid_argument("--checkpoints takes exactly two files");
    ModelState first = load_checkpoint(g.checkpoints[0]).model;
    ModelState second = load_checkpoint(g.checkpoints[1]).model;
    if (first.layers != second.layers) throw std::invalid_argument("checkpoints have different architectures");
    LossConfig loss = cfg.loss();
    HeadSubspace subspace(first, loss.geometry.projection_dim, loss.geometry.projection_seed);
    Vec a = subspace.project(first), b = subspace.project(second);
    MetricField metric = MetricField::euclidean(subspace.dim());
    if (loss.geometry.metric == MetricKind::loss_curvature) {
      SeedStreams streams = seed_streams(cfg.seed);
      PreparedData data = prepare_data(cfg, streams);
      std::span<const Sample> probe(data.val.samples);
      probe = probe.first(std::min(probe.size(), loss.geometry.probe_size));
      metric = loss_curvature_metric(second, subspace, probe, loss.geometry.beta, shooting.fd_step);
    }
    GeodesicSolution sol = solve(a, b, metric);
    result = {{"checkpoints", g.checkpoints}, {"metric", std::string(to_string(loss.geometry.metric))},
              {"projection_dim", subspace.dim()}, {"from", vec_json(a)}, {"to", vec_json(b)},
              {"method", g.method}, {"steps", g.steps}, {"length", sol.length},
              {"residual", sol.residual}, {"iterations", sol.iterations}};
  }

  fs::path file = g.out.empty() ? create_unique_dir(output_root(cfg), cfg.run_name + "-geodesic") / "geodesic.json"
                                : fs::path(g.out);
  write_json(file, result);
  out << file.string() << "\n";
  return 0;
}

int cmd_evaluate(const ConfigOptions& opts, const std::string& run, const std::string& checkpoint,
                 std::ostream& out) {
  fs::path ckpt_path = checkpoint;
  ConfigOptions resolved = opts;
  if (!run.empty()) {
    if (resolved.file.empty()) resolved.file = (fs::path(run) / "config.json").string();
    if (ckpt_path.empty()) ckpt_path = fs::path(run) / "checkpoint.json";
  }
  if (ckpt_path.empty()) throw std::invalid_argument("evaluate needs --run or --checkpoint");
  RunConfig cfg = resolved.resolve();
  ModelState model = load_checkpoint(ckpt_path).model;

  SeedStreams streams = seed_streams(cfg.seed);
  PreparedData data = prepare_data(cfg, streams);
  if (model.input_size() != data.test.samples.front().image.size() || model.classes() != data.test.classes()) {
    throw std::invalid_argument("checkpoint " + ckpt_path.string() + " does not match the configured data");
  }
  Evaluation ev = evaluate_model(cfg, model, data, streams.eval);

  fs::path dir = create_unique_dir(output_root(cfg), cfg.run_name + "-eval");
  write_json(dir / "config.json", to_json(cfg));
  write_text(dir / "metrics.csv", metrics_csv(cfg, ev));
  json metrics{{"checkpoint", ckpt_path.string()}, {"clean", metrics_json(ev.clean)}};
  if (ev.occluded) metrics["occluded"] = metrics_json(*ev.occluded);
  write_json(dir / "metrics.json", metrics);
  out << dir.string() << "\n";
  return 0;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
  if (dynamic_cast<const std::domain_error*>(&e)) return "domain_error";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return "filesystem_error";
  return "runtime_error";
}

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto parse_one = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad seed range '" + text + "', expected N or A..B");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  auto dots = text.find("..");
  if (dots == std::string::npos) return {parse_one(text)};
  std::uint64_t lo = parse_one(text.substr(0, dots)), hi = parse_one(text.substr(dots + 2));
  if (lo > hi) throw std::invalid_argument("bad seed range '" + text + "': start exceeds end");
  if (hi - lo >= 1000) throw std::invalid_argument("seed range '" + text + "' spans more than 1000 runs");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occlusion curriculum experiments"};
  app.require_subcommand(1);

  ConfigOptions synth_opts, train_opts, inspect_opts, geo_opts, eval_opts;
  std::string synth_out, seeds, eval_run, eval_ckpt;
  GeodesicOptions geo;

  auto* synth = app.add_subcommand("synth", "write a synthetic PGM dataset and manifest");
  synth_opts.attach(synth);
  synth->add_option("-o,--out", synth_out, "target directory (must be empty or absent)");

  auto* train = app.add_subcommand("train", "run one training pipeline, or a seed sweep");
  train_opts.attach(train);
  train->add_option("--seeds", seeds, "seed sweep A..B, one run directory per seed");

  auto* inspect = app.add_subcommand("inspect-schedule", "write stage sizes, level ranges and transition W1");
  inspect_opts.attach(inspect);

  auto* geodesic = app.add_subcommand("geodesic", "geodesic between two points or two checkpoints");
  geo_opts.attach(geodesic);
  geodesic->add_option("--manifold", geo.manifold, "euclidean, polar or halfplane");
  geodesic->add_option("--from", geo.from, "start point, comma separated");
  geodesic->add_option("--to", geo.to, "end point, comma separated");
  geodesic->add_option("--checkpoints", geo.checkpoints, "two checkpoint files")->expected(2);
  geodesic->add_option("--steps", geo.steps, "integration steps over t in [0, 1]");
  geodesic->add_option("--method", geo.method, "rk4 or euler");
  geodesic->add_option("-o,--out", geo.out, "output JSON file");

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the configured test split");
  eval_opts.attach(evaluate);
  evaluate->add_option("--run", eval_run, "run directory holding config.json and checkpoint.json");
  evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*synth) return cmd_synth(synth_opts, synth_out, out);
    if (*train) return cmd_train(train_opts, seeds, out);
    if (*inspect) return cmd_inspect(inspect_opts, out);
    if (*geodesic) return cmd_geodesic(geo_opts, geo, out);
    return cmd_evaluate(eval_opts, eval_run, eval_ckpt, out);
  } catch (const std::exception& e) {
    json record{{"command", command}, {"kind", error_kind(e)}, {"message", e.what()}};
    if (auto* ce = dynamic_cast<const CommandError*>(&e)) record.update(ce->detail);
    json wrapped{{"error", record}};
    err << wrapped.dump() << "\n";
    if (record.contains("run_dir")) {
      std::ofstream f(fs::path(record["run_dir"].get<std::string>()) / "error.json");
      f << wrapped.dump(2) << "\n";
    }
    return 1;
  }
}

}  // namespace occur::app
