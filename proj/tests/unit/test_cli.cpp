#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = occur::app::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("OCCUR_OUTPUT_ROOT");
  fs::path base = root && *root ? fs::path(root) : fs::temp_directory_path() / "occur_cli_tests";
  fs::path dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path last_line_path(const std::string& out) {
  std::string s = out;
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return fs::path(s.substr(s.rfind('\n') == std::string::npos ? 0 : s.rfind('\n') + 1));
}

// small and fast, still the full pipeline
std::vector<std::string> quick(const fs::path& out_dir) {
  return {"--output-dir", out_dir.string(), "--samples", "80", "--epochs", "3", "--set", "hidden=[16]",
          "--set", "image_size=16"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

}  // namespace

TEST_CASE("seed ranges") {
  using occur::app::parse_seed_range;
  CHECK(parse_seed_range("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_range("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
  CHECK_THROWS_AS(parse_seed_range("4..1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_seed_range("a..b"), std::invalid_argument);
}

TEST_CASE("synth writes a reproducible dataset") {
  fs::path dir = scratch("synth");
  auto a = run({"synth", "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  CHECK(count_files(dir / "a", ".pgm") == 400);
  json manifest = read_json(dir / "a" / "manifest.json");
  CHECK(manifest["classes"].size() == 4);
  CHECK(manifest["samples"].size() == 400);
  CHECK(manifest["samples"][0].contains("split"));

  REQUIRE(run({"synth", "--out", (dir / "b").string()}).code == 0);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    fs::path other = dir / "b" / fs::relative(e.path(), dir / "a");
    REQUIRE(slurp(e.path()) == slurp(other));
  }

  auto again = run({"synth", "--out", (dir / "a").string()});
  CHECK(again.code == 1);

  auto too_few = run({"synth", "--out", (dir / "c").string(), "--samples", "3"});
  CHECK(too_few.code == 1);
  json record = json::parse(too_few.err);
  CHECK(record["error"]["command"] == "synth");
  CHECK(record["error"]["kind"] == "invalid_argument");
}

TEST_CASE("baseline training writes a single-stage run") {
  fs::path root = scratch("train_baseline");
  auto r = run(concat({"train", "--strategy", "baseline"}, quick(root)));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  fs::path dir = last_line_path(r.out);
  for (const char* f : {"config.json", "checkpoint.json", "trainreport.json", "metrics.csv", "metrics.json", "run.log"})
    CHECK(fs::exists(dir / f));

  std::string csv = slurp(dir / "metrics.csv");
  CHECK(csv.rfind("Strategy,Dataset,Precision,Recall,F1-Score,ROC-AUC,Accuracy\n", 0) == 0);
  CHECK(csv.find("\nBaseline,synthetic-4,") != std::string::npos);
  CHECK(csv.find("\nBaseline,synthetic-4+occ0.30,") != std::string::npos);

  json report = read_json(dir / "trainreport.json");
  REQUIRE(report["stages"].size() == 1);
  CHECK(report["stages"][0]["transition_w1"].is_null());
  CHECK(report["stages"][0]["selected_level"].is_null());

  json cfg = read_json(dir / "config.json");
  CHECK(cfg["stages"] == 1);
  CHECK(cfg["run_name"] == "baseline-plain-seed1");
  CHECK(cfg.size() == occur::app::to_json(occur::app::RunConfig{}).size());
}

TEST_CASE("pros with wcl over three stages logs two transitions") {
  fs::path root = scratch("train_wcl");
  auto r = run(concat({"train", "--strategy", "pros", "--variant", "wcl", "--stages", "3"}, quick(root)));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  json report = read_json(last_line_path(r.out) / "trainreport.json");
  REQUIRE(report["stages"].size() == 3);
  CHECK(report["stages"][0]["transition_w1"].is_number());
  CHECK(report["stages"][1]["transition_w1"].is_number());
  CHECK(report["stages"][2]["transition_w1"].is_null());
  CHECK(slurp(last_line_path(r.out) / "metrics.csv").find("\nPROS+WCL,") != std::string::npos);
}

TEST_CASE("identical configs give identical outputs in separate directories") {
  fs::path root = scratch("train_repro");
  auto args = concat({"train", "--variant", "ial"}, quick(root));
  auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  fs::path da = last_line_path(a.out), db = last_line_path(b.out);
  CHECK(da != db);
  CHECK(db.filename().string() == da.filename().string() + "-2");
  CHECK(slurp(da / "metrics.csv") == slurp(db / "metrics.csv"));
  CHECK(slurp(da / "checkpoint.json") == slurp(db / "checkpoint.json"));
  CHECK(slurp(da / "trainreport.json") == slurp(db / "trainreport.json"));

  // replay from the saved config alone
  auto c = run({"train", "--config", (da / "config.json").string()});
  REQUIRE(c.code == 0);
  CHECK(slurp(da / "checkpoint.json") == slurp(last_line_path(c.out) / "checkpoint.json"));
}

TEST_CASE("evaluate reproduces the metrics of a run") {
  fs::path root = scratch("evaluate");
  auto r = run(concat({"train"}, quick(root)));
  REQUIRE(r.code == 0);
  fs::path dir = last_line_path(r.out);
  auto e = run({"evaluate", "--run", dir.string()});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  CHECK(slurp(last_line_path(e.out) / "metrics.csv") == slurp(dir / "metrics.csv"));
}

TEST_CASE("config files, overrides and unknown keys") {
  fs::path root = scratch("config");
  fs::path file = root / "cfg.json";
  {
    std::ofstream f(file);
    f << R"({"strategy": "pbos", "stages": 2, "samples": 40, "epochs": 2, "image_size": 16, "hidden": [8]})";
  }
  auto r = run({"train", "--config", file.string(), "--stages", "4", "--output-dir", root.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  json cfg = read_json(last_line_path(r.out) / "config.json");
  CHECK(cfg["strategy"] == "pbos");
  CHECK(cfg["stages"] == 4);
  CHECK(cfg["learning_rate"] == 0.05);

  auto typo = run({"train", "--set", "lamda1=0.2", "--output-dir", root.string()});
  CHECK(typo.code == 1);
  CHECK(json::parse(typo.err)["error"]["message"].get<std::string>().find("lamda1") != std::string::npos);

  auto wrong_type = run({"train", "--set", "stages=\"three\"", "--output-dir", root.string()});
  CHECK(wrong_type.code == 1);

  auto above_alpha = run({"train", "--set", "candidate_levels=[0.1,0.6]", "--output-dir", root.string()});
  CHECK(above_alpha.code == 1);
}

TEST_CASE("output root comes from the environment when not configured") {
  fs::path root = scratch("env_root");
  const char* previous = std::getenv("OCCUR_OUTPUT_ROOT");
  std::string saved = previous ? previous : "";
  setenv("OCCUR_OUTPUT_ROOT", root.string().c_str(), 1);
  auto r = run({"inspect-schedule", "--samples", "40"});
  if (previous) setenv("OCCUR_OUTPUT_ROOT", saved.c_str(), 1);
  else unsetenv("OCCUR_OUTPUT_ROOT");
  REQUIRE(r.code == 0);
  CHECK(last_line_path(r.out).parent_path() == root);
}

TEST_CASE("inspect-schedule examples") {
  fs::path root = scratch("inspect");
  // 5 classes x 4 images, half of each class trains: 10 training samples
  std::vector<std::string> base{"inspect-schedule", "--output-dir", root.string(), "--set", "classes=5",
                                "--samples",        "20",           "--set",       "split=[0.5,0.25,0.25]"};
  auto four = run(concat(base, {"--stages", "4", "--delta", "0"}));
  REQUIRE_MESSAGE(four.code == 0, four.err);
  json s = read_json(last_line_path(four.out) / "schedule.json");
  std::vector<std::size_t> sizes;
  for (const auto& st : s["stages"]) sizes.push_back(st["size"]);
  CHECK(sizes == std::vector<std::size_t>{3, 5, 8, 10});
  REQUIRE(s["transitions"].size() == 3);
  for (const auto& t : s["transitions"]) CHECK(t["w1"] == 0.0);

  auto one = run(concat(base, {"--stages", "1"}));
  REQUIRE(one.code == 0);
  CHECK(read_json(last_line_path(one.out) / "schedule.json")["transitions"].empty());
}

TEST_CASE("geodesic on built-in manifolds") {
  fs::path root = scratch("geodesic");
  auto flat = run({"geodesic", "--manifold", "euclidean", "--from", "0,0", "--to", "3,4", "-o",
                   (root / "flat.json").string()});
  REQUIRE_MESSAGE(flat.code == 0, flat.err);
  CHECK(std::abs(read_json(root / "flat.json")["length"].get<double>() - 5.0) <= 1e-9);

  auto hp = run({"geodesic", "--manifold", "halfplane", "--from", "-1,1", "--to", "1,1", "-o",
                 (root / "hp.json").string()});
  REQUIRE(hp.code == 0);
  json h = read_json(root / "hp.json");
  CHECK(std::abs(h["length"].get<double>() - std::acosh(3.0)) <= 1e-3);
  CHECK(h["oracle_error"].get<double>() <= 1e-3);

  auto polar = run({"geodesic", "--manifold", "polar", "--from", "1,0", "--to", "1,1.5707963267948966", "-o",
                    (root / "polar.json").string()});
  REQUIRE(polar.code == 0);
  CHECK(read_json(root / "polar.json")["oracle_error"].get<double>() <= 1e-6);

  auto bad = run({"geodesic", "--manifold", "sphere", "--from", "0,0", "--to", "1,1", "--output-dir", root.string()});
  CHECK(bad.code == 1);

  auto failing = run({"geodesic", "--manifold", "halfplane", "--from", "-30,0.05", "--to", "30,0.05", "--steps", "10",
                      "--output-dir", root.string()});
  CHECK(failing.code == 1);
  json record = json::parse(failing.err);
  CHECK(record["error"].contains("residual"));
}

TEST_CASE("geodesic between checkpoints") {
  fs::path root = scratch("geodesic_ckpt");
  auto r = run(concat({"train", "--variant", "wcl"}, quick(root)));
  REQUIRE(r.code == 0);
  fs::path ck = last_line_path(r.out) / "checkpoint.json";
  auto same = run(concat({"geodesic", "--checkpoints", ck.string(), ck.string(), "-o", (root / "same.json").string()},
                         quick(root)));
  REQUIRE_MESSAGE(same.code == 0, same.err);
  CHECK(read_json(root / "same.json")["length"].get<double>() == 0.0);

  auto other = run(concat({"train", "--variant", "wcl", "--seed", "2"}, quick(root)));
  REQUIRE(other.code == 0);
  fs::path ck2 = last_line_path(other.out) / "checkpoint.json";
  auto diff = run(concat({"geodesic", "--checkpoints", ck.string(), ck2.string(), "-o", (root / "diff.json").string()},
                         quick(root)));
  REQUIRE_MESSAGE(diff.code == 0, diff.err);
  CHECK(read_json(root / "diff.json")["length"].get<double>() > 0.0);
}

TEST_CASE("seed sweeps write one directory per seed and a combined table") {
  fs::path root = scratch("sweep");
  auto r = run(concat({"train", "--seeds", "1..2"}, quick(root)));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  fs::path sweep = last_line_path(r.out);
  CHECK(fs::exists(sweep / "pros-plain-seed1" / "checkpoint.json"));
  CHECK(fs::exists(sweep / "pros-plain-seed2" / "checkpoint.json"));
  std::string csv = slurp(sweep / "metrics.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(read_json(sweep / "summary.json")["runs"].size() == 2);
}
