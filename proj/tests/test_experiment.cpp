#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "karcher/acceptance.hpp"
#include "karcher/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace karcher;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("karcher_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "karcher_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json sphere_sweep_config(const fs::path& out) {
  return {{"kind", "distortion-sweep"},
          {"manifold", {{"kind", "sphere"}, {"params", {{"dim", 2}, {"radius", 1.0}}}}},
          {"ladder", {{"h0", 0.2}, {"levels", 5}}},
          {"fullness_target", 0.86},
          {"seed", 7},
          {"output", {{"path", out.string()}, {"format", "csv"}}}};
}

}  // namespace

TEST_CASE("config parsing fills defaults") {
  const ExperimentConfig c = parse_config(R"({"kind": "distortion-sweep"})");
  CHECK(c.kind == ExperimentKind::DistortionSweep);
  CHECK(c.manifold.kind == "sphere");
  CHECK(c.ladder.h0 == 0.2);
  CHECK(c.ladder.levels == 5);
  CHECK(c.output.format == "csv");
  CHECK(c.fem.mode == AssemblyMode::PulledBack);
}

TEST_CASE("config errors name the offending field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"kind": "distortion-sweep", "manifold": {"kind": "torus"}})") == "manifold.kind");
  CHECK(field_of(R"({"kind": "nonsense"})") == "kind");
  CHECK(field_of(R"({"kind": "distortion-sweep", "ladder": {"h0": -1}})") == "ladder.h0");
  CHECK(field_of(R"({"kind": "distortion-sweep", "extra": 1})") == "extra");
  CHECK(field_of(R"({"kind": "distortion-sweep", "manifold": {"kind": "sphere", "params": {"dims": 2}}})") ==
        "manifold.params.dims");
  CHECK(field_of(R"({"kind": "distortion-sweep", "ladder": {"h0": "big"}})") == "ladder.h0");
  CHECK(field_of(R"({"kind": "distortion-sweep", "output": {"format": "xml"}})") == "output.format");
  CHECK(field_of(R"({"kind": "fem-poisson", "fem": {"mode": "curved"}})") == "fem.mode");
  CHECK(field_of(R"({"kind": "fem-poisson", "fem": {"levels": [3, 1]}})") == "fem.levels");
  CHECK(field_of(R"({"kind": "distortion-sweep", "fullness_target": 2.0})") == "fullness_target");
  CHECK(field_of("[1, 2]") == "<root>");
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c;
  c.kind = ExperimentKind::FemPoisson;
  c.manifold.radius = 1.0;
  c.manifold.kappa = 0.5;
  c.ladder = {0.1, 6};
  c.seed = 99;
  c.fem = {2, 5, AssemblyMode::Flat};
  c.output = {"somewhere", "json"};
  const ExperimentConfig back = json(c).get<ExperimentConfig>();
  CHECK(json(back) == json(c));
}

TEST_CASE("report JSON round trip") {
  RunReport r;
  r.config.output.path = "x";
  ConvergenceReport d;
  d.samples.push_back({0.2, 0.86, 1e-2, 3e-2, 4e-3, 0.2});
  d.samples.push_back({0.1, 0.866, 2.5e-3, 1.5e-2, 1e-3, 0.1});
  d.fitted_slopes.metric_gap = SlopeFit{2.0, -1.0, 0.01, 1.9, 2.1, 4, true};
  d.edge_lengths.push_back({0.2, 1e-3});
  d.warnings.push_back("w");
  r.distortion = d;
  r.fem = FemReport{{{1, 0.6, 42, 0.04, 0.36}}, std::nullopt, SlopeFit{}};
  r.assertions.push_back({"a", true, "ok"});
  r.assertions.push_back({"b", false, "bad"});
  const json j = r;
  const RunReport back = j.get<RunReport>();
  CHECK(json(back) == j);
  CHECK(j["version"] == kVersion);
  CHECK_FALSE(back.passed());
  REQUIRE(back.failures().size() == 1);
  CHECK(back.failures()[0].find("b") != std::string::npos);
}

TEST_CASE("distortion sweep through the CLI writes CSV and JSON") {
  const fs::path dir = scratch_dir("sweep");
  const fs::path cfg = write_config(dir, sphere_sweep_config(dir / "out"));
  const CliResult r = cli({"run", cfg.string()});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  const std::string csv = slurp(dir / "out" / "distortion-sweep.csv");
  CHECK(csv.rfind("h,theta,", 0) == 0);
  CHECK(csv.find("\nslopes,") != std::string::npos);
  const json report = json::parse(slurp(dir / "out" / "distortion-sweep.json"));
  CHECK(report["version"] == kVersion);
  CHECK(report["config"]["seed"] == 7);
  CHECK(report["distortion"]["samples"].size() == 5);
  const double slope = report["distortion"]["fitted_slopes"]["metric_gap"]["slope"];
  CHECK(std::abs(slope - 2.0) < 0.25);

  // Rerunning with the same config reproduces the report byte for byte.
  const std::string first = slurp(dir / "out" / "distortion-sweep.json");
  CHECK(cli({"run", cfg.string()}).code == 0);
  CHECK(slurp(dir / "out" / "distortion-sweep.json") == first);
}

TEST_CASE("command-line overrides") {
  const fs::path dir = scratch_dir("overrides");
  const fs::path cfg = write_config(dir, sphere_sweep_config(dir / "ignored"));
  const CliResult r = cli({"run", cfg.string(), "--out", (dir / "here").string(), "--format", "json", "--seed", "11",
                           "--ladder", "0.1,4"});
  CHECK(r.code == 0);
  CHECK_FALSE(fs::exists(dir / "here" / "distortion-sweep.csv"));
  const json report = json::parse(slurp(dir / "here" / "distortion-sweep.json"));
  CHECK(report["config"]["seed"] == 11);
  CHECK(report["config"]["ladder"]["h0"] == 0.1);
  CHECK(report["distortion"]["samples"].size() == 4);
  CHECK(cli({"run", cfg.string(), "--ladder", "oops"}).code == 2);
}

TEST_CASE("euclidean sweep is exact") {
  const fs::path dir = scratch_dir("euclid");
  json j = sphere_sweep_config(dir);
  j["manifold"] = {{"kind", "euclidean"}, {"params", {{"dim", 3}}}};
  j["fullness_target"] = 0.5;
  const RunReport rep = run_experiment(json(j).get<ExperimentConfig>());
  REQUIRE(rep.assertions.size() == 1);
  CHECK(rep.assertions[0].passed);
}

TEST_CASE("FEM experiment") {
  const fs::path dir = scratch_dir("fem");
  const json j = {{"kind", "fem-poisson"},
                  {"fem", {{"levels", {1, 4}}, {"mode", "flat"}}},
                  {"output", {{"path", dir.string()}, {"format", "csv"}}}};
  const CliResult r = cli({"run", write_config(dir, j).string()});
  CHECK(r.code == 0);
  const json report = json::parse(slurp(dir / "fem-poisson.json"));
  CHECK(report["fem"]["rows"].size() == 4);
  CHECK(report["fem"]["fitted_slopes"]["h1_error"]["slope"].get<double>() >= 0.8);
  CHECK(slurp(dir / "fem-poisson.csv").rfind("level,", 0) == 0);
}

TEST_CASE("exit codes for bad input") {
  const fs::path dir = scratch_dir("bad");
  json j = sphere_sweep_config(dir);
  j["manifold"]["kind"] = "klein-bottle";
  const CliResult bad = cli({"run", write_config(dir, j).string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("manifold.kind") != std::string::npos);

  CHECK(cli({"run", (dir / "missing.json").string()}).code == 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli({"run", (dir / "broken.json").string()}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"verify", "no-such-suite"}).code == 2);

  // A simplex too large for the convexity radius is a domain error.
  json big = sphere_sweep_config(dir);
  big["ladder"] = {{"h0", 2.5}, {"levels", 4}};
  CHECK(cli({"run", write_config(dir, big).string()}).code == 2);
}

TEST_CASE("verify runs an acceptance suite") {
  const CliResult r = cli({"verify", "exactness"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS [5]", 0) == 0);
}

TEST_CASE("acceptance suites") {
  CHECK(suite_criteria("all").size() == static_cast<std::size_t>(kCriterionCount));
  CHECK(suite_criteria("7") == std::vector<int>{7});
  CHECK_THROWS_AS(suite_criteria("12"), DomainError);
  const CriterionResult r = run_criterion(9);
  CHECK(r.passed);
  CHECK(format_result(r).rfind("PASS [9]", 0) == 0);
}
