#include "karcher/experiment.hpp"

#include "karcher/acceptance.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace karcher {

using nlohmann::json;

namespace {

const char* kKindNames[] = {"distortion-sweep", "jacobi-checks", "fem-poisson", "flat-simplex-props"};

ExperimentKind kind_from_string(const std::string& s) {
  for (int k = 0; k < 4; ++k) {
    if (s == kKindNames[k]) return static_cast<ExperimentKind>(k);
  }
  throw ConfigError("kind", "unknown experiment kind '" + s + "'");
}

void reject_unknown_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <class T>
void read(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  const std::string field = path.empty() ? key : path + "." + key;
  try {
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!j.at(key).is_number_integer() || (!j.at(key).is_number_unsigned() && j.at(key).get<std::int64_t>() < 0))
        throw ConfigError(field, "expected a nonnegative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.at(key).is_number_integer()) throw ConfigError(field, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.at(key).is_number()) throw ConfigError(field, "expected a number");
    } else {
      if (!j.at(key).is_string()) throw ConfigError(field, "expected a string");
    }
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

json fit_or_null(const std::optional<SlopeFit>& f) { return f ? json(*f) : json(nullptr); }

std::optional<SlopeFit> fit_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<SlopeFit>();
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

std::string slope_cell(const std::optional<SlopeFit>& f) { return f ? csv_number(f->slope) : ""; }

// Flat simplex of fullness in [target, 1.1 target] drawn from the seed (equilateral near the maximum).
std::vector<TangentVector> family_directions(const Manifold& M, const Point& center, int n, double target,
                                             std::uint64_t seed) {
  if (target >= 0.99 * max_fullness<double>(n)) return equilateral_directions(M, center, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int attempt = 0; attempt < 200000; ++attempt) {
    Mat pts(n, n + 1);
    for (Eigen::Index k = 0; k < pts.size(); ++k) pts.data()[k] = nd(rng);
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(pts));
    if (!gm.realizable) continue;
    const double theta = fullness(gm, max_edge_length(gm));
    if (theta >= target && theta <= 1.1 * target) return directions_from_flat_metric(M, center, gm);
  }
  throw NumericalError("could not draw a simplex with the requested fullness");
}

Assertion slope_assertion(const std::string& name, const std::optional<SlopeFit>& fit, double target, double tol) {
  if (!fit) return {name, false, "no slope could be fitted"};
  const bool ok = std::abs(fit->slope - target) <= tol;
  return {name, ok, "slope " + csv_number(fit->slope) + ", expected " + csv_number(target) + " +- " + csv_number(tol)};
}

Assertion from_criterion(const CriterionResult& r) { return {r.name, r.passed, r.detail}; }

RunReport run_distortion(const ExperimentConfig& cfg) {
  RunReport rep;
  const ManifoldPtr M = make_manifold(cfg.manifold);
  const Point center = default_center(*M);
  const int n = M->dim();
  SimplexFamily fam{M, center, family_directions(*M, center, n, cfg.fullness_target, cfg.seed),
                    make_ladder(cfg.ladder.h0, cfg.ladder.levels), cfg.fullness_target};
  rep.distortion = run_family(fam, sample_weights(n));
  const ConvergenceReport& d = *rep.distortion;
  if (M->bounds().C0 == 0.0) {
    double worst = 0.0;
    for (const auto& s : d.samples) {
      worst = std::max({worst, s.metric_gap, s.connection_gap, s.dx_sigma_gap, s.nabla_dx});
    }
    rep.assertions.push_back({"flat exactness", worst <= 1e-9, "max distortion " + csv_number(worst)});
  } else {
    const double dx_tol = cfg.manifold.kind == "hyperbolic" ? 0.3 : 0.25;
    rep.assertions.push_back(slope_assertion("metric_gap slope", d.fitted_slopes.metric_gap, 2.0, 0.25));
    rep.assertions.push_back(slope_assertion("connection_gap slope", d.fitted_slopes.connection_gap, 1.0, 0.25));
    rep.assertions.push_back(slope_assertion("dx_sigma_gap slope", d.fitted_slopes.dx_sigma_gap, 2.0, dx_tol));
    rep.assertions.push_back(slope_assertion("nabla_dx slope", d.fitted_slopes.nabla_dx, 1.0, 0.25));
    rep.assertions.push_back(slope_assertion("edge_length slope", d.edge_length_slope, 2.0, 0.25));
  }
  return rep;
}

RunReport run_fem(const ExperimentConfig& cfg) {
  RunReport rep;
  FemReport fem;
  std::vector<double> h, l2, h1;
  bool decreasing = true;
  for (int level = cfg.fem.min_level; level <= cfg.fem.max_level; ++level) {
    fem.rows.push_back(run_poisson_level(level, cfg.fem.mode));
    const auto& r = fem.rows.back();
    if (!l2.empty()) decreasing = decreasing && r.l2_error < l2.back();
    h.push_back(r.h);
    l2.push_back(r.l2_error);
    h1.push_back(r.h1_error);
  }
  fem.h1_slope = fit_slope(h, h1);
  fem.l2_slope = fit_slope(h, l2);
  rep.assertions.push_back({"h1 slope >= 0.8", fem.h1_slope->slope >= 0.8, "slope " + csv_number(fem.h1_slope->slope)});
  rep.assertions.push_back({"l2 strictly decreasing", decreasing, ""});
  rep.fem = std::move(fem);
  return rep;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

void ExperimentConfig::validate() const {
  static const std::set<std::string> manifolds{"euclidean", "sphere", "hyperbolic", "stereographic-sphere",
                                               "poincare-ball"};
  if (!manifolds.count(manifold.kind)) throw ConfigError("manifold.kind", "unknown manifold kind '" + manifold.kind + "'");
  if (manifold.dim < 1) throw ConfigError("manifold.params.dim", "must be >= 1");
  if (!(manifold.radius > 0.0)) throw ConfigError("manifold.params.radius", "must be positive");
  if (!(manifold.kappa > 0.0)) throw ConfigError("manifold.params.kappa", "must be positive");
  if (!(ladder.h0 > 0.0)) throw ConfigError("ladder.h0", "must be positive");
  if (ladder.levels < 1) throw ConfigError("ladder.levels", "must be >= 1");
  if (output.format != "csv" && output.format != "json") throw ConfigError("output.format", "must be csv or json");
  if (output.path.empty()) throw ConfigError("output.path", "must not be empty");
  switch (kind) {
    case ExperimentKind::DistortionSweep:
      if (ladder.levels < 4) throw ConfigError("ladder.levels", "slope experiments need at least 4 levels");
      if (manifold.dim > 10) throw ConfigError("manifold.params.dim", "must be <= 10");
      if (!(fullness_target > 0.0 && fullness_target <= max_fullness<double>(manifold.dim) + 1e-12)) {
        throw ConfigError("fullness_target", "must lie in (0, sqrt(n+1)/2^(n/2)]");
      }
      break;
    case ExperimentKind::FemPoisson:
      if (manifold.kind != "sphere" || manifold.dim != 2) {
        throw ConfigError("manifold.kind", "fem-poisson needs the 2-sphere");
      }
      if (manifold.radius != 1.0) throw ConfigError("manifold.params.radius", "fem-poisson uses the unit sphere");
      if (fem.min_level < 0 || fem.max_level > 6 || fem.max_level - fem.min_level < 3) {
        throw ConfigError("fem.levels", "need 0 <= min, max <= 6 and at least 4 levels");
      }
      break;
    default:
      break;
  }
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"kind", to_string(c.kind)},
           {"manifold",
            {{"kind", c.manifold.kind},
             {"params", {{"dim", c.manifold.dim}, {"radius", c.manifold.radius}, {"kappa", c.manifold.kappa}}}}},
           {"ladder", {{"h0", c.ladder.h0}, {"levels", c.ladder.levels}}},
           {"fullness_target", c.fullness_target},
           {"seed", c.seed},
           {"output", {{"path", c.output.path}, {"format", c.output.format}}},
           {"fem", {{"levels", {c.fem.min_level, c.fem.max_level}}, {"mode", to_string(c.fem.mode)}}}};
}

void from_json(const json& j, ExperimentConfig& c) {
  reject_unknown_keys(j, "", {"kind", "manifold", "ladder", "fullness_target", "seed", "output", "fem"});
  if (!j.contains("kind")) throw ConfigError("kind", "missing");
  std::string kind;
  read(j, "kind", "", kind);
  c.kind = kind_from_string(kind);
  if (j.contains("manifold")) {
    const json& m = j.at("manifold");
    reject_unknown_keys(m, "manifold", {"kind", "params"});
    read(m, "kind", "manifold", c.manifold.kind);
    if (m.contains("params")) {
      const json& p = m.at("params");
      reject_unknown_keys(p, "manifold.params", {"dim", "radius", "kappa"});
      read(p, "dim", "manifold.params", c.manifold.dim);
      read(p, "radius", "manifold.params", c.manifold.radius);
      read(p, "kappa", "manifold.params", c.manifold.kappa);
    }
  }
  if (j.contains("ladder")) {
    const json& l = j.at("ladder");
    reject_unknown_keys(l, "ladder", {"h0", "levels"});
    read(l, "h0", "ladder", c.ladder.h0);
    read(l, "levels", "ladder", c.ladder.levels);
  }
  read(j, "fullness_target", "", c.fullness_target);
  read(j, "seed", "", c.seed);
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown_keys(o, "output", {"path", "format"});
    read(o, "path", "output", c.output.path);
    read(o, "format", "output", c.output.format);
  }
  if (j.contains("fem")) {
    const json& f = j.at("fem");
    reject_unknown_keys(f, "fem", {"levels", "mode"});
    if (f.contains("levels")) {
      const json& lv = f.at("levels");
      if (!lv.is_array() || lv.size() != 2 || !lv[0].is_number_integer() || !lv[1].is_number_integer()) {
        throw ConfigError("fem.levels", "expected [min_level, max_level]");
      }
      c.fem.min_level = lv[0].get<int>();
      c.fem.max_level = lv[1].get<int>();
    }
    if (f.contains("mode")) {
      std::string mode;
      read(f, "mode", "fem", mode);
      try {
        c.fem.mode = assembly_mode_from_string(mode);
      } catch (const DomainError& e) {
        throw ConfigError("fem.mode", e.what());
      }
    }
  }
  c.validate();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return j.get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ManifoldPtr make_manifold(const ManifoldSpec& spec) {
  if (spec.kind == "euclidean") return std::make_shared<Euclidean>(spec.dim);
  if (spec.kind == "sphere") return std::make_shared<Sphere>(spec.dim, spec.radius);
  if (spec.kind == "hyperbolic") return std::make_shared<Hyperbolic>(spec.dim, spec.kappa);
  if (spec.kind == "stereographic-sphere") return make_stereographic_sphere_chart(spec.dim);
  if (spec.kind == "poincare-ball") return make_poincare_ball_chart(spec.dim);
  throw ConfigError("manifold.kind", "unknown manifold kind '" + spec.kind + "'");
}

Point default_center(const Manifold& M) {
  if (const auto* s = dynamic_cast<const Sphere*>(&M)) {
    Vec c = Vec::Zero(s->ambient_dim());
    c(s->dim()) = s->radius();
    return Point{c};
  }
  if (const auto* h = dynamic_cast<const Hyperbolic*>(&M)) return h->lift(Vec::Zero(h->dim()));
  return Point{Vec::Zero(M.ambient_dim())};
}

// ---------------------------------------------------------------------------
// Serialization.

void to_json(json& j, const SlopeFit& f) {
  j = json{{"slope", f.slope},   {"intercept", f.intercept},     {"std_error", f.std_error},
           {"ci_low", f.ci_low}, {"ci_high", f.ci_high},         {"levels_used", f.levels_used},
           {"dropped_coarsest", f.dropped_coarsest}};
}

void from_json(const json& j, SlopeFit& f) {
  j.at("slope").get_to(f.slope);
  j.at("intercept").get_to(f.intercept);
  j.at("std_error").get_to(f.std_error);
  j.at("ci_low").get_to(f.ci_low);
  j.at("ci_high").get_to(f.ci_high);
  j.at("levels_used").get_to(f.levels_used);
  j.at("dropped_coarsest").get_to(f.dropped_coarsest);
}

void to_json(json& j, const DistortionSample& s) {
  j = json{{"h", s.h},
           {"theta", s.theta},
           {"metric_gap", s.metric_gap},
           {"connection_gap", s.connection_gap},
           {"dx_sigma_gap", s.dx_sigma_gap},
           {"nabla_dx", s.nabla_dx}};
}

void from_json(const json& j, DistortionSample& s) {
  j.at("h").get_to(s.h);
  j.at("theta").get_to(s.theta);
  j.at("metric_gap").get_to(s.metric_gap);
  j.at("connection_gap").get_to(s.connection_gap);
  j.at("dx_sigma_gap").get_to(s.dx_sigma_gap);
  j.at("nabla_dx").get_to(s.nabla_dx);
}

void to_json(json& j, const EdgeLengthComparison& e) { j = json{{"h", e.h}, {"max_relative_gap", e.max_relative_gap}}; }

void from_json(const json& j, EdgeLengthComparison& e) {
  j.at("h").get_to(e.h);
  j.at("max_relative_gap").get_to(e.max_relative_gap);
}

void to_json(json& j, const ConvergenceReport& r) {
  j = json{{"samples", r.samples},
           {"fitted_slopes",
            {{"metric_gap", fit_or_null(r.fitted_slopes.metric_gap)},
             {"connection_gap", fit_or_null(r.fitted_slopes.connection_gap)},
             {"dx_sigma_gap", fit_or_null(r.fitted_slopes.dx_sigma_gap)},
             {"nabla_dx", fit_or_null(r.fitted_slopes.nabla_dx)}}},
           {"edge_lengths", r.edge_lengths},
           {"edge_length_slope", fit_or_null(r.edge_length_slope)},
           {"warnings", r.warnings}};
}

void from_json(const json& j, ConvergenceReport& r) {
  j.at("samples").get_to(r.samples);
  const json& f = j.at("fitted_slopes");
  r.fitted_slopes.metric_gap = fit_from(f.at("metric_gap"));
  r.fitted_slopes.connection_gap = fit_from(f.at("connection_gap"));
  r.fitted_slopes.dx_sigma_gap = fit_from(f.at("dx_sigma_gap"));
  r.fitted_slopes.nabla_dx = fit_from(f.at("nabla_dx"));
  j.at("edge_lengths").get_to(r.edge_lengths);
  r.edge_length_slope = fit_from(j.at("edge_length_slope"));
  j.at("warnings").get_to(r.warnings);
}

void to_json(json& j, const FemLevelResult& r) {
  j = json{{"level", r.level}, {"h", r.h}, {"dof", r.dof}, {"l2_error", r.l2_error}, {"h1_error", r.h1_error}};
}

void from_json(const json& j, FemLevelResult& r) {
  j.at("level").get_to(r.level);
  j.at("h").get_to(r.h);
  j.at("dof").get_to(r.dof);
  j.at("l2_error").get_to(r.l2_error);
  j.at("h1_error").get_to(r.h1_error);
}

void to_json(json& j, const FemReport& r) {
  j = json{{"rows", r.rows},
           {"fitted_slopes", {{"h1_error", fit_or_null(r.h1_slope)}, {"l2_error", fit_or_null(r.l2_slope)}}}};
}

void from_json(const json& j, FemReport& r) {
  j.at("rows").get_to(r.rows);
  r.h1_slope = fit_from(j.at("fitted_slopes").at("h1_error"));
  r.l2_slope = fit_from(j.at("fitted_slopes").at("l2_error"));
}

void to_json(json& j, const Assertion& a) { j = json{{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}}; }

void from_json(const json& j, Assertion& a) {
  j.at("name").get_to(a.name);
  j.at("passed").get_to(a.passed);
  j.at("detail").get_to(a.detail);
}

bool RunReport::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::vector<std::string> RunReport::failures() const {
  std::vector<std::string> out;
  for (const auto& a : assertions) {
    if (!a.passed) out.push_back(a.name + (a.detail.empty() ? "" : ": " + a.detail));
  }
  return out;
}

void to_json(json& j, const RunReport& r) {
  j = json{{"version", r.version},
           {"config", r.config},
           {"distortion", r.distortion ? json(*r.distortion) : json(nullptr)},
           {"fem", r.fem ? json(*r.fem) : json(nullptr)},
           {"assertions", r.assertions},
           {"passed", r.passed()},
           {"failures", r.failures()}};
}

void from_json(const json& j, RunReport& r) {
  j.at("version").get_to(r.version);
  r.config = j.at("config").get<ExperimentConfig>();
  r.distortion = j.at("distortion").is_null() ? std::nullopt : std::optional(j.at("distortion").get<ConvergenceReport>());
  r.fem = j.at("fem").is_null() ? std::nullopt : std::optional(j.at("fem").get<FemReport>());
  j.at("assertions").get_to(r.assertions);
}

void write_distortion_csv(const ConvergenceReport& r, std::ostream& os) {
  os << "h,theta,metric_gap,connection_gap,dx_sigma_gap,nabla_dx\n";
  for (const auto& s : r.samples) {
    os << csv_number(s.h) << ',' << csv_number(s.theta) << ',' << csv_number(s.metric_gap) << ','
       << csv_number(s.connection_gap) << ',' << csv_number(s.dx_sigma_gap) << ',' << csv_number(s.nabla_dx) << '\n';
  }
  const auto& f = r.fitted_slopes;
  os << "slopes,," << slope_cell(f.metric_gap) << ',' << slope_cell(f.connection_gap) << ','
     << slope_cell(f.dx_sigma_gap) << ',' << slope_cell(f.nabla_dx) << '\n';
}

void write_fem_csv(const FemReport& r, std::ostream& os) {
  os << "level,h,dof,l2_error,h1_error\n";
  for (const auto& row : r.rows) {
    os << row.level << ',' << csv_number(row.h) << ',' << row.dof << ',' << csv_number(row.l2_error) << ','
       << csv_number(row.h1_error) << '\n';
  }
  os << "slopes,,," << slope_cell(r.l2_slope) << ',' << slope_cell(r.h1_slope) << '\n';
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunReport rep;
  switch (config.kind) {
    case ExperimentKind::DistortionSweep:
      rep = run_distortion(config);
      break;
    case ExperimentKind::FemPoisson:
      rep = run_fem(config);
      break;
    case ExperimentKind::JacobiChecks:
      rep.assertions.push_back(from_criterion(run_criterion(7, config.seed)));
      rep.assertions.push_back(from_criterion(run_criterion(8, config.seed)));
      break;
    case ExperimentKind::FlatSimplexProps:
      rep.assertions.push_back(from_criterion(run_criterion(9, config.seed)));
      break;
  }
  rep.config = config;
  return rep;
}

std::vector<std::string> write_report(const RunReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(report.config.output.path);
  fs::create_directories(dir);
  const std::string base = to_string(report.config.kind);
  std::vector<std::string> written;

  const fs::path json_path = dir / (base + ".json");
  {
    std::ofstream out(json_path);
    out << json(report).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
  }
  written.push_back(json_path.string());

  if (report.config.output.format == "csv") {
    const fs::path csv_path = dir / (base + ".csv");
    std::ofstream out(csv_path);
    if (report.distortion) {
      write_distortion_csv(*report.distortion, out);
    } else if (report.fem) {
      write_fem_csv(*report.fem, out);
    } else {
      out << "name,passed\n";
      for (const auto& a : report.assertions) out << '"' << a.name << "\"," << (a.passed ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    written.push_back(csv_path.string());
  }
  return written;
}

// ---------------------------------------------------------------------------

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Karcher simplex experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format, ladder;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.path)");
  run->add_option("--format", format, "csv or json (overrides output.format)");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides seed)");
  run->add_option("--ladder", ladder, "h0,levels (overrides ladder)");

  std::string suite;
  std::uint64_t verify_seed = kDefaultSeed;
  auto* verify = app.add_subcommand("verify", "Run acceptance criteria");
  verify->add_option("suite", suite, "all, distortion, exactness, submanifold, jacobi, flat-simplex, fem, edge-lengths or 1..11")
      ->required();
  verify->add_option("--seed", verify_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (verify->parsed()) {
    try {
      const auto results = run_suite(suite, out, verify_seed);
      const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
      return ok ? 0 : 1;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
  }

  ExperimentConfig cfg;
  try {
    json j;
    {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("<file>", "cannot open '" + config_path + "'");
      try {
        in >> j;
      } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
      }
    }
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    if (!out_dir.empty()) j["output"]["path"] = out_dir;
    if (!format.empty()) j["output"]["format"] = format;
    if (*seed_opt) j["seed"] = seed;
    if (!ladder.empty()) {
      const auto comma = ladder.find(',');
      try {
        if (comma == std::string::npos) throw std::invalid_argument("missing comma");
        const double h0 = std::stod(ladder.substr(0, comma));
        const int levels = std::stoi(ladder.substr(comma + 1));
        j["ladder"] = {{"h0", h0}, {"levels", levels}};
      } catch (const std::exception&) {
        throw ConfigError("--ladder", "expected h0,levels");
      }
    }
    cfg = j.get<ExperimentConfig>();
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  }

  try {
    const RunReport report = run_experiment(cfg);
    for (const auto& path : write_report(report)) out << "wrote " << path << '\n';
    for (const auto& a : report.assertions) {
      out << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : ": " + a.detail) << '\n';
    }
    if (!report.passed()) {
      err << json{{"failures", report.failures()}}.dump() << '\n';
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace karcher
