#pragma once

#include "karcher/fem.hpp"
#include "karcher/harness.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace karcher {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid experiment configuration; `field` names the offending JSON path.
class ConfigError : public DomainError {
 public:
  ConfigError(std::string field, const std::string& what)
      : DomainError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { DistortionSweep, JacobiChecks, FemPoisson, FlatSimplexProps };
std::string to_string(ExperimentKind kind);

struct ManifoldSpec {
  /// euclidean | sphere | hyperbolic | stereographic-sphere | poincare-ball
  std::string kind = "sphere";
  int dim = 2;
  double radius = 1.0;  // sphere
  double kappa = 1.0;   // hyperbolic
};

struct LadderSpec {
  double h0 = 0.2;
  int levels = 5;
};

struct FemSpec {
  int min_level = 1;
  int max_level = 4;
  AssemblyMode mode = AssemblyMode::PulledBack;
};

struct OutputSpec {
  std::string path = ".";
  std::string format = "csv";  // csv | json
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DistortionSweep;
  ManifoldSpec manifold;
  LadderSpec ladder;
  double fullness_target = 0.86;
  std::uint64_t seed = 1;
  OutputSpec output;
  FemSpec fem;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing fields take their defaults; invalid values raise ConfigError.
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

ManifoldPtr make_manifold(const ManifoldSpec& spec);
/// Base point used for simplex families on the manifold.
Point default_center(const Manifold& M);

/// Single named pass/fail assertion of a run.
struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct FemReport {
  std::vector<FemLevelResult> rows;
  std::optional<SlopeFit> h1_slope;
  std::optional<SlopeFit> l2_slope;
};

/// Everything a run produces; serialized as JSON with the config and version.
struct RunReport {
  std::string version = kVersion;
  ExperimentConfig config;
  std::optional<ConvergenceReport> distortion;
  std::optional<FemReport> fem;
  std::vector<Assertion> assertions;

  bool passed() const;
  std::vector<std::string> failures() const;
};

void to_json(nlohmann::json& j, const SlopeFit& f);
void from_json(const nlohmann::json& j, SlopeFit& f);
void to_json(nlohmann::json& j, const DistortionSample& s);
void from_json(const nlohmann::json& j, DistortionSample& s);
void to_json(nlohmann::json& j, const EdgeLengthComparison& e);
void from_json(const nlohmann::json& j, EdgeLengthComparison& e);
void to_json(nlohmann::json& j, const ConvergenceReport& r);
void from_json(const nlohmann::json& j, ConvergenceReport& r);
void to_json(nlohmann::json& j, const FemLevelResult& r);
void from_json(const nlohmann::json& j, FemLevelResult& r);
void to_json(nlohmann::json& j, const FemReport& r);
void from_json(const nlohmann::json& j, FemReport& r);
void to_json(nlohmann::json& j, const Assertion& a);
void from_json(const nlohmann::json& j, Assertion& a);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

/// Columns h,theta,metric_gap,connection_gap,dx_sigma_gap,nabla_dx and a final "slopes" row.
void write_distortion_csv(const ConvergenceReport& r, std::ostream& os);
/// Columns level,h,dof,l2_error,h1_error and a final "slopes" row (h1 slope in h1_error, l2 slope in l2_error).
void write_fem_csv(const FemReport& r, std::ostream& os);

/// Runs the experiment; never writes files.
RunReport run_experiment(const ExperimentConfig& config);

/// Writes the report into config.output.path and returns the written paths.
std::vector<std::string> write_report(const RunReport& report);

/// Entry point of the `karcher` executable. Exit codes: 0 all assertions
/// passed, 1 assertion failures, 2 invalid configuration or arguments,
/// 3 numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace karcher
