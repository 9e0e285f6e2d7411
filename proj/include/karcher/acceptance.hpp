#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace karcher {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 when unlimited
};

inline constexpr int kCriterionCount = 11;
inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Ids in a named suite: all, distortion, exactness, submanifold, jacobi,
/// flat-simplex, fem, edge-lengths, or a single id "1".."11".
std::vector<int> suite_criteria(const std::string& suite);

/// Runs one criterion; exceptions are reported as failures.
CriterionResult run_criterion(int id, std::uint64_t seed = kDefaultSeed);

/// One line: "PASS [3] dx-sigma rate: ... (0.12 s)".
std::string format_result(const CriterionResult& r);

/// Runs the suite, printing each line as it completes.
std::vector<CriterionResult> run_suite(const std::string& suite, std::ostream& os, std::uint64_t seed = kDefaultSeed);

}  // namespace karcher
