#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sphvar {

struct SuiteConfig {
  /// Overrides the reference resolution of every grid when set.
  std::optional<int> res;
  std::uint64_t seed = 20240607;
};

/// 24 for S^3, 16 for S^4, 12 for S^5, 32 otherwise.
int reference_resolution(int m);

enum class CheckStatus { Pass, Fail, ResolutionLimited };

std::string status_name(CheckStatus s);

enum class Relation { Near, AtMost, Holds };

struct Check {
  std::string name;
  std::string source;  // module/operation behind the number
  Relation relation = Relation::Near;
  double value = 0.0;
  double expected = 0.0;   // Near only
  double tolerance = 0.0;  // |value - expected| for Near, upper bound for AtMost
  bool pass = false;
  bool quadrature = false; // accuracy depends on grid resolution
  std::string note;

  nlohmann::json to_json() const;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  CheckStatus status = CheckStatus::Fail;
  std::vector<Check> checks;
  double seconds = 0.0;

  /// Wall-clock fields are left out when `timings` is false.
  nlohmann::json to_json(bool timings = true) const;
};

inline constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, const SuiteConfig& config);

struct SuiteReport {
  std::vector<CriterionResult> rows;
  bool all_pass() const;
  /// True when some row failed outright; resolution-limited rows do not count.
  bool any_fail() const;
  nlohmann::json to_json(bool timings = true) const;
};

SuiteReport report_suite(const SuiteConfig& config);

}  // namespace sphvar
