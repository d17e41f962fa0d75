#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace qnk {

struct CriterionResult {
  int id = 0;
  std::string name;
  /// Numerical conditions hold.
  bool values_ok = false;
  /// Wall-clock limit held (always true for criteria without one).
  bool runtime_ok = true;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;
  /// Deterministic artifact; never contains timings.
  std::string csv;

  bool pass() const { return values_ok && runtime_ok; }
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  /// Where per-criterion CSV files go; empty writes nothing.
  std::string output_dir;
  /// Criteria to run; empty runs all eleven.
  std::set<int> only;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_pass() const;
  /// id,name,values_ok per criterion.
  std::string summary_csv() const;
};

/// Runs one criterion (1..10). Criterion 11 needs the others and is handled by run_acceptance.
CriterionResult run_criterion(int id, std::uint64_t seed);

/// Runs the suite, writes artifacts, and for criterion 11 reruns criteria
/// 1..10 with 1 and 8 threads and compares every artifact byte for byte.
AcceptanceReport run_acceptance(const AcceptanceOptions& opts);

/// One line per criterion: "[PASS] 3 order-separation: ... (0.41 s)".
std::string format_result_line(const CriterionResult& r);

std::string criterion_file_name(int id);

}  // namespace qnk
