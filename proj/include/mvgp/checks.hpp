#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvgp::checks {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;  // deterministic given the seed (no timings)
  double seconds;      // wall time, excluded from printed reports
};

/// The full property suite over all modules: matrix-normal/vec
/// equivalence, conditioning oracles, process moment identities,
/// stationarity and independence, pre-Brownian diagnostics, the
/// regression displays, likelihood gradients, and synthetic recovery.
std::vector<CheckResult> run_all_checks(std::uint64_t seed);

/// Render one-line-per-check text (PASS/FAIL name: detail).
std::string render_report(const std::vector<CheckResult>& results,
                          bool with_timing);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace mvgp::checks
