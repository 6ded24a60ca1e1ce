// Acceptance suite: runs every criterion of the property suite at a fixed
// seed and prints one pass/fail line per criterion.

#include "mvgp/checks.hpp"

#include <cstdint>
#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  std::uint64_t seed = 20240ULL;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  auto results = mvgp::checks::run_all_checks(seed);
  std::cout << mvgp::checks::render_report(results, /*with_timing=*/true);
  if (!mvgp::checks::all_passed(results)) {
    std::cout << "ACCEPTANCE FAILED\n";
    return 1;
  }
  std::cout << "acceptance: all criteria passed\n";
  return 0;
}
