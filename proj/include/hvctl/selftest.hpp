#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hvctl {

struct SuiteResult {
  std::string name;
  bool passed = false;
  /// Distance to the failure threshold; negative when the suite fails.
  double margin = 0.0;
  std::string detail;
};

struct SelftestOptions {
  /// Added to every gamma_n before the Gramian comparison (sensitivity check).
  double gramian_perturbation = 0.0;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// Oracle suites: gramian, resolvent, clarke, ito, residuals, terminal_identity.
std::vector<SuiteResult> run_selftest(const SelftestOptions& options = {});

/// Prints one line per suite and returns 0 iff all pass, 1 otherwise.
int cmd_selftest(const SelftestOptions& options, std::ostream& out);

}  // namespace hvctl
