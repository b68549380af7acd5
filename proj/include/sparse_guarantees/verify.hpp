#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sparse_guarantees {

struct VerifyOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  /// Optional dictionary file; its coherence and normalization are reported.
  std::optional<std::filesystem::path> dictionary_path;
  /// Trials of the oracle-vs-CRB Monte Carlo check.
  int crb_trials = 2000;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Coherence-bound checks by brute force, solver certificates and the
/// oracle-vs-CRB Monte Carlo check. One PASS/FAIL line per check on `out`.
std::vector<CheckResult> run_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace sparse_guarantees
