#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace sparse_guarantees {

/// Exit codes: 0 success, 1 validation error, 2 solver failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Applies "a.b.c=value" overrides; value is parsed as JSON, else taken as a string.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

}  // namespace sparse_guarantees
