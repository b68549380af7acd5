#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sparse_guarantees/estimators.hpp"
#include "sparse_guarantees/guarantees.hpp"

namespace sparse_guarantees {

/// Shortest decimal string that parses back to exactly `v` ("nan", "inf",
/// "-inf" for non-finite values). Locale independent.
std::string format_double(double v);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// One value per line; blank lines skipped.
Vector read_vector_csv(const std::filesystem::path& path);
std::string format_vector_csv(const Vector& v);

/// Flat object, fields in declaration order; non-finite numbers become null.
nlohmann::ordered_json to_json(const GuaranteeReport& report);
nlohmann::ordered_json to_json(const Estimate& estimate);

}  // namespace sparse_guarantees
