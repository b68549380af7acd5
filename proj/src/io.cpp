#include "sparse_guarantees/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sparse_guarantees {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vector read_vector_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    double v = 0.0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
      throw Error(ErrorCode::InvalidSpec, "bad vector entry '" + line + "' in " + path.string());
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::InvalidSpec, "empty vector file " + path.string());
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

std::string format_vector_csv(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    out += format_double(v[i]);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::ordered_json to_json(const GuaranteeReport& r) {
  nlohmann::ordered_json j;
  j["estimator"] = std::string(to_string(r.estimator));
  j["applies"] = r.applies;
  j["condition_lhs"] = number(r.condition_lhs);
  j["condition_op"] = r.condition_op;
  j["condition_rhs"] = number(r.condition_rhs);
  j["parameter_name"] = r.parameter_name;
  j["parameter"] = number(r.parameter);
  j["success_probability"] = number(r.success_probability);
  j["sq_error_bound"] = number(r.sq_error_bound);
  j["bound_coefficient"] = number(r.bound_coefficient);
  j["sq_error_bound_relaxed"] =
      r.sq_error_bound_relaxed ? number(*r.sq_error_bound_relaxed) : nlohmann::ordered_json(nullptr);
  j["notes"] = r.notes;
  return j;
}

nlohmann::ordered_json to_json(const Estimate& e) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json coef = nlohmann::ordered_json::array();
  for (Index i = 0; i < e.coefficients.size(); ++i) coef.push_back(number(e.coefficients[i]));
  j["coefficients"] = std::move(coef);
  j["support"] = e.detected_support;
  nlohmann::ordered_json diag;
  diag["iterations"] = e.diagnostics.iterations;
  auto opt = [](const std::optional<double>& v) {
    return v ? number(*v) : nlohmann::ordered_json(nullptr);
  };
  diag["duality_gap"] = opt(e.diagnostics.duality_gap);
  diag["objective"] = opt(e.diagnostics.objective);
  diag["feasibility_residual"] = opt(e.diagnostics.feasibility_residual);
  j["diagnostics"] = std::move(diag);
  return j;
}

}  // namespace sparse_guarantees
