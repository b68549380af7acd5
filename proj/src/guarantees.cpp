#include "sparse_guarantees/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sparse_guarantees {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ln(double v) { return std::log(v); }

// Clamps to [0, 1]; a negative closed form is noted as vacuous.
double clamp_probability(double p, std::string& notes) {
  if (p < 0.0) {
    if (!notes.empty()) notes += "; ";
    notes += "probability bound is vacuous (closed form below 0)";
    return 0.0;
  }
  return std::min(p, 1.0);
}

void add_note(std::string& notes, const std::string& text) {
  if (!notes.empty()) notes += "; ";
  notes += text;
}

double safe_inverse(double v) { return v > 0.0 ? 1.0 / v : kInf; }

void check_common(Index s, Index m, double sigma, double alpha) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "guarantee needs s >= 1");
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "guarantee needs m >= 2");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "guarantee needs sigma >= 0");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "guarantee needs alpha >= 0");
}

}  // namespace

std::string_view to_string(GuaranteeKind kind) {
  switch (kind) {
    case GuaranteeKind::AdversarialBpdn: return "adversarial_bpdn";
    case GuaranteeKind::Dantzig: return "dantzig";
    case GuaranteeKind::Bpdn: return "bpdn";
    case GuaranteeKind::BpdnExplicitGamma: return "bpdn_explicit_gamma";
    case GuaranteeKind::Omp: return "omp";
    case GuaranteeKind::Thresholding: return "thresholding";
  }
  return "unknown";
}

double crb(const Dictionary& dict, const IndexSet& support, double sigma) {
  return sigma * sigma * inverse_gram_trace(subdictionary(dict, support));
}

GuaranteeReport adversarial_bpdn_guarantee(double mu, Index s, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  GuaranteeReport rep;
  rep.estimator = GuaranteeKind::AdversarialBpdn;
  rep.condition_lhs = static_cast<double>(s);
  rep.condition_op = "<";
  rep.condition_rhs = safe_inverse(3.0 * mu);
  rep.applies = rep.condition_lhs < rep.condition_rhs;
  rep.parameter_name = "gamma";
  rep.parameter = 2.0 * epsilon;
  rep.success_probability = 1.0;
  rep.bound_coefficient = 3.0 + std::sqrt(1.5);
  rep.sq_error_bound = rep.bound_coefficient * epsilon;
  rep.notes = "l_inf error bound; support of the estimate lies inside the true support";
  return rep;
}

double recommended_tau(Index m, double sigma, double alpha) {
  return sigma * std::sqrt(2.0 * (1.0 + alpha) * ln(static_cast<double>(m)));
}

double recommended_gamma(Index m, Index s, double sigma, double alpha) {
  return std::sqrt(8.0 * sigma * sigma * (1.0 + alpha) * ln(static_cast<double>(m - s)));
}

GuaranteeReport dantzig_guarantee(double mu, Index s, Index m, double sigma, double alpha) {
  check_common(s, m, sigma, alpha);
  const double log_m = ln(static_cast<double>(m));
  const double sd = static_cast<double>(s);
  GuaranteeReport rep;
  rep.estimator = GuaranteeKind::Dantzig;
  rep.condition_lhs = sd;
  rep.condition_op = "<";
  rep.condition_rhs = 1.0 + safe_inverse((1.0 + std::numbers::sqrt2) * mu);
  rep.applies = rep.condition_lhs < rep.condition_rhs;
  rep.parameter_name = "tau";
  rep.parameter = recommended_tau(m, sigma, alpha);
  rep.success_probability = clamp_probability(
      1.0 - 1.0 / (std::pow(static_cast<double>(m), alpha) * std::sqrt(std::numbers::pi * log_m)),
      rep.notes);
  const double denom = 1.0 - ((1.0 + std::numbers::sqrt2) * sd - 1.0) * mu;
  if (denom <= 0.0) {
    rep.bound_coefficient = kInf;
    rep.sq_error_bound = kInf;
    add_note(rep.notes, "c1 denominator is not positive; bound is vacuous");
  } else {
    const double c1 = 4.0 / denom;
    rep.bound_coefficient = 2.0 * c1 * c1 * (1.0 + alpha);
    rep.sq_error_bound = rep.bound_coefficient * sd * sigma * sigma * log_m;
  }
  return rep;
}

GuaranteeReport bpdn_guarantee(double mu, Index s, Index m, double sigma, double alpha) {
  check_common(s, m, sigma, alpha);
  if (m - s < 2) throw Error(ErrorCode::InvalidArgument, "BPDN guarantee needs m - s >= 2");
  const double sd = static_cast<double>(s);
  const double log_ms = ln(static_cast<double>(m - s));
  GuaranteeReport rep;
  rep.estimator = GuaranteeKind::Bpdn;
  rep.condition_lhs = sd;
  rep.condition_op = "<";
  rep.condition_rhs = safe_inverse(3.0 * mu);
  rep.applies = rep.condition_lhs < rep.condition_rhs;
  rep.parameter_name = "gamma";
  rep.parameter = recommended_gamma(m, s, sigma, alpha);
  rep.success_probability = clamp_probability(
      (1.0 - std::pow(static_cast<double>(m - s), -alpha)) * (1.0 - std::exp(-sd / 7.0)),
      rep.notes);
  const double root = std::sqrt(3.0) + 3.0 * std::sqrt(2.0 * (1.0 + alpha) * log_ms);
  rep.sq_error_bound = root * root * sd * sigma * sigma;
  rep.bound_coefficient = root * root / ln(static_cast<double>(m));
  return rep;
}

GuaranteeReport bpdn_guarantee_explicit(double mu, Index s, Index m, double sigma, double gamma) {
  check_common(s, m, sigma, 0.0);
  if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "explicit BPDN guarantee needs gamma > 0");
  const double sd = static_cast<double>(s);
  GuaranteeReport rep;
  rep.estimator = GuaranteeKind::BpdnExplicitGamma;
  rep.condition_lhs = sd;
  rep.condition_op = "<";
  rep.condition_rhs = safe_inverse(3.0 * mu);
  rep.applies = rep.condition_lhs < rep.condition_rhs;
  rep.parameter_name = "gamma";
  rep.parameter = gamma;
  const double tail =
      sigma > 0.0 ? static_cast<double>(m - s) * std::exp(-gamma * gamma / (8.0 * sigma * sigma)) : 0.0;
  rep.success_probability =
      clamp_probability((1.0 - tail) * (1.0 - std::exp(-sd / 7.0)), rep.notes);
  const double root = sigma * std::sqrt(3.0) + 1.5 * gamma;
  rep.sq_error_bound = root * root * sd;
  const double scale = sd * sigma * sigma * ln(static_cast<double>(m));
  rep.bound_coefficient = scale > 0.0 ? rep.sq_error_bound / scale : kInf;
  return rep;
}

GreedyReports greedy_guarantee(double mu, Index s, Index m, double sigma, double alpha,
                               double x_min, double x_max) {
  check_common(s, m, sigma, alpha);
  if (!(x_min > 0.0 && x_min <= x_max))
    throw Error(ErrorCode::InvalidArgument, "greedy guarantee needs 0 < x_min <= x_max");
  const double sd = static_cast<double>(s);
  const double log_m = ln(static_cast<double>(m));
  const double rhs = 2.0 * sigma * std::sqrt(2.0 * (1.0 + alpha) * log_m);
  const double spread = (2.0 * sd - 1.0) * mu;

  GuaranteeReport base;
  base.condition_op = ">=";
  base.condition_rhs = rhs;
  base.parameter_name = "none";
  base.success_probability = clamp_probability(
      1.0 - 1.0 / (std::pow(static_cast<double>(m), alpha) *
                   std::sqrt(std::numbers::pi * (1.0 + alpha) * log_m)),
      base.notes);
  const double gershgorin_lo = 1.0 - (sd - 1.0) * mu;
  if (gershgorin_lo <= 0.0) {
    base.bound_coefficient = kInf;
    base.sq_error_bound = kInf;
    add_note(base.notes, "1 - (s-1) mu is not positive; bound is vacuous");
  } else {
    base.bound_coefficient = 2.0 * (1.0 + alpha) / (gershgorin_lo * gershgorin_lo);
    base.sq_error_bound = base.bound_coefficient * sd * sigma * sigma * log_m;
  }
  base.sq_error_bound_relaxed = 8.0 * (1.0 + alpha) * sd * sigma * sigma * log_m;

  GreedyReports out{base, base};
  out.omp.estimator = GuaranteeKind::Omp;
  out.omp.condition_lhs = x_min - spread * x_min;
  out.omp.applies = out.omp.condition_lhs >= rhs;
  out.thresholding.estimator = GuaranteeKind::Thresholding;
  out.thresholding.condition_lhs = x_min - spread * x_max;
  out.thresholding.applies = out.thresholding.condition_lhs >= rhs;
  if (out.thresholding.condition_lhs <= 0.0)
    add_note(out.thresholding.notes, "condition fails for every sigma");
  if (out.omp.condition_lhs <= 0.0) add_note(out.omp.notes, "condition fails for every sigma");
  return out;
}

double omp_sigma_threshold(double mu, Index s, Index m, double alpha, double x_min) {
  const double lhs = x_min * (1.0 - (2.0 * static_cast<double>(s) - 1.0) * mu);
  if (lhs <= 0.0) return 0.0;
  return lhs / (2.0 * std::sqrt(2.0 * (1.0 + alpha) * ln(static_cast<double>(m))));
}

std::optional<double> smallest_alpha(const std::function<double(double)>& probability,
                                     double target) {
  if (probability(0.0) >= target) return 0.0;
  double lo = 0.0;
  double hi = 1e3;
  if (probability(hi) < target) return std::nullopt;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (probability(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double snr(double signal_energy, Index n, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "SNR needs sigma > 0");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "SNR needs n >= 1");
  return signal_energy / (static_cast<double>(n) * sigma * sigma);
}

bool event_b_holds(const Dictionary& dict, const Vector& w, double tau) {
  if (w.size() != dict.rows()) throw Error(ErrorCode::InvalidArgument, "noise length mismatch");
  return (dict.matrix().transpose() * w).cwiseAbs().maxCoeff() < tau;
}

bool event_g_holds(const Dictionary& dict, const IndexSet& support, const Vector& b, double gamma) {
  if (b.size() != dict.rows()) throw Error(ErrorCode::InvalidArgument, "measurement length mismatch");
  const Matrix a_sub = subdictionary(dict, support);
  const Vector residual = b - a_sub * least_squares(a_sub, b);
  // Rounding floor so that b in span(A_L) satisfies the event at gamma = 0.
  const double floor = 1e-12 * b.norm();
  return (dict.matrix().transpose() * residual).cwiseAbs().maxCoeff() <= 0.5 * gamma + floor;
}

}  // namespace sparse_guarantees
