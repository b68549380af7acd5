#pragma once

#include <functional>
#include <string>

#include "sparse_guarantees/dictionary.hpp"
#include "sparse_guarantees/estimators.hpp"

namespace sparse_guarantees {

enum class GuaranteeKind { AdversarialBpdn, Dantzig, Bpdn, BpdnExplicitGamma, Omp, Thresholding };

std::string_view to_string(GuaranteeKind kind);

/// Outcome of one closed-form guarantee. Violated conditions are reported
/// through `applies`, never thrown.
///
/// `sq_error_bound` is a squared l2 bound, except for AdversarialBpdn where it
/// is an l_inf bound on the error. `bound_coefficient` is the bound divided by
/// s sigma^2 ln m (by epsilon for AdversarialBpdn) so reports can be compared
/// across noise levels. All logarithms are natural.
struct GuaranteeReport {
  GuaranteeKind estimator;
  bool applies = false;
  double condition_lhs = 0.0;
  std::string condition_op;  // "<" or ">="
  double condition_rhs = 0.0;
  std::string parameter_name;  // "gamma", "tau" or "none"
  double parameter = 0.0;
  double success_probability = 0.0;
  double sq_error_bound = 0.0;
  double bound_coefficient = 0.0;
  /// Omp/Thresholding: the simplified 8(1+alpha) s sigma^2 ln m form.
  std::optional<double> sq_error_bound_relaxed;
  std::string notes;
};

/// sigma^2 trace((A_L^T A_L)^{-1}).
double crb(const Dictionary& dict, const IndexSet& support, double sigma);

/// Bounded noise ||w||_2 <= epsilon, gamma = 2 epsilon.
GuaranteeReport adversarial_bpdn_guarantee(double mu, Index s, double epsilon);

GuaranteeReport dantzig_guarantee(double mu, Index s, Index m, double sigma, double alpha);

/// Regularization from the recommended selector: sqrt(8 sigma^2 (1+alpha) ln(m-s)).
double recommended_gamma(Index m, Index s, double sigma, double alpha);
/// tau = sigma sqrt(2 (1+alpha) ln m).
double recommended_tau(Index m, double sigma, double alpha);

/// Guarantee with gamma from recommended_gamma().
GuaranteeReport bpdn_guarantee(double mu, Index s, Index m, double sigma, double alpha);
/// Same bound for an arbitrary gamma.
GuaranteeReport bpdn_guarantee_explicit(double mu, Index s, Index m, double sigma, double gamma);

struct GreedyReports {
  GuaranteeReport omp;
  GuaranteeReport thresholding;
};

GreedyReports greedy_guarantee(double mu, Index s, Index m, double sigma, double alpha,
                               double x_min, double x_max);

/// Largest sigma for which the OMP condition holds at the given alpha.
double omp_sigma_threshold(double mu, Index s, Index m, double alpha, double x_min);

/// Smallest alpha >= 0 whose success probability reaches `target`, found by
/// bisection on a probability that is nondecreasing in alpha. Returns 0 when
/// alpha = 0 already suffices, and nothing when even alpha = 1e3 does not.
std::optional<double> smallest_alpha(const std::function<double(double)>& probability,
                                     double target);

double snr(double signal_energy, Index n, double sigma);

/// max_i |a_i^T w| < tau.
bool event_b_holds(const Dictionary& dict, const Vector& w, double tau);

/// max_i |a_i^T (b - A_L LS(A_L, b))| <= gamma / 2, up to a 1e-12 ||b|| rounding floor.
bool event_g_holds(const Dictionary& dict, const IndexSet& support, const Vector& b, double gamma);

}  // namespace sparse_guarantees
