#pragma once

#include <optional>
#include <string_view>

#include "sparse_guarantees/dictionary.hpp"
#include "sparse_guarantees/numerics.hpp"

namespace sparse_guarantees {

/// Ground-truth s-sparse vector x0 stored by its support.
class SparseSignal {
 public:
  /// `support` must be sorted and unique, values nonzero.
  SparseSignal(Index dimension, IndexSet support, Vector values);

  Index dimension() const noexcept { return dimension_; }
  const IndexSet& support() const noexcept { return support_; }
  const Vector& values() const noexcept { return values_; }
  Index sparsity() const noexcept { return static_cast<Index>(support_.size()); }

  double x_min() const;
  double x_max() const;
  double energy() const { return values_.squaredNorm(); }
  Vector dense() const;

 private:
  Index dimension_;
  IndexSet support_;
  Vector values_;
};

enum class EstimatorKind { Oracle, Thresholding, Omp, Bpdn, Dantzig };

std::string_view to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(std::string_view name);

struct SolverDiagnostics {
  int iterations = 0;
  std::optional<double> duality_gap;
  std::optional<double> objective;
  /// Dantzig only: max(0, ||A^T(b - Ax)||_inf - tau).
  std::optional<double> feasibility_residual;
};

struct Estimate {
  Vector coefficients;
  IndexSet detected_support;
  SolverDiagnostics diagnostics;
};

inline constexpr double kSupportTolerance = 1e-8;

/// Indices with |x_i| > kSupportTolerance * max_j |x_j|.
IndexSet numerical_support(const Vector& x);

/// Componentwise sign(x_i) max(|x_i| - t, 0).
Vector soft_threshold(const Vector& x, double t);

/// Least squares restricted to `support`, zero elsewhere.
Estimate oracle_estimate(const Dictionary& dict, const Vector& b, const IndexSet& support);

/// The s atoms most correlated with b (ties to the lowest index), then LS.
Estimate thresholding_estimate(const Dictionary& dict, const Vector& b, Index s);

/// s rounds of orthogonal matching pursuit with a full LS refit per round.
Estimate omp_estimate(const Dictionary& dict, const Vector& b, Index s);

struct BpdnOptions {
  /// Relative duality-gap target; the absolute floor is 1e-12.
  double tol = 1e-10;
  int max_iterations = 100000;
  /// lambda_max(A^T A) if already known; computed otherwise.
  std::optional<double> lipschitz;
};

/// min 1/2 ||b - Ax||^2 + gamma ||x||_1 by accelerated proximal gradient.
Estimate bpdn_estimate(const Dictionary& dict, const Vector& b, double gamma,
                       const BpdnOptions& options = {});

struct DantzigOptions {
  /// Primal feasibility tolerance of the simplex iterates.
  double tol = 1e-9;
  int max_iterations = 100000;
  /// A^T A if already formed; columns are computed on demand otherwise.
  const Matrix* gram = nullptr;
};

/// min ||x||_1 s.t. ||A^T(b - Ax)||_inf <= tau, as an LP in x = u - v.
Estimate dantzig_estimate(const Dictionary& dict, const Vector& b, double tau,
                          const DantzigOptions& options = {});

}  // namespace sparse_guarantees
