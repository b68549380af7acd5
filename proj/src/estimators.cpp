#include "sparse_guarantees/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sparse_guarantees {

SparseSignal::SparseSignal(Index dimension, IndexSet support, Vector values)
    : dimension_(dimension), support_(std::move(support)), values_(std::move(values)) {
  if (static_cast<Index>(support_.size()) != values_.size())
    throw Error(ErrorCode::InvalidArgument, "signal support and values differ in length");
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (support_[k] < 0 || support_[k] >= dimension_)
      throw Error(ErrorCode::IndexOutOfRange, "signal support index " + std::to_string(support_[k]));
    if (k > 0 && support_[k] <= support_[k - 1])
      throw Error(ErrorCode::InvalidArgument, "signal support must be sorted and unique");
    if (values_[static_cast<Index>(k)] == 0.0)
      throw Error(ErrorCode::InvalidArgument, "signal values on the support must be nonzero");
  }
}

double SparseSignal::x_min() const {
  if (values_.size() == 0) throw Error(ErrorCode::EmptyInput, "x_min of empty signal");
  return values_.cwiseAbs().minCoeff();
}

double SparseSignal::x_max() const {
  if (values_.size() == 0) throw Error(ErrorCode::EmptyInput, "x_max of empty signal");
  return values_.cwiseAbs().maxCoeff();
}

Vector SparseSignal::dense() const {
  Vector x = Vector::Zero(dimension_);
  for (std::size_t k = 0; k < support_.size(); ++k) x[support_[k]] = values_[static_cast<Index>(k)];
  return x;
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Oracle: return "oracle";
    case EstimatorKind::Thresholding: return "thresholding";
    case EstimatorKind::Omp: return "omp";
    case EstimatorKind::Bpdn: return "bpdn";
    case EstimatorKind::Dantzig: return "dantzig";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  for (auto kind : {EstimatorKind::Oracle, EstimatorKind::Thresholding, EstimatorKind::Omp,
                    EstimatorKind::Bpdn, EstimatorKind::Dantzig})
    if (name == to_string(kind)) return kind;
  if (name == "ds") return EstimatorKind::Dantzig;
  return std::nullopt;
}

IndexSet numerical_support(const Vector& x) {
  IndexSet out;
  if (x.size() == 0) return out;
  const double cutoff = kSupportTolerance * x.cwiseAbs().maxCoeff();
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > cutoff) out.push_back(i);
  return out;
}

Vector soft_threshold(const Vector& x, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "soft_threshold needs t >= 0");
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
  return out;
}

namespace {

void check_measurements(const Dictionary& dict, const Vector& b) {
  if (b.size() != dict.rows())
    throw Error(ErrorCode::InvalidArgument, "measurement length " + std::to_string(b.size()) +
                                                " does not match dictionary rows " +
                                                std::to_string(dict.rows()));
  if (!b.allFinite()) throw Error(ErrorCode::InvalidArgument, "measurements are not finite");
}

// LS refit on a sorted support, scattered into an m-vector.
Vector refit(const Dictionary& dict, const Vector& b, const IndexSet& support) {
  const Vector local = least_squares(subdictionary(dict, support), b);
  Vector x = Vector::Zero(dict.atoms());
  for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = local[static_cast<Index>(k)];
  return x;
}

Estimate finish(Vector x, int iterations) {
  Estimate est;
  est.detected_support = numerical_support(x);
  est.coefficients = std::move(x);
  est.diagnostics.iterations = iterations;
  return est;
}

void check_sparsity(const Dictionary& dict, Index s) {
  if (s < 1 || s > dict.rows())
    throw Error(ErrorCode::InvalidArgument, "sparsity must satisfy 1 <= s <= n");
}

}  // namespace

Estimate oracle_estimate(const Dictionary& dict, const Vector& b, const IndexSet& support) {
  check_measurements(dict, b);
  return finish(refit(dict, b, support), 0);
}

Estimate thresholding_estimate(const Dictionary& dict, const Vector& b, Index s) {
  check_measurements(dict, b);
  check_sparsity(dict, s);
  const Vector corr = (dict.matrix().transpose() * b).cwiseAbs();
  IndexSet order(static_cast<std::size_t>(dict.atoms()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + s, order.end(), [&](Index i, Index j) {
    return corr[i] > corr[j] || (corr[i] == corr[j] && i < j);
  });
  IndexSet support(order.begin(), order.begin() + s);
  std::sort(support.begin(), support.end());
  return finish(refit(dict, b, support), 1);
}

Estimate omp_estimate(const Dictionary& dict, const Vector& b, Index s) {
  check_measurements(dict, b);
  check_sparsity(dict, s);
  const Matrix& a = dict.matrix();
  std::vector<bool> chosen(static_cast<std::size_t>(dict.atoms()), false);
  IndexSet support;
  Vector x = Vector::Zero(dict.atoms());
  Vector residual = b;
  const double floor = 1e-14 * std::max(b.norm(), 1e-300);
  int rounds = 0;
  for (Index it = 0; it < s; ++it) {
    const Vector corr = a.transpose() * residual;
    Index best = -1;
    double best_value = -1.0;
    for (Index i = 0; i < corr.size(); ++i) {
      if (chosen[static_cast<std::size_t>(i)]) continue;
      const double v = std::abs(corr[i]);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    // Residual already orthogonal to every atom: nothing left to explain.
    if (best < 0 || best_value <= floor) break;
    chosen[static_cast<std::size_t>(best)] = true;
    support.insert(std::upper_bound(support.begin(), support.end(), best), best);
    x = refit(dict, b, support);
    residual = b - a * x;
    ++rounds;
  }
  return finish(std::move(x), rounds);
}

namespace {

struct GapResult {
  double primal;
  double gap;
};

// Primal value and duality gap at x against nu = r min(1, gamma / ||A^T r||_inf).
GapResult bpdn_gap(const Vector& b, const Vector& residual, const Vector& corr, const Vector& x,
                   double gamma) {
  const double primal = 0.5 * residual.squaredNorm() + gamma * x.lpNorm<1>();
  const double corr_max = corr.size() ? corr.cwiseAbs().maxCoeff() : 0.0;
  const double scale = corr_max > gamma ? gamma / corr_max : 1.0;
  const Vector nu = scale * residual;
  const double dual = b.dot(nu) - 0.5 * nu.squaredNorm();
  return {primal, std::max(primal - dual, 0.0)};
}

// Largest violation of the optimality conditions, relative to gamma:
// |a_i^T r| <= gamma everywhere, a_i^T r = gamma sign(x_i) on the support.
double bpdn_kkt(const Vector& corr, const Vector& x, double gamma) {
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x[i] == 0.0 ? std::abs(corr[i]) - gamma
                                 : std::abs(corr[i] - (x[i] > 0.0 ? gamma : -gamma));
    worst = std::max(worst, v);
  }
  return worst / gamma;
}

// Exact minimizer assuming the support and signs of `x` are final. Returns
// nothing when the resulting point breaks sign consistency.
std::optional<Vector> polish_on_support(const Dictionary& dict, const Vector& b, const Vector& x,
                                        double gamma) {
  const IndexSet support = [&] {
    IndexSet s;
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) s.push_back(i);
    return s;
  }();
  const Index k = static_cast<Index>(support.size());
  if (k == 0 || k > dict.rows()) return std::nullopt;
  const Matrix a_sub = subdictionary(dict, support);
  const Eigen::HouseholderQR<Matrix> qr(a_sub);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) return std::nullopt;
  Vector sign(k);
  for (Index j = 0; j < k; ++j) sign[j] = x[support[static_cast<std::size_t>(j)]] > 0 ? 1.0 : -1.0;
  const auto r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Vector shrink = r.solve(r.transpose().solve(sign));
  const Vector local = qr.solve(b) - gamma * shrink;
  Vector out = Vector::Zero(x.size());
  for (Index j = 0; j < k; ++j) {
    if (local[j] * sign[j] <= 0.0) return std::nullopt;
    out[support[static_cast<std::size_t>(j)]] = local[j];
  }
  return out;
}

}  // namespace

Estimate bpdn_estimate(const Dictionary& dict, const Vector& b, double gamma,
                       const BpdnOptions& options) {
  check_measurements(dict, b);
  if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "BPDN needs gamma > 0");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "BPDN needs tol > 0");
  const Matrix& a = dict.matrix();
  const Index m = dict.atoms();

  Vector x = Vector::Zero(m);
  Vector ax = Vector::Zero(dict.rows());
  // Duality gap alone leaves the subgradient loose; also require KKT.
  constexpr double kKktTol = 1e-7;
  auto converged = [&](const GapResult& g, const Vector& corr, const Vector& coef) {
    return g.gap <= std::max(options.tol * std::abs(g.primal), 1e-12) && bpdn_kkt(corr, coef, gamma) <= kKktTol;
  };
  auto done = [&](Vector coef, const GapResult& g, int iterations) {
    Estimate est = finish(std::move(coef), iterations);
    est.diagnostics.duality_gap = g.gap;
    est.diagnostics.objective = g.primal;
    return est;
  };

  {
    const Vector corr = a.transpose() * b;
    const GapResult g = bpdn_gap(b, b, corr, x, gamma);
    if (converged(g, corr, x)) return done(std::move(x), g, 0);
  }

  const double lipschitz = options.lipschitz ? *options.lipschitz : operator_norm_sq(a);
  const double step = 1.0 / lipschitz;
  Vector y = x;
  Vector ay = ax;
  double t = 1.0;
  IndexSet last_support;
  constexpr int kCheckEvery = 5;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector grad = a.transpose() * (ay - b);
    Vector x_next = soft_threshold(y - step * grad, gamma * step);
    Vector ax_next = a * x_next;

    // Gradient-based adaptive restart.
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - x_next).dot(x_next - x) > 0.0) {
      t = 1.0;
      t_next = 1.0;
    }
    const double beta = (t - 1.0) / t_next;
    y = x_next + beta * (x_next - x);
    ay = ax_next + beta * (ax_next - ax);
    t = t_next;
    x = std::move(x_next);
    ax = std::move(ax_next);

    if (it % kCheckEvery != 0 && it != options.max_iterations) continue;
    const Vector residual = b - ax;
    const Vector corr = a.transpose() * residual;
    const GapResult g = bpdn_gap(b, residual, corr, x, gamma);
    if (converged(g, corr, x)) return done(std::move(x), g, it);

    IndexSet support;
    for (Index i = 0; i < m; ++i)
      if (x[i] != 0.0) support.push_back(i);
    if (!support.empty() && support == last_support) {
      if (auto polished = polish_on_support(dict, b, x, gamma)) {
        const Vector p_res = b - a * *polished;
        const Vector p_corr = a.transpose() * p_res;
        const GapResult pg = bpdn_gap(b, p_res, p_corr, *polished, gamma);
        if (converged(pg, p_corr, *polished)) return done(std::move(*polished), pg, it);
      }
    }
    last_support = std::move(support);
  }
  throw Error(ErrorCode::NoConvergence, "BPDN iteration cap reached");
}

}  // namespace sparse_guarantees
