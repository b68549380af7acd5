// Dantzig selector as the LP
//
//   min 1^T u + 1^T v   s.t.   G(u - v) <= c + tau,   -G(u - v) <= tau - c,   u, v >= 0
//
// with G = A^T A and c = A^T b. Adding slacks y = h - K z turns the all-slack
// basis into a dual feasible starting point (every reduced cost is 1), so a
// dual simplex needs no phase one. A basis is described by the basic
// structural columns S and the rows R whose slacks are nonbasic; |S| = |R| and
// only the |S| x |S| core K[R, S] is ever factorized.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sparse_guarantees/estimators.hpp"

namespace sparse_guarantees {

namespace {

class GramColumns {
 public:
  GramColumns(const Matrix& a, const Matrix* full) : a_(a), full_(full) {
    if (!full_) cache_.resize(static_cast<std::size_t>(a.cols()));
  }

  // Column j of A^T A (equal to row j).
  const double* col(Index j) {
    if (full_) return full_->col(j).data();
    Vector& slot = cache_[static_cast<std::size_t>(j)];
    if (slot.size() == 0) slot = a_.transpose() * a_.col(j);
    return slot.data();
  }

 private:
  const Matrix& a_;
  const Matrix* full_;
  std::vector<Vector> cache_;
};

struct Candidate {
  bool structural;  // z_q if true, slack y_r otherwise
  Index position;   // position in S (structural) or the row index r (slack)
  double value;
  Index order;      // Bland ordering key
};

}  // namespace

Estimate dantzig_estimate(const Dictionary& dict, const Vector& b, double tau,
                          const DantzigOptions& options) {
  if (b.size() != dict.rows())
    throw Error(ErrorCode::InvalidArgument, "measurement length does not match dictionary rows");
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Dantzig selector needs tau >= 0");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "Dantzig needs tol > 0");
  const Matrix& a = dict.matrix();
  const Index m = dict.atoms();
  const Index vars = 2 * m;
  if (options.gram && (options.gram->rows() != m || options.gram->cols() != m))
    throw Error(ErrorCode::InvalidArgument, "supplied Gram matrix has the wrong size");

  const Vector c = a.transpose() * b;
  auto atom = [m](Index q) { return q < m ? q : q - m; };
  auto sign = [m](Index q) { return q < m ? 1.0 : -1.0; };
  Vector h(vars);
  for (Index r = 0; r < vars; ++r) h[r] = r < m ? c[r] + tau : tau - c[r - m];

  GramColumns gram(a, options.gram);
  const double ftol = options.tol;
  std::vector<Index> basic;   // S: structural columns, basic
  std::vector<Index> active;  // R: rows with nonbasic slack
  std::vector<char> in_basic(static_cast<std::size_t>(vars), 0);
  std::vector<char> in_active(static_cast<std::size_t>(vars), 0);

  bool bland = false;
  int stalled = 0;
  double last_objective = -1.0;

  Vector z_basic, pi, gx(m), dual_corr(m), w(m);
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Index k = static_cast<Index>(basic.size());
    Matrix core(k, k);
    for (Index i = 0; i < k; ++i) {
      const Index r = active[static_cast<std::size_t>(i)];
      const double* g = gram.col(atom(r));
      for (Index j = 0; j < k; ++j) {
        const Index q = basic[static_cast<std::size_t>(j)];
        core(i, j) = sign(r) * sign(q) * g[atom(q)];
      }
    }
    Eigen::PartialPivLU<Matrix> lu;
    if (k > 0) {
      lu.compute(core);
      if (!(lu.rcond() > 1e-14))
        throw Error(ErrorCode::NoConvergence, "Dantzig simplex basis became singular");
      Vector h_active(k);
      for (Index i = 0; i < k; ++i) h_active[i] = h[active[static_cast<std::size_t>(i)]];
      z_basic = lu.solve(h_active);
      pi = lu.transpose().solve(Vector::Ones(k));
    } else {
      z_basic.resize(0);
      pi.resize(0);
    }

    // Gx and the dual correlation sum_a pi_a s_{R_a} G[:, R_a].
    gx.setZero();
    dual_corr.setZero();
    for (Index j = 0; j < k; ++j) {
      const Index q = basic[static_cast<std::size_t>(j)];
      const double* g = gram.col(atom(q));
      const double coef = sign(q) * z_basic[j];
      for (Index i = 0; i < m; ++i) gx[i] += coef * g[i];
    }
    for (Index j = 0; j < k; ++j) {
      const Index r = active[static_cast<std::size_t>(j)];
      const double* g = gram.col(atom(r));
      const double coef = sign(r) * pi[j];
      for (Index i = 0; i < m; ++i) dual_corr[i] += coef * g[i];
    }

    const double objective = z_basic.sum();

    // Leaving variable: a primal-infeasible basic variable.
    std::optional<Candidate> leave;
    auto consider = [&](const Candidate& cand) {
      if (!leave) {
        leave = cand;
      } else if (bland ? cand.order < leave->order : cand.value < leave->value) {
        leave = cand;
      }
    };
    for (Index j = 0; j < k; ++j)
      if (z_basic[j] < -ftol) consider({true, j, z_basic[j], basic[static_cast<std::size_t>(j)]});
    for (Index r = 0; r < vars; ++r) {
      if (in_active[static_cast<std::size_t>(r)]) continue;
      const double slack = h[r] - sign(r) * gx[atom(r)];
      if (slack < -ftol) consider({false, r, slack, vars + r});
    }

    if (!leave) {
      Vector x = Vector::Zero(m);
      for (Index j = 0; j < k; ++j) {
        const Index q = basic[static_cast<std::size_t>(j)];
        x[atom(q)] += sign(q) * z_basic[j];
      }
      double dual_objective = 0.0;
      for (Index j = 0; j < k; ++j) dual_objective += pi[j] * h[active[static_cast<std::size_t>(j)]];
      const double violation =
          (a.transpose() * (b - a * x)).cwiseAbs().maxCoeff() - tau;
      Estimate est;
      est.detected_support = numerical_support(x);
      est.diagnostics.iterations = it;
      est.diagnostics.objective = x.lpNorm<1>();
      est.diagnostics.duality_gap = std::abs(x.lpNorm<1>() - dual_objective);
      est.diagnostics.feasibility_residual = std::max(violation, 0.0);
      est.coefficients = std::move(x);
      return est;
    }

    if (objective <= last_objective + 1e-14 * (1.0 + std::abs(objective))) {
      if (++stalled > 50) bland = true;
    } else {
      stalled = 0;
    }
    last_objective = objective;

    // Row of the tableau for the leaving variable: alpha over nonbasic
    // structurals (through w) and over nonbasic slacks (through rho).
    Vector rhs = Vector::Zero(k);
    const double* leave_col = nullptr;
    double leave_sign = 0.0;
    if (leave->structural) {
      rhs[leave->position] = 1.0;
    } else {
      leave_col = gram.col(atom(leave->position));
      leave_sign = sign(leave->position);
      for (Index j = 0; j < k; ++j) {
        const Index q = basic[static_cast<std::size_t>(j)];
        rhs[j] = leave_sign * sign(q) * leave_col[atom(q)];
      }
    }
    const Vector rho = k > 0 ? Vector(lu.transpose().solve(rhs)) : Vector(0);
    w.setZero();
    for (Index j = 0; j < k; ++j) {
      const Index r = active[static_cast<std::size_t>(j)];
      const double* g = gram.col(atom(r));
      const double coef = sign(r) * rho[j];
      for (Index i = 0; i < m; ++i) w[i] += coef * g[i];
    }
    auto alpha_structural = [&](Index q) {
      const Index i = atom(q);
      return leave->structural ? sign(q) * w[i] : sign(q) * (leave_sign * leave_col[i] - w[i]);
    };
    auto alpha_slack = [&](Index j) { return leave->structural ? rho[j] : -rho[j]; };

    double alpha_scale = 0.0;
    for (Index q = 0; q < vars; ++q)
      if (!in_basic[static_cast<std::size_t>(q)]) alpha_scale = std::max(alpha_scale, std::abs(alpha_structural(q)));
    for (Index j = 0; j < k; ++j) alpha_scale = std::max(alpha_scale, std::abs(alpha_slack(j)));
    const double ptol = std::max(1e-9 * alpha_scale, 1e-12);

    // Ratio test over nonbasic variables with alpha < 0.
    std::optional<Candidate> enter;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    auto offer = [&](bool structural, Index position, Index order, double alpha, double reduced) {
      if (alpha >= -ptol) return;
      const double ratio = std::max(reduced, 0.0) / -alpha;
      const double slack = 1e-12 * (1.0 + best_ratio);
      bool take = false;
      if (!enter || ratio < best_ratio - slack) {
        take = true;
      } else if (ratio <= best_ratio + slack) {
        take = bland ? order < enter->order : std::abs(alpha) > std::abs(best_alpha);
      }
      if (take) {
        enter = Candidate{structural, position, ratio, order};
        best_ratio = std::min(best_ratio, ratio);
        best_alpha = alpha;
      }
    };
    for (Index q = 0; q < vars; ++q) {
      if (in_basic[static_cast<std::size_t>(q)]) continue;
      offer(true, q, q, alpha_structural(q), 1.0 - sign(q) * dual_corr[atom(q)]);
    }
    for (Index j = 0; j < k; ++j)
      offer(false, j, vars + active[static_cast<std::size_t>(j)], alpha_slack(j), -pi[j]);
    if (!enter) throw Error(ErrorCode::Infeasible, "Dantzig selector LP is infeasible");

    // Pivot.
    if (!leave->structural && enter->structural) {
      basic.push_back(enter->position);
      active.push_back(leave->position);
      in_basic[static_cast<std::size_t>(enter->position)] = 1;
      in_active[static_cast<std::size_t>(leave->position)] = 1;
    } else if (!leave->structural && !enter->structural) {
      const auto pos = static_cast<std::size_t>(enter->position);
      in_active[static_cast<std::size_t>(active[pos])] = 0;
      active[pos] = leave->position;
      in_active[static_cast<std::size_t>(leave->position)] = 1;
    } else if (leave->structural && enter->structural) {
      const auto pos = static_cast<std::size_t>(leave->position);
      in_basic[static_cast<std::size_t>(basic[pos])] = 0;
      basic[pos] = enter->position;
      in_basic[static_cast<std::size_t>(enter->position)] = 1;
    } else {
      const auto bpos = static_cast<std::size_t>(leave->position);
      const auto apos = static_cast<std::size_t>(enter->position);
      in_basic[static_cast<std::size_t>(basic[bpos])] = 0;
      in_active[static_cast<std::size_t>(active[apos])] = 0;
      basic.erase(basic.begin() + static_cast<std::ptrdiff_t>(bpos));
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(apos));
    }
  }
  throw Error(ErrorCode::NoConvergence, "Dantzig simplex iteration cap reached");
}

}  // namespace sparse_guarantees
