#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's numerics; they trade speed for obviousness.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Idx = Eigen::Index;

// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline std::vector<double> jacobi_eigenvalues(Mat a) {
  const Idx n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Idx i = 0; i < n; ++i)
      for (Idx j = 0; j < n; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Idx p = 0; p < n; ++p) {
      for (Idx q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Idx k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Idx k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Idx i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Gaussian elimination with partial pivoting; empty result when singular.
inline Vec solve(Mat a, Vec b, double pivot_tol = 1e-12) {
  const Idx n = a.rows();
  double scale = 0.0;
  for (Idx i = 0; i < n; ++i)
    for (Idx j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  for (Idx k = 0; k < n; ++k) {
    Idx piv = k;
    for (Idx i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= pivot_tol * std::max(scale, 1.0)) return Vec();
    a.row(k).swap(a.row(piv));
    std::swap(b[k], b[piv]);
    for (Idx i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (Idx j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n);
  for (Idx i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (Idx j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

inline Mat gram(const Mat& a) {
  Mat g(a.cols(), a.cols());
  for (Idx i = 0; i < a.cols(); ++i)
    for (Idx j = 0; j < a.cols(); ++j) {
      double acc = 0.0;
      for (Idx k = 0; k < a.rows(); ++k) acc += a(k, i) * a(k, j);
      g(i, j) = acc;
    }
  return g;
}

// Least squares through the normal equations.
inline Vec normal_equations_ls(const Mat& a, const Vec& b) {
  Vec atb(a.cols());
  for (Idx i = 0; i < a.cols(); ++i) {
    double acc = 0.0;
    for (Idx k = 0; k < a.rows(); ++k) acc += a(k, i) * b[k];
    atb[i] = acc;
  }
  return solve(gram(a), atb);
}

inline double pair_scan_coherence(const Mat& a) {
  double mu = 0.0;
  for (Idx i = 0; i < a.cols(); ++i)
    for (Idx j = 0; j < a.cols(); ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (Idx k = 0; k < a.rows(); ++k) dot += a(k, i) * a(k, j);
      mu = std::max(mu, std::abs(dot));
    }
  return mu;
}

// Unnormalized Sylvester Hadamard entry: (-1)^{popcount(i & j)}.
inline double hadamard_entry(unsigned i, unsigned j) {
  return (__builtin_popcount(i & j) % 2 == 0) ? 1.0 : -1.0;
}

inline void for_each_subset(Idx m, Idx s, const std::function<void(const std::vector<Idx>&)>& fn) {
  std::vector<Idx> idx(static_cast<std::size_t>(s));
  for (Idx k = 0; k < s; ++k) idx[static_cast<std::size_t>(k)] = k;
  if (s > m) return;
  for (;;) {
    fn(idx);
    Idx k = s - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - s + k) --k;
    if (k < 0) return;
    ++idx[static_cast<std::size_t>(k)];
    for (Idx j = k + 1; j < s; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline Mat columns(const Mat& a, const std::vector<Idx>& cols) {
  Mat out(a.rows(), static_cast<Idx>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Idx>(k)) = a.col(cols[k]);
  return out;
}

inline double ric(const Mat& a, Idx s) {
  double delta = 0.0;
  for_each_subset(a.cols(), s, [&](const std::vector<Idx>& sub) {
    const auto ev = jacobi_eigenvalues(gram(columns(a, sub)));
    delta = std::max({delta, ev.back() - 1.0, 1.0 - ev.front()});
  });
  return delta;
}

inline double rop(const Mat& a, Idx s1, Idx s2) {
  double theta = 0.0;
  for_each_subset(a.cols(), s1, [&](const std::vector<Idx>& l1) {
    for_each_subset(a.cols(), s2, [&](const std::vector<Idx>& l2) {
      for (Idx i : l1)
        if (std::find(l2.begin(), l2.end(), i) != l2.end()) return;
      const Mat cross = columns(a, l1).transpose() * columns(a, l2);
      const auto ev = jacobi_eigenvalues(cross.transpose() * cross);
      theta = std::max(theta, std::sqrt(std::max(ev.back(), 0.0)));
    });
  });
  return theta;
}

inline double bpdn_objective(const Mat& a, const Vec& b, const Vec& x, double gamma) {
  return 0.5 * (b - a * x).squaredNorm() + gamma * x.lpNorm<1>();
}

// Cyclic coordinate descent; stops once the duality gap is below `gap_tol`.
inline Vec bpdn_coordinate_descent(const Mat& a, const Vec& b, double gamma, double gap_tol = 1e-12,
                                   int max_sweeps = 200000) {
  const Idx m = a.cols();
  Vec x = Vec::Zero(m);
  Vec r = b;
  Vec norms(m);
  for (Idx j = 0; j < m; ++j) norms[j] = a.col(j).squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Idx j = 0; j < m; ++j) {
      const double rho = a.col(j).dot(r) + norms[j] * x[j];
      const double nx = (rho > gamma ? rho - gamma : rho < -gamma ? rho + gamma : 0.0) / norms[j];
      if (nx != x[j]) {
        r -= (nx - x[j]) * a.col(j);
        x[j] = nx;
      }
    }
    const double corr = (a.transpose() * r).cwiseAbs().maxCoeff();
    const Vec nu = r * std::min(1.0, gamma / std::max(corr, 1e-300));
    const double primal = 0.5 * r.squaredNorm() + gamma * x.lpNorm<1>();
    const double dual = 0.5 * b.squaredNorm() - 0.5 * (b - nu).squaredNorm();
    if (primal - dual <= gap_tol) break;
  }
  return x;
}

// min ||x||_1 s.t. |A^T(b - Ax)| <= tau, by enumerating every vertex formed
// from the 3m hyperplanes {x_i = 0} and {(Gx)_i = c_i +- tau}. In each orthant
// the objective is linear and the orthant is pointed, so some vertex is optimal.
// Returns +inf when no feasible vertex exists.
inline double dantzig_vertex_objective(const Mat& a, const Vec& b, double tau, Vec* argmin = nullptr) {
  const Idx m = a.cols();
  const Mat g = gram(a);
  const Vec c = a.transpose() * b;
  const Idx planes = 3 * m;
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(planes, m, [&](const std::vector<Idx>& pick) {
    Mat lhs = Mat::Zero(m, m);
    Vec rhs(m);
    for (Idx r = 0; r < m; ++r) {
      const Idx p = pick[static_cast<std::size_t>(r)];
      if (p < m) {
        lhs(r, p) = 1.0;
        rhs[r] = 0.0;
      } else if (p < 2 * m) {
        lhs.row(r) = g.row(p - m);
        rhs[r] = c[p - m] + tau;
      } else {
        lhs.row(r) = g.row(p - 2 * m);
        rhs[r] = c[p - 2 * m] - tau;
      }
    }
    const Vec x = solve(lhs, rhs, 1e-10);
    if (x.size() == 0) return;
    const double viol = ((g * x - c).cwiseAbs().array() - tau).maxCoeff();
    if (viol > 1e-9 * std::max(1.0, tau)) return;
    const double obj = x.lpNorm<1>();
    if (obj < best) {
      best = obj;
      if (argmin) *argmin = x;
    }
  });
  return best;
}

// Textbook two-phase tableau simplex with Bland's rule:
// min c^T x s.t. A x <= b, x >= 0. Returns the optimal value (+inf if infeasible).
inline double lp_min(const Vec& c, const Mat& a, const Vec& b, Vec* argmin = nullptr) {
  const Idx rows = a.rows(), n = a.cols();
  // Columns: x (n), slacks (rows), artificials (rows), rhs.
  const Idx cols = n + 2 * rows + 1;
  Mat t = Mat::Zero(rows + 1, cols);
  std::vector<Idx> basis(static_cast<std::size_t>(rows));
  for (Idx i = 0; i < rows; ++i) {
    const double sgn = b[i] < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sgn * a.row(i);
    t(i, n + i) = sgn;
    t(i, n + rows + i) = 1.0;
    t(i, cols - 1) = sgn * b[i];
    basis[static_cast<std::size_t>(i)] = n + rows + i;
  }
  auto pivot = [&](Idx r, Idx q) {
    t.row(r) /= t(r, q);
    for (Idx i = 0; i <= rows; ++i)
      if (i != r && t(i, q) != 0.0) t.row(i) -= t(i, q) * t.row(r);
    basis[static_cast<std::size_t>(r)] = q;
  };
  auto run = [&](Idx allowed) {
    for (int it = 0; it < 100000; ++it) {
      Idx q = -1;
      for (Idx j = 0; j < allowed; ++j)
        if (t(rows, j) < -1e-11) {
          q = j;
          break;
        }
      if (q < 0) return true;
      Idx r = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Idx i = 0; i < rows; ++i) {
        if (t(i, q) > 1e-12) {
          const double ratio = t(i, cols - 1) / t(i, q);
          if (ratio < best - 1e-13 ||
              (ratio <= best + 1e-13 && r >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(r)])) {
            best = ratio;
            r = i;
          }
        }
      }
      if (r < 0) return false;  // unbounded
      pivot(r, q);
    }
    return false;
  };
  // Phase one objective: sum of artificials, written in reduced form.
  for (Idx i = 0; i < rows; ++i) t.row(rows) -= t.row(i);
  for (Idx i = 0; i < rows; ++i) t(rows, n + rows + i) = 0.0;
  run(n + rows);
  if (-t(rows, cols - 1) > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    return std::numeric_limits<double>::infinity();
  // Drive remaining artificials out of the basis where possible.
  for (Idx i = 0; i < rows; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n + rows) continue;
    for (Idx j = 0; j < n + rows; ++j)
      if (std::abs(t(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  t.row(rows).setZero();
  t.row(rows).head(n) = c.transpose();
  for (Idx i = 0; i < rows; ++i) {
    const Idx bi = basis[static_cast<std::size_t>(i)];
    if (bi < n && t(rows, bi) != 0.0) t.row(rows) -= t(rows, bi) * t.row(i);
  }
  if (!run(n + rows)) return -std::numeric_limits<double>::infinity();
  Vec x = Vec::Zero(n);
  for (Idx i = 0; i < rows; ++i)
    if (basis[static_cast<std::size_t>(i)] < n) x[basis[static_cast<std::size_t>(i)]] = t(i, cols - 1);
  if (argmin) *argmin = x;
  return c.dot(x);
}

// Dantzig selector objective through lp_min on the split formulation.
inline double dantzig_lp_objective(const Mat& a, const Vec& b, double tau, Vec* argmin = nullptr) {
  const Idx m = a.cols();
  const Mat g = gram(a);
  const Vec c = a.transpose() * b;
  Mat lhs(2 * m, 2 * m);
  lhs << g, -g, -g, g;
  Vec rhs(2 * m);
  rhs << c.array() + tau, tau - c.array();
  Vec uv;
  const double obj = lp_min(Vec::Ones(2 * m), lhs, rhs, &uv);
  if (argmin && uv.size() == 2 * m) *argmin = uv.head(m) - uv.tail(m);
  return obj;
}

// P(X <= k) for X ~ Binomial(n, p).
inline double binomial_cdf(int k, int n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double acc = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double logc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    acc += std::exp(logc + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return std::min(acc, 1.0);
}

// One-sided test of H0: success probability >= p. True when H0 survives at
// the given confidence, i.e. observing <= successes is not too unlikely.
inline bool frequency_consistent_with_at_least(int successes, int n, double p, double confidence = 0.99) {
  return binomial_cdf(successes, n, p) >= 1.0 - confidence;
}

}  // namespace oracle
