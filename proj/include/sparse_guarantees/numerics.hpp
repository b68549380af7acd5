#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sparse_guarantees/errors.hpp"

namespace sparse_guarantees {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// Counter-based generator (Philox4x32-10). The whole state is
/// (master_seed, stream_id, counter); value i of a stream depends only on
/// those three numbers, so trial streams can be derived in any order.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0)
      : master_seed_(master_seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double next_uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
};

/// Mixes a master seed with a domain tag so that independent families of
/// streams (noise, signals, dictionaries) never share a key.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t domain);

/// `count` i.i.d. N(0,1) variates, Box-Muller on the stream's uniforms.
Vector gaussian(RngStream& stream, Index count);

// ---------------------------------------------------------------------------
// Dense kernels
// ---------------------------------------------------------------------------

/// arg min ||b - A y||_2 by Householder QR. Throws RankDeficient when a
/// diagonal entry of R is at most 1e-12 times the largest one.
Vector least_squares(const Matrix& a_sub, const Vector& b);

/// trace((A^T A)^{-1}) through the QR factor, i.e. ||R^{-1}||_F^2.
double inverse_gram_trace(const Matrix& a_sub);

inline constexpr int kPowerIterationCap = 10000;

/// Upper estimate of lambda_max(A^T A): power iteration to relative
/// accuracy 1e-6, inflated by (1 + 1e-6).
double operator_norm_sq(const Matrix& a);

double median(std::span<const double> values);

struct SpectrumBounds {
  double lo;
  double hi;
};

/// Gershgorin interval containing every eigenvalue of a symmetric matrix.
SpectrumBounds gershgorin_bounds(const Matrix& gram);

/// Eigenvalues of a small symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& sym);

}  // namespace sparse_guarantees
