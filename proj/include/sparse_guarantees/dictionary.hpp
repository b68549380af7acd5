#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "sparse_guarantees/numerics.hpp"

namespace sparse_guarantees {

enum class DictionaryKind { TwoOrthoHadamard, RandomGaussian, OvercompleteDct, FromFile };

std::string_view to_string(DictionaryKind kind);

/// n x m matrix whose columns (atoms) have unit l2 norm, plus where it came from.
class Dictionary {
 public:
  /// Normalizes every column. Throws InvalidArgument on non-finite entries
  /// or zero columns.
  Dictionary(Matrix matrix, DictionaryKind kind, std::optional<std::uint64_t> seed = std::nullopt);

  const Matrix& matrix() const noexcept { return matrix_; }
  Index rows() const noexcept { return matrix_.rows(); }
  Index atoms() const noexcept { return matrix_.cols(); }
  DictionaryKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  /// Largest |norm - 1| of the columns as supplied, before normalization.
  double input_norm_deviation() const noexcept { return input_norm_deviation_; }
  /// Set when input_norm_deviation() exceeded 1e-6.
  bool normalization_warning() const noexcept { return input_norm_deviation_ > 1e-6; }

 private:
  Matrix matrix_;
  DictionaryKind kind_;
  std::optional<std::uint64_t> seed_;
  double input_norm_deviation_ = 0.0;
};

/// [I H] with H the Sylvester Hadamard matrix scaled by 1/sqrt(n).
Dictionary build_two_ortho_hadamard(Index n);

Dictionary build_random_gaussian(Index n, Index m, std::uint64_t seed);

/// Column j samples cos(pi * (i + 1/2) * j / m), i = 0..n-1, then is
/// normalized. For m == n this is the orthonormal DCT-II basis.
Dictionary build_overcomplete_dct(Index n, Index m);

/// Raw CSV, n rows of m comma-separated values, no header. Columns are
/// re-normalized; see Dictionary::normalization_warning().
Dictionary load_dictionary_csv(const std::filesystem::path& path);

/// max_{i != j} |a_i^T a_j|.
double coherence(const Dictionary& dict);

/// Coherence bound on the order-s restricted isometry constant: (s-1) mu.
double ric_bound(double mu, Index s);
/// Coherence bound on the (s1, s2) restricted orthogonality constant: mu sqrt(s1 s2).
double rop_bound(double mu, Index s1, Index s2);

inline constexpr std::uint64_t kDefaultEnumerationCap = 2'000'000;

/// delta_s by enumerating every size-s support.
double exact_ric(const Dictionary& dict, Index s, std::uint64_t cap = kDefaultEnumerationCap);

/// theta_{s1,s2} by enumerating every disjoint pair of supports; the cap
/// applies to the number of pairs visited.
double exact_rop(const Dictionary& dict, Index s1, Index s2,
                 std::uint64_t cap = kDefaultEnumerationCap);

struct ExactRics {
  double delta;
  double theta;
};

/// (delta_s, theta_{s,s}).
ExactRics exact_rics(const Dictionary& dict, Index s, std::uint64_t cap = kDefaultEnumerationCap);

/// Columns of the dictionary at the sorted, unique indices `support`.
Matrix subdictionary(const Dictionary& dict, const IndexSet& support);

/// Same, for a bare matrix.
Matrix select_columns(const Matrix& a, const IndexSet& support);

}  // namespace sparse_guarantees
