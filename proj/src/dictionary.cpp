#include "sparse_guarantees/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace sparse_guarantees {

std::string_view to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::TwoOrthoHadamard: return "two_ortho_hadamard";
    case DictionaryKind::RandomGaussian: return "random_gaussian";
    case DictionaryKind::OvercompleteDct: return "overcomplete_dct";
    case DictionaryKind::FromFile: return "from_file";
  }
  return "unknown";
}

Dictionary::Dictionary(Matrix matrix, DictionaryKind kind, std::optional<std::uint64_t> seed)
    : matrix_(std::move(matrix)), kind_(kind), seed_(seed) {
  if (matrix_.size() == 0) throw Error(ErrorCode::InvalidArgument, "dictionary is empty");
  if (!matrix_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "dictionary has non-finite entries");
  for (Index j = 0; j < matrix_.cols(); ++j) {
    const double norm = matrix_.col(j).norm();
    if (norm == 0.0)
      throw Error(ErrorCode::InvalidArgument, "dictionary column " + std::to_string(j) + " is zero");
    input_norm_deviation_ = std::max(input_norm_deviation_, std::abs(norm - 1.0));
    matrix_.col(j) /= norm;
  }
}

Dictionary build_two_ortho_hadamard(Index n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw Error(ErrorCode::NotPowerOfTwo, "two-ortho size " + std::to_string(n));
  Matrix h = Matrix::Ones(1, 1);
  while (h.rows() < n) {
    const Index k = h.rows();
    Matrix next(2 * k, 2 * k);
    next << h, h, h, -h;
    h = std::move(next);
  }
  Matrix a(n, 2 * n);
  a.leftCols(n).setIdentity();
  a.rightCols(n) = h / std::sqrt(static_cast<double>(n));
  return Dictionary(std::move(a), DictionaryKind::TwoOrthoHadamard);
}

Dictionary build_random_gaussian(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "random dictionary needs n, m >= 1");
  RngStream stream(derive_seed(seed, 0xD1C7), 0);
  Matrix a(n, m);
  for (Index j = 0; j < m; ++j) a.col(j) = gaussian(stream, n);
  return Dictionary(std::move(a), DictionaryKind::RandomGaussian, seed);
}

Dictionary build_overcomplete_dct(Index n, Index m) {
  if (n < 1 || m < n) throw Error(ErrorCode::InvalidArgument, "overcomplete DCT needs m >= n >= 1");
  Matrix a(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i)
      a(i, j) = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                         static_cast<double>(j) / static_cast<double>(m));
  return Dictionary(std::move(a), DictionaryKind::OvercompleteDct);
}

Dictionary load_dictionary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dictionary file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidSpec, "bad dictionary entry '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::InvalidSpec, "ragged dictionary rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidSpec, "empty dictionary file " + path.string());
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Dictionary(std::move(a), DictionaryKind::FromFile);
}

double coherence(const Dictionary& dict) {
  if (dict.atoms() < 2) throw Error(ErrorCode::TooFewAtoms, "coherence needs at least two atoms");
  Matrix gram = dict.matrix().transpose() * dict.matrix();
  gram.diagonal().setZero();
  return gram.cwiseAbs().maxCoeff();
}

double ric_bound(double mu, Index s) { return static_cast<double>(s - 1) * mu; }

double rop_bound(double mu, Index s1, Index s2) {
  return mu * std::sqrt(static_cast<double>(s1) * static_cast<double>(s2));
}

namespace {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (Index i = 1; i <= k; ++i)
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

// Advances `c` (sorted indices into [0, n)) to the next k-combination.
bool next_combination(std::vector<Index>& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < n - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

std::vector<Index> first_combination(Index k) {
  std::vector<Index> c(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  return c;
}

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;

void check_order(const Dictionary& dict, Index s, const char* what) {
  if (s < 1 || s > dict.atoms())
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": order out of range");
  if (s > 16) throw Error(ErrorCode::EnumerationTooLarge, std::string(what) + ": order above 16");
}

}  // namespace

double exact_ric(const Dictionary& dict, Index s, std::uint64_t cap) {
  check_order(dict, s, "exact_ric");
  if (s > dict.rows()) throw Error(ErrorCode::InvalidArgument, "exact_ric: s exceeds n");
  const Index m = dict.atoms();
  if (binomial(m, s) > static_cast<double>(cap))
    throw Error(ErrorCode::EnumerationTooLarge, "C(m, s) exceeds enumeration cap");
  const Matrix gram = dict.matrix().transpose() * dict.matrix();
  double delta = 0.0;
  std::vector<Index> subset = first_combination(s);
  SmallMatrix sub(s, s);
  do {
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < s; ++j)
        sub(i, j) = gram(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]);
    const Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(sub, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    delta = std::max({delta, ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff()});
  } while (next_combination(subset, m));
  return delta;
}

double exact_rop(const Dictionary& dict, Index s1, Index s2, std::uint64_t cap) {
  check_order(dict, s1, "exact_rop");
  check_order(dict, s2, "exact_rop");
  const Index m = dict.atoms();
  if (s1 + s2 > m) throw Error(ErrorCode::InvalidArgument, "exact_rop: s1 + s2 exceeds m");
  if (s1 < s2) std::swap(s1, s2);  // theta is symmetric in its orders
  const bool symmetric = s1 == s2;
  double pairs = binomial(m, s1) * binomial(m - s1, s2);
  if (symmetric) pairs /= 2.0;
  if (pairs > static_cast<double>(cap))
    throw Error(ErrorCode::EnumerationTooLarge, "number of support pairs exceeds enumeration cap");

  const Matrix gram = dict.matrix().transpose() * dict.matrix();
  double theta = 0.0;
  std::vector<Index> first = first_combination(s1);
  std::vector<Index> rest;
  rest.reserve(static_cast<std::size_t>(m - s1));
  SmallMatrix cross(s1, s2);
  do {
    rest.clear();
    for (Index i = 0, k = 0; i < m; ++i) {
      if (k < s1 && first[static_cast<std::size_t>(k)] == i) {
        ++k;
      } else {
        rest.push_back(i);
      }
    }
    std::vector<Index> second = first_combination(s2);
    do {
      // Each unordered pair once: the first set holds the smallest index.
      if (symmetric && rest[static_cast<std::size_t>(second[0])] < first[0]) continue;
      for (Index i = 0; i < s1; ++i)
        for (Index j = 0; j < s2; ++j)
          cross(i, j) = gram(first[static_cast<std::size_t>(i)],
                             rest[static_cast<std::size_t>(second[static_cast<std::size_t>(j)])]);
      double top;
      if (s2 == 1) {
        top = cross.col(0).squaredNorm();
      } else {
        const SmallMatrix small = cross.transpose() * cross;
        const Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(small, Eigen::EigenvaluesOnly);
        top = eig.eigenvalues().maxCoeff();
      }
      theta = std::max(theta, std::sqrt(std::max(top, 0.0)));
    } while (next_combination(second, m - s1));
  } while (next_combination(first, m));
  return theta;
}

ExactRics exact_rics(const Dictionary& dict, Index s, std::uint64_t cap) {
  return {exact_ric(dict, s, cap), exact_rop(dict, s, s, cap)};
}

Matrix select_columns(const Matrix& a, const IndexSet& support) {
  Matrix out(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Index j = support[k];
    if (j < 0 || j >= a.cols())
      throw Error(ErrorCode::IndexOutOfRange, "support index " + std::to_string(j));
    if (k > 0 && j <= support[k - 1]) {
      if (j == support[k - 1])
        throw Error(ErrorCode::DuplicateIndex, "support index " + std::to_string(j) + " repeated");
      throw Error(ErrorCode::InvalidArgument, "support must be sorted");
    }
    out.col(static_cast<Index>(k)) = a.col(j);
  }
  return out;
}

Matrix subdictionary(const Dictionary& dict, const IndexSet& support) {
  return select_columns(dict.matrix(), support);
}

}  // namespace sparse_guarantees
