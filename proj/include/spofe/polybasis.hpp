#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spofe/dataio.hpp"

namespace spofe {

struct PolyTerm {
  enum class Kind { Constant, Linear, Square, Cross };
  Kind kind = Kind::Constant;
  std::size_t i = 0;  // Linear, Square, Cross
  std::size_t j = 0;  // Cross only, i < j

  int degree() const;
  std::vector<int> exponents(std::size_t p) const;
  double eval(std::span<const double> x) const;
};

// Degree-2 basis in canonical order: constant, linear terms, squares, then
// cross terms (i, j), i < j, in lexicographic order.
struct PolyBasis {
  std::size_t p = 0;
  std::vector<PolyTerm> terms;

  std::size_t size() const { return terms.size(); }
};

// 1 + 2p + p(p-1)/2
constexpr std::size_t basis_size(std::size_t p) { return 1 + 2 * p + p * (p - 1) / 2; }

PolyBasis build_basis(std::size_t p);

// Expanded features. Non-constant columns are standardized (population
// moments); the constant column stays all ones. Columns whose raw variance is
// zero are inert: they are zeroed and excluded from selection.
struct FeatureMatrix {
  Matrix psi;
  PolyBasis basis;
  Vector means;
  Vector stds;
  std::vector<bool> inert;
  std::vector<bool> active;  // neither constant nor inert

  std::size_t active_count() const;
};

// Raw term values, n x d_max, filled in parallel over rows.
Matrix expand_raw(const PolyBasis& basis, const Matrix& x);

FeatureMatrix expand(const PolyBasis& basis, const Dataset& d);

// "1", "a", "a^2", "a*b".
std::string term_name(const PolyBasis& basis, std::size_t d, std::span<const std::string> names);

std::vector<std::string> term_names(const PolyBasis& basis, std::span<const std::string> names);

}  // namespace spofe
