#include "spofe/polybasis.hpp"

#include <algorithm>
#include <cmath>

#include "spofe/error.hpp"

namespace spofe {

int PolyTerm::degree() const {
  switch (kind) {
    case Kind::Constant: return 0;
    case Kind::Linear: return 1;
    default: return 2;
  }
}

std::vector<int> PolyTerm::exponents(std::size_t p) const {
  std::vector<int> e(p, 0);
  switch (kind) {
    case Kind::Constant: break;
    case Kind::Linear: e.at(i) = 1; break;
    case Kind::Square: e.at(i) = 2; break;
    case Kind::Cross: e.at(i) = 1; e.at(j) = 1; break;
  }
  return e;
}

double PolyTerm::eval(std::span<const double> x) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Linear: return x[i];
    case Kind::Square: return x[i] * x[i];
    case Kind::Cross: return x[i] * x[j];
  }
  return 0.0;
}

PolyBasis build_basis(std::size_t p) {
  if (p < 1) throw Error(ErrorKind::Bounds, "polynomial basis needs at least one variable");
  PolyBasis b;
  b.p = p;
  b.terms.reserve(basis_size(p));
  b.terms.push_back({PolyTerm::Kind::Constant, 0, 0});
  for (std::size_t i = 0; i < p; ++i) b.terms.push_back({PolyTerm::Kind::Linear, i, 0});
  for (std::size_t i = 0; i < p; ++i) b.terms.push_back({PolyTerm::Kind::Square, i, 0});
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) b.terms.push_back({PolyTerm::Kind::Cross, i, j});
  return b;
}

std::size_t FeatureMatrix::active_count() const {
  std::size_t c = 0;
  for (bool a : active) c += a ? 1 : 0;
  return c;
}

Matrix expand_raw(const PolyBasis& basis, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != basis.p)
    throw Error(ErrorKind::Bounds, "dataset width does not match polynomial basis");
  const auto n = x.rows();
  const auto d = static_cast<Eigen::Index>(basis.size());
  const auto p = static_cast<Eigen::Index>(basis.p);
  Matrix out(n, d);
#pragma omp parallel
  {
    Vector row(p);
#pragma omp for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) {
      row = x.row(r).transpose();
      const std::span<const double> xr(row.data(), basis.p);
      for (Eigen::Index c = 0; c < d; ++c) out(r, c) = basis.terms[static_cast<std::size_t>(c)].eval(xr);
    }
  }
  return out;
}

FeatureMatrix expand(const PolyBasis& basis, const Dataset& data) {
  FeatureMatrix fm;
  fm.psi = expand_raw(basis, data.values);
  fm.basis = basis;
  const auto d = fm.psi.cols();
  const auto n = static_cast<double>(fm.psi.rows());
  fm.means = Vector::Zero(d);
  fm.stds = Vector::Ones(d);
  fm.inert.assign(static_cast<std::size_t>(d), false);
  fm.active.assign(static_cast<std::size_t>(d), false);

  for (Eigen::Index c = 0; c < d; ++c) {
    if (basis.terms[static_cast<std::size_t>(c)].kind == PolyTerm::Kind::Constant) continue;
    auto col = fm.psi.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / n);
    fm.means(c) = mean;
    if (!(sd > 1e-10 * std::max(1.0, std::abs(mean)))) {
      fm.inert[static_cast<std::size_t>(c)] = true;
      fm.stds(c) = 0.0;
      col.setZero();
      continue;
    }
    fm.stds(c) = sd;
    col = (col.array() - mean) / sd;
    fm.active[static_cast<std::size_t>(c)] = true;
  }
  return fm;
}

std::string term_name(const PolyBasis& basis, std::size_t d, std::span<const std::string> names) {
  if (d >= basis.size())
    throw Error(ErrorKind::Bounds, "term index " + std::to_string(d) + " out of range");
  if (names.size() != basis.p) throw Error(ErrorKind::Bounds, "name count does not match basis");
  const auto& t = basis.terms[d];
  switch (t.kind) {
    case PolyTerm::Kind::Constant: return "1";
    case PolyTerm::Kind::Linear: return names[t.i];
    case PolyTerm::Kind::Square: return names[t.i] + "^2";
    case PolyTerm::Kind::Cross: return names[t.i] + "*" + names[t.j];
  }
  return {};
}

std::vector<std::string> term_names(const PolyBasis& basis, std::span<const std::string> names) {
  std::vector<std::string> out;
  out.reserve(basis.size());
  for (std::size_t d = 0; d < basis.size(); ++d) out.push_back(term_name(basis, d, names));
  return out;
}

}  // namespace spofe
