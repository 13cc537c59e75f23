#include "spofe/kpca.hpp"

#include <algorithm>
#include <cmath>

#include "spofe/error.hpp"

namespace spofe {
namespace {

void normalize_sign(Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > mag) {
      mag = std::abs(v(i));
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

}  // namespace

EigenPairs symmetric_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::Bounds, "eigendecomposition needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "symmetric eigensolver did not converge");
  const auto n = a.rows();
  EigenPairs out{Vector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = solver.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    normalize_sign(out.vectors.col(j));
  }
  return out;
}

EigenPairs eigendecompose(const KernelMatrix& kc, std::size_t m) {
  EigenPairs all = symmetric_eigen(kc.values);
  const auto keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(m), all.values.size());
  return EigenPairs{all.values.head(keep), all.vectors.leftCols(keep)};
}

SignalBundle s4gen(const KernelMatrix& kc, std::size_t m) {
  if (m == 0) throw Error(ErrorKind::Config, "num_components must be positive");
  const EigenPairs all = symmetric_eigen(kc.values);
  const auto n = all.values.size();
  const double floor = kEigenFloor * std::max(n > 0 ? all.values(0) : 0.0, 1.0);

  double positive_total = 0.0;
  Eigen::Index positive = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (all.values(j) > floor) {
      positive_total += all.values(j);
      ++positive;
    }
  }
  if (positive == 0) throw Error(ErrorKind::DegenerateInput, "centered kernel has no positive eigenvalues");

  const auto m_eff = std::min<Eigen::Index>(static_cast<Eigen::Index>(m), positive);
  SignalBundle out;
  out.m_requested = m;
  out.m_eff = static_cast<std::size_t>(m_eff);
  out.eigenvalues = all.values.head(m_eff);
  out.lambdas = out.eigenvalues / positive_total;
  out.signals = kc.values * all.vectors.leftCols(m_eff);

  for (Eigen::Index j = 0; j < m_eff; ++j) {
    auto col = out.signals.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
    if (!(sd > 0.0)) throw Error(ErrorKind::Numerical, "kernel component has zero variance");
    col /= sd;
  }
  return out;
}

}  // namespace spofe
