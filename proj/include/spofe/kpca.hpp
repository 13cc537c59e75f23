#pragma once

#include <cstddef>

#include "spofe/kernels.hpp"

namespace spofe {

// Eigenpairs sorted by descending eigenvalue. Each eigenvector is sign
// normalized so its largest-magnitude entry is positive (lowest index wins
// ties).
struct EigenPairs {
  Vector values;
  Matrix vectors;
};

EigenPairs symmetric_eigen(const Matrix& a);

// Top m eigenpairs of a centered kernel matrix (m is clipped to n).
EigenPairs eigendecompose(const KernelMatrix& kc, std::size_t m);

// Self-supervised signals from kernel PCA.
struct SignalBundle {
  Matrix signals;  // n x m_eff, column j is the j-th component, unit variance
  Vector lambdas;  // eigenvalue / sum of all positive eigenvalues
  Vector eigenvalues;  // raw retained eigenvalues
  std::size_t m_requested = 0;
  std::size_t m_eff = 0;
};

// Eigenvalues at or below this fraction of max(mu_1, 1) are treated as zero.
inline constexpr double kEigenFloor = 1e-10;

SignalBundle s4gen(const KernelMatrix& kc, std::size_t m);

}  // namespace spofe
