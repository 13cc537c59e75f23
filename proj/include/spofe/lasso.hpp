#pragma once

#include <cstddef>

#include "spofe/dataio.hpp"

namespace spofe {

// Coordinate descent for (1/2n)||y - A b||^2 + lambda ||b||_1.
struct LassoOptions {
  double tol = 1e-7;             // KKT tolerance
  std::size_t max_iter = 10000;  // coordinate sweeps
};

struct LassoResult {
  Vector beta;
  std::size_t sweeps = 0;
  double kkt = 0.0;
};

// Largest KKT violation of beta, computed directly from the residual.
double kkt_residual(const Matrix& a, const Vector& y, const Vector& beta, double lambda);

// Same, from precomputed G = A^T A / n and c = A^T y / n.
double kkt_residual_gram(const Matrix& gram, const Vector& corr, const Vector& beta, double lambda);

// Covariance-form solver. gram = A^T A / n, corr = A^T y / n. Zero-diagonal
// coordinates stay at zero. Throws NonConvergence carrying the best iterate.
LassoResult lasso_cd_gram(const Matrix& gram, const Vector& corr, double lambda,
                          const LassoOptions& opts = {}, const Vector* warm_start = nullptr);

LassoResult lasso_cd(const Matrix& a, const Vector& y, double lambda, const LassoOptions& opts = {});

// Smallest lambda at which the all-zero solution is optimal: max |A^T y| / n.
double lambda_max(const Vector& corr);

}  // namespace spofe
