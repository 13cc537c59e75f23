#include "spofe/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spofe/error.hpp"

namespace spofe {
namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double coordinate_violation(double grad, double beta, double lambda) {
  if (beta > 0.0) return std::abs(grad - lambda);
  if (beta < 0.0) return std::abs(grad + lambda);
  return std::max(0.0, std::abs(grad) - lambda);
}

}  // namespace

double lambda_max(const Vector& corr) { return corr.size() ? corr.cwiseAbs().maxCoeff() : 0.0; }

double kkt_residual(const Matrix& a, const Vector& y, const Vector& beta, double lambda) {
  const Vector grad = a.transpose() * (y - a * beta) / static_cast<double>(a.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    worst = std::max(worst, coordinate_violation(grad(j), beta(j), lambda));
  return worst;
}

double kkt_residual_gram(const Matrix& gram, const Vector& corr, const Vector& beta, double lambda) {
  const Vector grad = corr - gram * beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (gram(j, j) <= 0.0) continue;
    worst = std::max(worst, coordinate_violation(grad(j), beta(j), lambda));
  }
  return worst;
}

LassoResult lasso_cd_gram(const Matrix& gram, const Vector& corr, double lambda,
                          const LassoOptions& opts, const Vector* warm_start) {
  if (lambda < 0.0) throw Error(ErrorKind::Config, "lasso lambda must be non-negative");
  const auto k = corr.size();
  Vector beta = warm_start ? *warm_start : Vector::Zero(k);
  // grad = corr - G beta, kept in sync with every coordinate move.
  Vector grad = corr - gram * beta;

  auto violation = [&](Eigen::Index j) {
    return gram(j, j) > 0.0 ? coordinate_violation(grad(j), beta(j), lambda) : 0.0;
  };
  auto update = [&](Eigen::Index j) {
    const double gjj = gram(j, j);
    if (gjj <= 0.0) return 0.0;
    const double old = beta(j);
    const double next = soft_threshold(grad(j) + gjj * old, lambda) / gjj;
    const double delta = next - old;
    if (delta != 0.0) {
      beta(j) = next;
      grad.noalias() -= delta * gram.col(j);
    }
    return std::abs(delta) * std::sqrt(gjj);
  };

  std::vector<Eigen::Index> active;
  std::size_t sweeps = 0;
  double best_kkt = std::numeric_limits<double>::infinity();
  Vector best = beta;

  while (sweeps < opts.max_iter) {
    for (Eigen::Index j = 0; j < k; ++j) update(j);
    ++sweeps;

    double worst = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) worst = std::max(worst, violation(j));
    if (worst <= opts.tol) {
      // Confirm against a freshly computed gradient before accepting.
      grad = corr - gram * beta;
      worst = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) worst = std::max(worst, violation(j));
      if (worst <= opts.tol) return LassoResult{std::move(beta), sweeps, worst};
    }
    if (worst < best_kkt) {
      best_kkt = worst;
      best = beta;
    }

    active.clear();
    for (Eigen::Index j = 0; j < k; ++j)
      if (beta(j) != 0.0) active.push_back(j);
    while (!active.empty() && sweeps < opts.max_iter) {
      double moved = 0.0;
      for (auto j : active) moved = std::max(moved, update(j));
      ++sweeps;
      double active_worst = 0.0;
      for (auto j : active) active_worst = std::max(active_worst, violation(j));
      if (active_worst <= 0.25 * opts.tol || moved == 0.0) break;
    }
  }
  throw NonConvergence("lasso did not reach KKT tolerance in " + std::to_string(opts.max_iter) +
                           " sweeps (best violation " + std::to_string(best_kkt) + ")",
                       std::move(best));
}

LassoResult lasso_cd(const Matrix& a, const Vector& y, double lambda, const LassoOptions& opts) {
  if (a.rows() != y.size()) throw Error(ErrorKind::Bounds, "lasso design and response differ in rows");
  const double n = static_cast<double>(a.rows());
  Matrix gram = Matrix::Zero(a.cols(), a.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose(), 1.0 / n);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const Vector corr = a.transpose() * y / n;
  return lasso_cd_gram(gram, corr, lambda, opts);
}

}  // namespace spofe
