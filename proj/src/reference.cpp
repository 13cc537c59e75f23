#include "spofe/reference.hpp"

#include <cmath>

#include "spofe/error.hpp"

namespace spofe::reference {

KernelMatrix kernel_matrix(const KernelSpec& spec, const Dataset& d) {
  if (spec.kind == KernelKind::RffRbf) return gram_matrix(rff_features(spec, d));
  KernelSpec resolved = spec;
  resolved.gamma = spec.resolved_gamma(d.cols());
  const Matrix xt = d.values.transpose();
  const auto n = xt.cols();
  const auto p = static_cast<std::size_t>(xt.rows());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = kernel_value(resolved, {xt.col(i).data(), p}, {xt.col(j).data(), p});
  return KernelMatrix{std::move(k), false};
}

Matrix expand_raw(const PolyBasis& basis, const Matrix& x) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Vector row = x.row(r).transpose();
    for (std::size_t c = 0; c < basis.size(); ++c)
      out(r, static_cast<Eigen::Index>(c)) = basis.terms[c].eval({row.data(), basis.p});
  }
  return out;
}

WekoScores weko_with_knockoffs(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
                               const SignalBundle& bundle, const WekoOptions& opts, std::uint64_t seed) {
  WekoScores out;
  out.per_signal = Matrix::Zero(psi.cols(), bundle.signals.cols());
  out.active = active;
  for (Eigen::Index j = 0; j < bundle.signals.cols(); ++j) {
    const KnockoffStats st =
        knockoff_stats_lcd(psi, psi_tilde, bundle.signals.col(j), active, opts.lambda_rule, opts.lasso, seed);
    out.per_signal.col(j) = st.w;
    out.lambda_used.push_back(st.lambda_used);
  }
  out.s = weighted_scores(out.per_signal, bundle.lambdas);
  return out;
}

LassoResult lasso_cd(const Matrix& a, const Vector& y, double lambda, const LassoOptions& opts) {
  const double n = static_cast<double>(a.rows());
  const auto k = a.cols();
  Vector beta = Vector::Zero(k);
  Vector resid = y;
  const Vector sq = a.colwise().squaredNorm().transpose() / n;
  for (std::size_t sweep = 1; sweep <= opts.max_iter; ++sweep) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (sq(j) <= 0.0) continue;
      const double rho = a.col(j).dot(resid) / n + sq(j) * beta(j);
      const double next = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho) / sq(j);
      if (next != beta(j)) {
        resid -= (next - beta(j)) * a.col(j);
        beta(j) = next;
      }
    }
    const double kkt = kkt_residual(a, y, beta, lambda);
    if (kkt <= opts.tol) return LassoResult{beta, sweep, kkt};
  }
  throw NonConvergence("reference lasso did not converge", beta);
}

}  // namespace spofe::reference
