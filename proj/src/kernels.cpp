#include "spofe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spofe/error.hpp"
#include "spofe/rng.hpp"

namespace spofe {

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Cosine: return "cosine";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Sigmoid: return "sigmoid";
    case KernelKind::RffRbf: return "rff";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "cosine") return KernelKind::Cosine;
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "sigmoid") return KernelKind::Sigmoid;
  if (s == "rff" || s == "rff_rbf") return KernelKind::RffRbf;
  throw Error(ErrorKind::Config, "unknown kernel '" + s + "'");
}

double KernelSpec::resolved_gamma(std::size_t p) const {
  const double g = gamma ? *gamma : 1.0 / static_cast<double>(p);
  if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorKind::Config, "kernel gamma must be positive");
  return g;
}

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double sq_dist(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = x[k] - y[k];
    s += t * t;
  }
  return s;
}

}  // namespace

double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Bounds, "kernel arguments differ in length");
  switch (spec.kind) {
    case KernelKind::Cosine: {
      const double nx = std::sqrt(dot(x, x));
      const double ny = std::sqrt(dot(y, y));
      if (nx == 0.0 || ny == 0.0)
        throw Error(ErrorKind::DegenerateInput, "cosine kernel on a zero vector");
      if (x.data() == y.data()) return 1.0;
      return std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
    }
    case KernelKind::Rbf:
    case KernelKind::RffRbf:
      return std::exp(-spec.resolved_gamma(x.size()) * sq_dist(x, y));
    case KernelKind::Sigmoid:
      return std::tanh(spec.resolved_gamma(x.size()) * dot(x, y) + spec.coef0);
  }
  return 0.0;
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Dataset& d) {
  if (spec.kind == KernelKind::RffRbf) return gram_matrix(rff_features(spec, d));

  KernelSpec resolved = spec;
  resolved.gamma = spec.resolved_gamma(d.cols());
  // Rows as contiguous columns of the transpose.
  const Matrix xt = d.values.transpose();
  const auto n = xt.cols();
  const auto p = static_cast<std::size_t>(xt.rows());
  Matrix k(n, n);
  bool degenerate = false;

#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const double> xi(xt.col(i).data(), p);
    for (Eigen::Index j = i; j < n; ++j) {
      try {
        const double v = kernel_value(resolved, xi, std::span<const double>(xt.col(j).data(), p));
        k(i, j) = v;
        k(j, i) = v;
      } catch (const Error&) {
#pragma omp atomic write
        degenerate = true;
      }
    }
  }
  if (degenerate) throw Error(ErrorKind::DegenerateInput, "cosine kernel on a zero row");
  return KernelMatrix{std::move(k), false};
}

KernelMatrix center(const KernelMatrix& k) {
  const auto n = k.values.rows();
  const Vector row_mean = k.values.rowwise().mean();
  const Vector col_mean = k.values.colwise().mean().transpose();
  const double grand = row_mean.mean();
  Matrix c(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      c(i, j) = k.values(i, j) - row_mean(i) - col_mean(j) + grand;
  // Restore exact symmetry lost to rounding in the row/column means.
  c = (0.5 * (c + c.transpose())).eval();
  return KernelMatrix{std::move(c), true};
}

Matrix rff_features(const KernelSpec& spec, const Dataset& d) {
  if (spec.kind != KernelKind::RffRbf) throw Error(ErrorKind::Config, "rff_features needs an rff kernel");
  if (spec.rff_dim < 1) throw Error(ErrorKind::Config, "rff_dim must be at least 1");
  const auto p = static_cast<Eigen::Index>(d.cols());
  const auto dim = static_cast<Eigen::Index>(spec.rff_dim);
  const double gamma = spec.resolved_gamma(d.cols());

  auto rng = make_stream(spec.rff_seed, "rff");
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * gamma));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Matrix omega(p, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < p; ++r) omega(r, c) = normal(rng);
  Eigen::RowVectorXd offset(dim);
  for (Eigen::Index c = 0; c < dim; ++c) offset(c) = phase(rng);

  Matrix z = d.values * omega;
  const double scale = std::sqrt(2.0 / static_cast<double>(dim));
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = scale * std::cos(z(r, c) + offset(c));
  return z;
}

KernelMatrix gram_matrix(const Matrix& features) {
  const auto n = features.rows();
  Matrix k = Matrix::Zero(n, n);
  k.selfadjointView<Eigen::Lower>().rankUpdate(features);
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return KernelMatrix{std::move(k), false};
}

}  // namespace spofe
