#include "spofe/knockoff.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "spofe/error.hpp"
#include "spofe/rng.hpp"

namespace spofe {
namespace {

std::vector<Eigen::Index> active_indices(const std::vector<bool>& active) {
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j]) idx.push_back(static_cast<Eigen::Index>(j));
  return idx;
}

Matrix symmetric_gram(const Matrix& a, double scale) {
  Matrix g = Matrix::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose(), scale);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

}  // namespace

KnockoffModel fit_knockoff_model(const Matrix& psi, const std::vector<bool>& active, double shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage < 1.0))
    throw Error(ErrorKind::Config, "covariance shrinkage must lie in [0, 1)");
  if (active.size() != static_cast<std::size_t>(psi.cols()))
    throw Error(ErrorKind::Bounds, "active mask does not match feature count");

  KnockoffModel m;
  m.active = active;
  m.index = active_indices(active);
  m.shrinkage = shrinkage;
  const auto k = static_cast<Eigen::Index>(m.index.size());
  const auto n = psi.rows();
  if (k < 2) throw Error(ErrorKind::InsufficientData, "knockoff model needs at least 2 active features");
  if (n <= 2) throw Error(ErrorKind::InsufficientData, "knockoff model needs more than 2 rows");

  Matrix x(n, k);
  for (Eigen::Index c = 0; c < k; ++c) x.col(c) = psi.col(m.index[static_cast<std::size_t>(c)]);
  m.mu = x.colwise().mean().transpose();
  x.rowwise() -= m.mu.transpose();
  m.scale = (x.colwise().squaredNorm().transpose() / static_cast<double>(n)).cwiseSqrt();
  if ((m.scale.array() <= 0.0).any())
    throw Error(ErrorKind::DegenerateInput, "active knockoff column has zero variance");
  x = x * m.scale.cwiseInverse().asDiagonal();

  Matrix corr = symmetric_gram(x, 1.0 / static_cast<double>(n));
  corr.diagonal().setOnes();
  m.sigma = (1.0 - shrinkage) * corr + shrinkage * Matrix::Identity(k, k);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "eigensolver failed on feature covariance");
  m.lambda_min = eig.eigenvalues()(0);
  if (!(m.lambda_min >= kSigmaFloor))
    throw Error(ErrorKind::Numerical,
                "feature covariance is singular (smallest eigenvalue " + std::to_string(m.lambda_min) +
                    "); increase the covariance shrinkage");

  m.s = Vector::Constant(k, std::min(1.0, 2.0 * m.lambda_min));

  Eigen::LLT<Matrix> sigma_llt(m.sigma);
  if (sigma_llt.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "Cholesky of the feature covariance failed; increase the covariance shrinkage");
  const Matrix sinv_s = sigma_llt.solve(Matrix(m.s.asDiagonal()));  // Sigma^{-1} diag(s)
  m.cond_mean_map = Matrix::Identity(k, k) - sinv_s;
  Matrix cond_cov = Matrix(2.0 * m.s.asDiagonal()) - m.s.asDiagonal() * sinv_s;
  cond_cov = (0.5 * (cond_cov + cond_cov.transpose())).eval();

  // With s = 2 lambda_min the conditional covariance is singular, so plain
  // Cholesky may fail on rounding. Add the smallest diagonal that fixes it.
  const double base = std::max(cond_cov.diagonal().maxCoeff(), 1e-300);
  for (double jitter = 0.0; jitter <= 1e-6 * base; jitter = jitter == 0.0 ? 1e-14 * base : jitter * 10.0) {
    Matrix c = cond_cov;
    c.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() == Eigen::Success) {
      m.cond_cov_factor = llt.matrixL();
      m.jitter = jitter;
      return m;
    }
  }
  throw Error(ErrorKind::Numerical, "knockoff conditional covariance is not positive semidefinite; increase the covariance shrinkage");
}

KnockoffModel fit_knockoff_model(const FeatureMatrix& fm, double shrinkage) {
  return fit_knockoff_model(fm.psi, fm.active, shrinkage);
}

Matrix sample_knockoffs(const Matrix& psi, const KnockoffModel& model, std::uint64_t seed) {
  const auto n = psi.rows();
  const auto k = static_cast<Eigen::Index>(model.index.size());
  if (model.active.size() != static_cast<std::size_t>(psi.cols()))
    throw Error(ErrorKind::Bounds, "knockoff model was fitted on a different feature count");

  Matrix x(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    x.col(c) = (psi.col(model.index[static_cast<std::size_t>(c)]).array() - model.mu(c)) / model.scale(c);

  auto rng = make_stream(seed, "knockoff");
  std::normal_distribution<double> normal;
  Matrix eta(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) eta(i, c) = normal(rng);

  Matrix xt = x * model.cond_mean_map;
  xt.noalias() += eta * model.cond_cov_factor.transpose();

  Matrix out = psi;
  for (Eigen::Index c = 0; c < k; ++c)
    out.col(model.index[static_cast<std::size_t>(c)]) = (xt.col(c).array() * model.scale(c) + model.mu(c)).matrix();
  return out;
}

LambdaRule LambdaRule::parse(const std::string& s) {
  LambdaRule r;
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
  try {
    if (head == "universal") {
      r.kind = Kind::Universal;
      r.value = tail.empty() ? 0.5 : std::stod(tail);
    } else if (head == "fixed") {
      r.kind = Kind::Fixed;
      r.value = std::stod(tail);
    } else if (head == "cv") {
      r.kind = Kind::CrossValidated;
      r.value = 0.0;
      r.folds = tail.empty() ? 5 : static_cast<std::size_t>(std::stoul(tail));
    } else {
      throw Error(ErrorKind::Config, "unknown lambda rule '" + s + "'");
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Config, "malformed lambda rule '" + s + "'");
  }
  if (!(r.value >= 0.0) || (r.kind == Kind::CrossValidated && r.folds < 2))
    throw Error(ErrorKind::Config, "lambda rule parameter out of range in '" + s + "'");
  return r;
}

std::string LambdaRule::str() const {
  switch (kind) {
    case Kind::Universal: {
      std::ostringstream os;
      os.precision(17);
      os << "universal:" << value;
      return os.str();
    }
    case Kind::Fixed: {
      std::ostringstream os;
      os.precision(17);
      os << "fixed:" << value;
      return os.str();
    }
    case Kind::CrossValidated: return "cv:" + std::to_string(folds);
  }
  return {};
}

LcdDesign::LcdDesign(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
                     const LambdaRule& rule, std::uint64_t seed)
    : active_(active), index_(active_indices(active)), rule_(rule) {
  if (psi.rows() != psi_tilde.rows() || psi.cols() != psi_tilde.cols())
    throw Error(ErrorKind::Bounds, "feature and knockoff matrices differ in shape");
  if (active.size() != static_cast<std::size_t>(psi.cols()))
    throw Error(ErrorKind::Bounds, "active mask does not match feature count");
  const auto n = psi.rows();
  const auto k = static_cast<Eigen::Index>(index_.size());
  design_.resize(n, 2 * k);
  for (Eigen::Index c = 0; c < k; ++c) {
    design_.col(c) = psi.col(index_[static_cast<std::size_t>(c)]);
    design_.col(k + c) = psi_tilde.col(index_[static_cast<std::size_t>(c)]);
  }
  gram_ = symmetric_gram(design_, 1.0 / static_cast<double>(n));

  if (rule_.kind == LambdaRule::Kind::CrossValidated) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto rng = make_stream(seed, "lambda-cv");
    std::shuffle(order.begin(), order.end(), rng);
    folds_.resize(rule_.folds);
    for (std::size_t i = 0; i < order.size(); ++i) folds_[i % rule_.folds].push_back(order[i]);
    for (auto& f : folds_) {
      std::sort(f.begin(), f.end());
      Matrix held(static_cast<Eigen::Index>(f.size()), design_.cols());
      for (std::size_t r = 0; r < f.size(); ++r) held.row(static_cast<Eigen::Index>(r)) = design_.row(f[r]);
      fold_gram_.push_back(symmetric_gram(held, 1.0));
    }
  }
}

double LcdDesign::universal_lambda(const Vector& z) const {
  const double n = static_cast<double>(z.size());
  const double sd = std::sqrt((z.array() - z.mean()).square().sum() / n);
  const double width = 2.0 * static_cast<double>(index_.size());
  return rule_.value * sd * std::sqrt(2.0 * std::log(width) / n);
}

double LcdDesign::cv_lambda(const Vector& z, const Vector& corr, const LassoOptions& opts) const {
  constexpr int kPath = 30;
  const double top = lambda_max(corr);
  if (!(top > 0.0)) return 0.0;
  const double n = static_cast<double>(z.size());
  std::vector<double> path(kPath);
  for (int i = 0; i < kPath; ++i) path[static_cast<std::size_t>(i)] = top * std::pow(1e-3, i / double(kPath - 1));

  const Vector full_corr_raw = corr * n;  // A^T z
  std::vector<double> mse(kPath, 0.0);
  for (std::size_t f = 0; f < folds_.size(); ++f) {
    const auto& rows = folds_[f];
    const double n_held = static_cast<double>(rows.size());
    const double n_train = n - n_held;
    Matrix held(static_cast<Eigen::Index>(rows.size()), design_.cols());
    Vector z_held(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      held.row(static_cast<Eigen::Index>(r)) = design_.row(rows[r]);
      z_held(static_cast<Eigen::Index>(r)) = z(rows[r]);
    }
    const Matrix g_train = (gram_ * n - fold_gram_[f]) / n_train;
    const Vector c_train = (full_corr_raw - held.transpose() * z_held) / n_train;
    Vector beta = Vector::Zero(design_.cols());
    for (int i = 0; i < kPath; ++i) {
      beta = lasso_cd_gram(g_train, c_train, path[static_cast<std::size_t>(i)], opts, &beta).beta;
      mse[static_cast<std::size_t>(i)] += (z_held - held * beta).squaredNorm() / n;
    }
  }
  // Ties go to the larger penalty.
  std::size_t best = 0;
  for (std::size_t i = 1; i < mse.size(); ++i)
    if (mse[i] < mse[best]) best = i;
  return path[best];
}

KnockoffStats LcdDesign::stats(const Vector& z, const LassoOptions& opts, std::size_t signal_index) const {
  if (z.size() != design_.rows()) throw Error(ErrorKind::Bounds, "signal length does not match feature rows");
  const double n = static_cast<double>(z.size());
  const Vector corr = design_.transpose() * z / n;

  double lambda = 0.0;
  switch (rule_.kind) {
    case LambdaRule::Kind::Universal: lambda = universal_lambda(z); break;
    case LambdaRule::Kind::Fixed: lambda = rule_.value; break;
    case LambdaRule::Kind::CrossValidated: lambda = cv_lambda(z, corr, opts); break;
  }
  const LassoResult fit = lasso_cd_gram(gram_, corr, lambda, opts);

  KnockoffStats out;
  out.w = Vector::Zero(static_cast<Eigen::Index>(active_.size()));
  out.lambda_used = lambda;
  out.signal_index = signal_index;
  const auto k = static_cast<Eigen::Index>(index_.size());
  for (Eigen::Index c = 0; c < k; ++c)
    out.w(index_[static_cast<std::size_t>(c)]) = std::abs(fit.beta(c)) - std::abs(fit.beta(k + c));
  return out;
}

KnockoffStats knockoff_stats_lcd(const Matrix& psi, const Matrix& psi_tilde, const Vector& z,
                                 const std::vector<bool>& active, const LambdaRule& rule,
                                 const LassoOptions& opts, std::uint64_t seed) {
  return LcdDesign(psi, psi_tilde, active, rule, seed).stats(z, opts);
}

double knockoff_threshold(std::span<const double> w, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::Config, "FDR level must lie in (0, 1]");
  std::vector<double> candidates;
  for (double v : w)
    if (v != 0.0) candidates.push_back(std::abs(v));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (double t : candidates) {
    std::size_t neg = 0, pos = 0;
    for (double v : w) {
      if (v <= -t) ++neg;
      if (v >= t) ++pos;
    }
    if (static_cast<double>(1 + neg) / static_cast<double>(std::max<std::size_t>(1, pos)) <= q) return t;
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<std::size_t> knockoff_select(std::span<const double> w, double q) {
  const double tau = knockoff_threshold(w, q);
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < w.size(); ++d)
    if (w[d] >= tau) out.push_back(d);
  return out;
}

Vector weighted_scores(const Matrix& per_signal, const Vector& lambdas) {
  if (per_signal.cols() != lambdas.size()) throw Error(ErrorKind::Bounds, "weights do not match signal count");
  Vector s = Vector::Zero(per_signal.rows());
  for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    for (Eigen::Index d = 0; d < per_signal.rows(); ++d) s(d) += lambdas(j) * per_signal(d, j);
  return s;
}

WekoScores weko_with_knockoffs(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
                               const SignalBundle& bundle, const WekoOptions& opts, std::uint64_t seed) {
  if (bundle.signals.rows() != psi.rows())
    throw Error(ErrorKind::Bounds, "signals and features come from different row counts");
  const LcdDesign design(psi, psi_tilde, active, opts.lambda_rule, seed);
  const auto m = bundle.signals.cols();

  WekoScores out;
  out.per_signal = Matrix::Zero(psi.cols(), m);
  out.active = active;
  out.lambda_used.assign(static_cast<std::size_t>(m), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index j = 0; j < m; ++j) {
    try {
      const Vector z = bundle.signals.col(j);
      KnockoffStats st = design.stats(z, opts.lasso, static_cast<std::size_t>(j));
      out.per_signal.col(j) = st.w;
      out.lambda_used[static_cast<std::size_t>(j)] = st.lambda_used;
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.s = weighted_scores(out.per_signal, bundle.lambdas);
  return out;
}

WekoScores weko(const FeatureMatrix& fm, const SignalBundle& bundle, const WekoOptions& opts,
                std::uint64_t seed, KnockoffModel* model_out) {
  KnockoffModel model = fit_knockoff_model(fm, opts.shrinkage);
  const Matrix psi_tilde = sample_knockoffs(fm.psi, model, seed);
  WekoScores out = weko_with_knockoffs(fm.psi, psi_tilde, fm.active, bundle, opts, seed);
  if (model_out) *model_out = std::move(model);
  return out;
}

}  // namespace spofe
