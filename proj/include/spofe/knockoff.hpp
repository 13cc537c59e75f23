#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spofe/kpca.hpp"
#include "spofe/lasso.hpp"
#include "spofe/polybasis.hpp"

namespace spofe {

// Second-order Gaussian model-X knockoff sampler with the equicorrelated
// s-rule. All matrices are over the active columns only, on correlation
// scale; inert and constant columns pass through unchanged.
struct KnockoffModel {
  std::vector<bool> active;
  std::vector<Eigen::Index> index;  // original column of each active slot
  Vector mu;                        // active column means
  Vector scale;                     // active column standard deviations
  Matrix sigma;                     // shrunk correlation matrix
  Vector s;
  Matrix cond_mean_map;    // I - Sigma^{-1} diag(s)
  Matrix cond_cov_factor;  // lower Cholesky factor of 2 diag(s) - diag(s) Sigma^{-1} diag(s)
  double lambda_min = 0.0;  // smallest eigenvalue of sigma
  double shrinkage = 0.0;
  double jitter = 0.0;      // diagonal added to the conditional covariance, usually 0
};

inline constexpr double kSigmaFloor = 1e-6;

KnockoffModel fit_knockoff_model(const Matrix& psi, const std::vector<bool>& active, double shrinkage);
KnockoffModel fit_knockoff_model(const FeatureMatrix& fm, double shrinkage);

// Draws from stream (seed, "knockoff").
Matrix sample_knockoffs(const Matrix& psi, const KnockoffModel& model, std::uint64_t seed);

struct LambdaRule {
  enum class Kind { Universal, Fixed, CrossValidated };
  Kind kind = Kind::Universal;
  double value = 0.5;     // Universal: multiplier; Fixed: lambda itself
  std::size_t folds = 5;  // CrossValidated

  static LambdaRule parse(const std::string& s);
  std::string str() const;
};

struct KnockoffStats {
  Vector w;  // |b_d| - |b_{d+k}|, zero on inactive columns
  double lambda_used = 0.0;
  std::size_t signal_index = 0;
};

// Lasso design [psi_active, psi_tilde_active] with its Gram matrix, shared by
// every signal regressed on it.
class LcdDesign {
 public:
  LcdDesign(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
            const LambdaRule& rule, std::uint64_t seed);

  KnockoffStats stats(const Vector& z, const LassoOptions& opts, std::size_t signal_index = 0) const;

  std::size_t features() const { return active_.size(); }
  std::size_t active_count() const { return index_.size(); }

 private:
  double universal_lambda(const Vector& z) const;
  double cv_lambda(const Vector& z, const Vector& corr, const LassoOptions& opts) const;

  std::vector<bool> active_;
  std::vector<Eigen::Index> index_;
  LambdaRule rule_;
  Matrix design_;
  Matrix gram_;
  std::vector<std::vector<Eigen::Index>> folds_;
  std::vector<Matrix> fold_gram_;  // A_f^T A_f for held-out rows of fold f
};

KnockoffStats knockoff_stats_lcd(const Matrix& psi, const Matrix& psi_tilde, const Vector& z,
                                 const std::vector<bool>& active, const LambdaRule& rule = {},
                                 const LassoOptions& opts = {}, std::uint64_t seed = 0);

// Knockoff+ threshold; +infinity when no level is attainable.
double knockoff_threshold(std::span<const double> w, double q);

// Indices with w >= threshold, ascending.
std::vector<std::size_t> knockoff_select(std::span<const double> w, double q);

struct WekoOptions {
  double shrinkage = 0.05;
  LambdaRule lambda_rule;
  LassoOptions lasso;
};

struct WekoScores {
  Vector s;                  // per_signal * lambdas
  Matrix per_signal;         // d x m_eff
  std::vector<bool> active;
  std::vector<double> lambda_used;
};

// s = sum_j lambdas_j * per_signal.col(j), summed in ascending j.
Vector weighted_scores(const Matrix& per_signal, const Vector& lambdas);

// One knockoff draw shared by all signals; per-signal fits run in parallel.
WekoScores weko(const FeatureMatrix& fm, const SignalBundle& bundle, const WekoOptions& opts,
                std::uint64_t seed, KnockoffModel* model_out = nullptr);

WekoScores weko_with_knockoffs(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
                               const SignalBundle& bundle, const WekoOptions& opts, std::uint64_t seed);

}  // namespace spofe
