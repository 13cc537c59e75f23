#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spofe/knockoff.hpp"

namespace spofe {

enum class PValueMethod { Percentile, LogNormal };

const char* to_string(PValueMethod m);
PValueMethod parse_pvalue_method(const std::string& s);

struct PValueVector {
  Vector p;
  PValueMethod method = PValueMethod::Percentile;
};

// Rank-from-top: p_d = #{d' : s_d' >= s_d} / d_max, counted over active
// features. Inactive features get p = 1. An empty mask means all active.
PValueVector pvalues_percentile(const Vector& scores, const std::vector<bool>& active = {});
PValueVector pvalues_percentile(const WekoScores& s);

// Log-normal fit over the strictly positive scores (unbiased variance);
// p_d = 1 - Phi((ln s_d - mu) / sigma), and p_d = 1 when s_d <= 0.
PValueVector pvalues_lognormal(const Vector& scores, const std::vector<bool>& active = {});
PValueVector pvalues_lognormal(const WekoScores& s);

PValueVector estimate_pvalues(const WekoScores& s, PValueMethod method);

enum class SelectionKind { Threshold, BenjaminiHochberg, Fixed, Varying };

const char* to_string(SelectionKind k);

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::Threshold;
  double value = 0.05;  // threshold, BH alpha, or r for Fixed

  static SelectionStrategy parse(const std::string& s);
  std::string str() const;
};

struct FeatureRecord {
  std::size_t index = 0;
  std::string name;
  double score = 0.0;
  double p = 1.0;
  bool selected = false;
};

struct CandidateScore {
  std::size_t r = 0;
  double objective = 0.0;
};

struct SelectionResult {
  std::vector<std::size_t> selected;  // canonical order
  SelectionKind strategy = SelectionKind::Threshold;
  double threshold_used = 0.0;        // Threshold and BH: largest selected p cut
  std::size_t r_used = 0;             // Fixed and Varying
  std::vector<FeatureRecord> per_feature;
  std::vector<CandidateScore> candidates;  // Varying only
};

// Ascending p, then descending score, then ascending index.
std::vector<std::size_t> canonical_order(const PValueVector& p, const Vector& scores);

SelectionResult select_threshold(const PValueVector& p, const Vector& scores, double threshold);
SelectionResult select_bh(const PValueVector& p, const Vector& scores, double alpha);
SelectionResult select_fixed(const PValueVector& p, const Vector& scores, std::size_t r);

struct VaryingOptions {
  std::vector<std::size_t> candidates{10, 20, 50, 100, 150};
  std::size_t folds = 5;
  double ridge_alpha = 1e-3;
  std::uint64_t seed = 0;
};

// k-fold CV of ridge fits predicting each signal from the top-r features;
// the objective is the lambda-weighted mean validation MSE. Ties go to the
// smaller r. Candidates above d_max are clipped.
SelectionResult select_varying(const PValueVector& p, const Vector& scores, const Matrix& psi,
                               const SignalBundle& bundle, const VaryingOptions& opts);

// Solves (A^T A + n alpha I) b = A^T y.
Vector ridge_fit(const Matrix& a, const Vector& y, double alpha);

struct ComponentFit {
  std::size_t component = 0;
  std::vector<std::size_t> support;
  Vector coefficients;
  double rmse = 0.0;
};

// Added to the diagonal of A^T A in component fits.
inline constexpr double kComponentRidge = 1e-8;

ComponentFit fit_component(const Matrix& psi, const Vector& z, std::vector<std::size_t> support,
                           std::size_t component = 0);

}  // namespace spofe
