#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spofe/knockoff.hpp"

namespace spofe {

// Synthetic ground truth for the FDR and reconstruction checks: X is i.i.d.
// standard normal, the signal is a k-sparse combination of expanded terms
// plus Gaussian noise.
struct SimulationSpec {
  std::size_t n = 500;
  std::size_t p = 10;
  std::size_t k = 5;
  double coefficient = 1.0;
  double noise = 1.0;
  double q = 0.2;
  std::size_t repeats = 50;
  std::uint64_t seed = 0;
  double shrinkage = 0.05;
  LambdaRule lambda_rule;
  LassoOptions lasso;
};

void validate(const SimulationSpec& spec);

struct RepeatOutcome {
  std::vector<std::size_t> truth;     // true support, ascending
  std::vector<std::size_t> selected;  // knockoff+ selection, ascending
  double fdp = 0.0;
  double power = 0.0;
  double rmse_selected = 0.0;
  double rmse_oracle = 0.0;
};

struct SimulationSummary {
  std::size_t repeats = 0;
  double fdr = 0.0;
  double fdr_se = 0.0;
  double power = 0.0;
  double power_se = 0.0;
  double rmse_gap = 0.0;  // mean |rmse_selected - rmse_oracle|
  double rmse_gap_se = 0.0;
  double mean_selected = 0.0;
  double max_null_frequency = 0.0;  // highest selection rate of any null term
  std::vector<RepeatOutcome> outcomes;
};

// Repeat r draws from stream (seed, "sim", r); repeats run in parallel.
RepeatOutcome simulate_repeat(const SimulationSpec& spec, std::size_t r);
SimulationSummary simulate_fdr(const SimulationSpec& spec);

}  // namespace spofe
