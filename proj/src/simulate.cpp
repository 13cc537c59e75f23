#include "spofe/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "spofe/error.hpp"
#include "spofe/inference.hpp"
#include "spofe/polybasis.hpp"
#include "spofe/rng.hpp"

namespace spofe {

void validate(const SimulationSpec& s) {
  if (s.n < 3 || s.p < 1) throw Error(ErrorKind::Config, "simulation needs n >= 3 and p >= 1");
  if (s.k > basis_size(s.p) - 1) throw Error(ErrorKind::Config, "k exceeds the number of non-constant terms");
  if (s.repeats < 1) throw Error(ErrorKind::Config, "repeats must be at least 1");
  if (!(s.q > 0.0 && s.q <= 1.0)) throw Error(ErrorKind::Config, "q must lie in (0, 1]");
  if (!(s.noise >= 0.0) || !std::isfinite(s.coefficient)) throw Error(ErrorKind::Config, "invalid signal parameters");
}

RepeatOutcome simulate_repeat(const SimulationSpec& spec, std::size_t r) {
  const std::uint64_t seed = derive_seed(spec.seed, "sim", r);
  auto rng = make_stream(seed, "data");
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(spec.n);

  Matrix x(n, static_cast<Eigen::Index>(spec.p));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
  const FeatureMatrix fm = expand(build_basis(spec.p), Dataset{x, default_column_names(spec.p)});

  std::vector<std::size_t> candidates;
  for (std::size_t d = 0; d < fm.active.size(); ++d)
    if (fm.active[d]) candidates.push_back(d);
  RepeatOutcome out;
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(out.truth),
              std::min(spec.k, candidates.size()), rng);

  std::bernoulli_distribution coin;
  Vector z = Vector::Zero(n);
  for (auto d : out.truth) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    z += sign * spec.coefficient * fm.psi.col(static_cast<Eigen::Index>(d));
  }
  for (Eigen::Index i = 0; i < n; ++i) z(i) += spec.noise * normal(rng);
  z.array() -= z.mean();
  const double sd = std::sqrt(z.squaredNorm() / static_cast<double>(n));
  if (sd > 0.0) z /= sd;

  const KnockoffModel model = fit_knockoff_model(fm, spec.shrinkage);
  const Matrix psi_tilde = sample_knockoffs(fm.psi, model, seed);
  const KnockoffStats st = knockoff_stats_lcd(fm.psi, psi_tilde, z, fm.active, spec.lambda_rule, spec.lasso, seed);
  out.selected = knockoff_select(std::span<const double>(st.w.data(), static_cast<std::size_t>(st.w.size())), spec.q);

  std::size_t true_hits = 0;
  for (auto d : out.selected)
    if (std::binary_search(out.truth.begin(), out.truth.end(), d)) ++true_hits;
  const std::size_t false_hits = out.selected.size() - true_hits;
  out.fdp = static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(1, out.selected.size()));
  out.power = out.truth.empty() ? 0.0 : static_cast<double>(true_hits) / static_cast<double>(out.truth.size());

  auto or_constant = [](const std::vector<std::size_t>& s) { return s.empty() ? std::vector<std::size_t>{0} : s; };
  out.rmse_selected = fit_component(fm.psi, z, or_constant(out.selected)).rmse;
  out.rmse_oracle = fit_component(fm.psi, z, or_constant(out.truth)).rmse;
  return out;
}

namespace {

std::pair<double, double> mean_se(const std::vector<double>& v) {
  const double k = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= k;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (k - 1.0) / k)};
}

}  // namespace

SimulationSummary simulate_fdr(const SimulationSpec& spec) {
  validate(spec);
  SimulationSummary sum;
  sum.repeats = spec.repeats;
  sum.outcomes.resize(spec.repeats);
  std::vector<std::exception_ptr> errors(spec.repeats);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    try {
      sum.outcomes[r] = simulate_repeat(spec, r);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> fdp, power, gap;
  std::vector<std::size_t> null_hits(basis_size(spec.p), 0);
  double selected = 0.0;
  for (const auto& o : sum.outcomes) {
    fdp.push_back(o.fdp);
    power.push_back(o.power);
    gap.push_back(std::abs(o.rmse_selected - o.rmse_oracle));
    selected += static_cast<double>(o.selected.size());
    for (auto d : o.selected)
      if (!std::binary_search(o.truth.begin(), o.truth.end(), d)) ++null_hits[d];
  }
  std::tie(sum.fdr, sum.fdr_se) = mean_se(fdp);
  std::tie(sum.power, sum.power_se) = mean_se(power);
  std::tie(sum.rmse_gap, sum.rmse_gap_se) = mean_se(gap);
  sum.mean_selected = selected / static_cast<double>(spec.repeats);
  // Per-null frequency; a term that is sometimes true only counts its null draws.
  std::vector<std::size_t> null_draws(basis_size(spec.p), spec.repeats);
  for (const auto& o : sum.outcomes)
    for (auto d : o.truth) --null_draws[d];
  for (std::size_t d = 0; d < null_hits.size(); ++d)
    if (null_draws[d] > 0)
      sum.max_null_frequency = std::max(sum.max_null_frequency,
                                        static_cast<double>(null_hits[d]) / static_cast<double>(null_draws[d]));
  return sum;
}

}  // namespace spofe
