#include "spofe/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "spofe/error.hpp"
#include "spofe/rng.hpp"

namespace spofe {
namespace {

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}

  template <class F>
  auto run(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(stage, start);
      } else {
        auto out = f();
        record(stage, start);
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e.kind(), e.what());
    } catch (const std::bad_alloc&) {
      throw StageError(stage, ErrorKind::Numerical, "out of memory");
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    sink_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  std::map<std::string, double>& sink_;
};

Dataset prepare(const PipelineConfig& config, const Dataset& data, std::vector<std::string>* dropped) {
  Dataset sampled = subsample(data, config.max_rows, config.seed);
  Standardized st = standardize(sampled);
  if (dropped) *dropped = st.params.dropped;
  return std::move(st.data);
}

SignalBundle signals_from(const PipelineConfig& config, const Dataset& x) {
  KernelSpec spec = config.kernel;
  spec.rff_seed = config.seed;
  return s4gen(center(kernel_matrix(spec, x)), config.num_components);
}

}  // namespace

SignalBundle generate_signals(const PipelineConfig& config, const Dataset& data, Dataset* prepared) {
  validate(config);
  std::map<std::string, double> sink;
  StageClock clock(sink);
  Dataset x = clock.run("dataio", [&] { return prepare(config, data, nullptr); });
  SignalBundle out = clock.run("kpca", [&] { return signals_from(config, x); });
  if (prepared) *prepared = std::move(x);
  return out;
}

SelectionReport run_pipeline(const PipelineConfig& config, const Dataset& data, PipelineArtifacts* artifacts) {
  SelectionReport rep;
  StageClock clock(rep.timings);
  clock.run("config", [&] { validate(config); });
  rep.config = config;
  rep.rows_loaded = data.rows();

  const Dataset x = clock.run("dataio", [&] { return prepare(config, data, &rep.columns_dropped); });
  rep.rows_used = x.rows();
  rep.columns_used = x.column_names;
  rep.gamma_used = clock.run("kernels", [&] { return config.kernel.resolved_gamma(x.cols()); });

  SignalBundle bundle = clock.run("kpca", [&] { return signals_from(config, x); });
  rep.m_requested = bundle.m_requested;
  rep.m_eff = bundle.m_eff;
  rep.lambdas = bundle.lambdas;

  const PolyBasis basis = build_basis(x.cols());
  FeatureMatrix fm = clock.run("polybasis", [&] { return expand(basis, x); });
  const auto names = term_names(basis, x.column_names);
  rep.d_max = basis.size();
  rep.active_features = fm.active_count();

  WekoOptions wopts;
  wopts.shrinkage = config.shrinkage;
  wopts.lambda_rule = config.lambda_rule;
  wopts.lasso = config.lasso;
  KnockoffModel model;
  WekoScores scores = clock.run("knockoff", [&] { return weko(fm, bundle, wopts, config.seed, &model); });
  rep.knockoff_lambda_min = model.lambda_min;
  rep.knockoff_s = model.s.size() ? model.s(0) : 0.0;

  const PValueVector pv = clock.run("pvalues", [&] { return estimate_pvalues(scores, config.pvalue_method); });

  rep.selection = clock.run("selection", [&] {
    switch (config.selection.kind) {
      case SelectionKind::Threshold: return select_threshold(pv, scores.s, config.selection.value);
      case SelectionKind::BenjaminiHochberg: return select_bh(pv, scores.s, config.selection.value);
      case SelectionKind::Fixed:
        return select_fixed(pv, scores.s, static_cast<std::size_t>(config.selection.value));
      case SelectionKind::Varying: {
        VaryingOptions vo;
        vo.candidates = config.candidates;
        vo.folds = config.cv_folds;
        vo.ridge_alpha = config.ridge_alpha;
        vo.seed = config.seed;
        return select_varying(pv, scores.s, fm.psi, bundle, vo);
      }
    }
    throw Error(ErrorKind::Config, "unknown selection strategy");
  });
  for (auto& rec : rep.selection.per_feature) rec.name = names[rec.index];

  clock.run("components", [&] {
    for (std::size_t j = 0; j < bundle.m_eff; ++j) {
      ComponentDiagnostics cd;
      cd.component = j;
      cd.weight = bundle.lambdas(static_cast<Eigen::Index>(j));
      cd.eigenvalue = bundle.eigenvalues(static_cast<Eigen::Index>(j));
      cd.lasso_lambda = scores.lambda_used[j];
      const Vector w = scores.per_signal.col(static_cast<Eigen::Index>(j));
      const std::span<const double> wspan(w.data(), static_cast<std::size_t>(w.size()));
      cd.knockoff_threshold = knockoff_threshold(wspan, config.fdr_q);
      cd.knockoff_selected = knockoff_select(wspan, config.fdr_q);
      if (config.component_fits) {
        // The constant column stands in for an empty support.
        auto support = cd.knockoff_selected.empty() ? std::vector<std::size_t>{0} : cd.knockoff_selected;
        cd.fit = fit_component(fm.psi, bundle.signals.col(static_cast<Eigen::Index>(j)), std::move(support), j);
      }
      rep.components.push_back(std::move(cd));
    }
  });

  if (artifacts) {
    artifacts->signals = std::move(bundle);
    artifacts->features = std::move(fm);
    artifacts->scores = std::move(scores);
    artifacts->term_names = names;
  }
  return rep;
}

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::ordered_json to_json(const SelectionReport& r, bool include_timings) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = "spofe";
  j["version"] = SPOFE_VERSION;
  j["seed"] = r.config.seed;
  j["config"] = to_json(r.config);
  j["input"] = {{"rows_loaded", r.rows_loaded},
                {"rows_used", r.rows_used},
                {"columns_used", r.columns_used},
                {"columns_dropped", r.columns_dropped}};
  j["kernel"] = {{"kind", to_string(r.config.kernel.kind)},
                 {"gamma", r.gamma_used},
                 {"coef0", r.config.kernel.coef0},
                 {"rff_dim", r.config.kernel.rff_dim}};
  j["kpca"] = {{"m_requested", r.m_requested},
               {"m_eff", r.m_eff},
               {"lambdas", std::vector<double>(r.lambdas.data(), r.lambdas.data() + r.lambdas.size())}};
  j["basis"] = {{"p", r.columns_used.size()}, {"d_max", r.d_max}, {"active", r.active_features}};
  j["knockoff"] = {{"construction", "gaussian-equicorrelated"},
                   {"shrinkage", r.config.shrinkage},
                   {"lambda_min", r.knockoff_lambda_min},
                   {"s", r.knockoff_s},
                   {"statistic", "lasso-coefficient-difference"},
                   {"lambda_rule", r.config.lambda_rule.str()}};
  j["pvalues"] = {{"method", to_string(r.config.pvalue_method)}};

  json sel;
  sel["strategy"] = r.config.selection.str();
  if (r.selection.strategy == SelectionKind::Threshold || r.selection.strategy == SelectionKind::BenjaminiHochberg)
    sel["threshold_used"] = r.selection.threshold_used;
  else
    sel["r_used"] = r.selection.r_used;
  if (!r.selection.candidates.empty()) {
    json cands = json::array();
    for (const auto& c : r.selection.candidates) cands.push_back({{"r", c.r}, {"objective", c.objective}});
    sel["candidates"] = cands;
  }
  sel["count"] = r.selection.selected.size();
  json chosen = json::array();
  for (auto d : r.selection.selected)
    chosen.push_back({{"index", d}, {"term", r.selection.per_feature[d].name}});
  sel["selected"] = chosen;
  j["selection"] = sel;

  json feats = json::array();
  for (const auto& f : r.selection.per_feature)
    feats.push_back({{"index", f.index}, {"term", f.name}, {"score", f.score}, {"p_value", f.p}, {"selected", f.selected}});
  j["features"] = feats;

  json comps = json::array();
  for (const auto& c : r.components) {
    json cj = {{"component", c.component},
               {"weight", c.weight},
               {"eigenvalue", c.eigenvalue},
               {"lasso_lambda", c.lasso_lambda},
               {"knockoff_threshold", finite_or_null(c.knockoff_threshold)},
               {"knockoff_selected", c.knockoff_selected}};
    if (c.fit)
      cj["fit"] = {{"support", c.fit->support}, {"rmse", c.fit->rmse}};
    comps.push_back(cj);
  }
  j["components"] = comps;
  if (include_timings) j["timings"] = r.timings;
  return j;
}

}  // namespace spofe
