#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spofe/config.hpp"
#include "spofe/dataio.hpp"
#include "spofe/error.hpp"
#include "spofe/parallel.hpp"
#include "spofe/pipeline.hpp"
#include "spofe/polybasis.hpp"
#include "spofe/simulate.hpp"

namespace {

using spofe::ErrorKind;

// Flag name -> config key. Only flags the user actually passed override the
// config file.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  spofe::PipelineConfig resolve() const {
    spofe::PipelineConfig cfg;
    if (!config_path.empty()) cfg = spofe::load_config_file(config_path, cfg);
    for (const auto& [k, v] : values) spofe::apply_key_value(cfg, k, v);
    spofe::validate(cfg);
    return cfg;
  }
};

void add_kernel_flags(CLI::App& app, ConfigFlags& f) {
  app.add_option("--config", f.config_path, "Config file (key = value lines, or JSON)");
  f.add(app, "--kernel", "kernel", "cosine | rbf | sigmoid | rff");
  f.add(app, "--gamma", "gamma", "Kernel bandwidth or 'auto' (1/p)");
  f.add(app, "--coef0", "coef0", "Sigmoid offset");
  f.add(app, "--rff-dim", "rff_dim", "Random Fourier feature count");
  f.add(app, "--num-components", "num_components", "Kernel components m");
  f.add(app, "--seed", "seed", "Master seed");
  f.add(app, "--max-rows", "max_rows", "Row cap before subsampling");
}

void report_error(const std::string& stage, ErrorKind kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"stage", stage}, {"kind", spofe::to_string(kind)}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw spofe::Error(ErrorKind::Io, "cannot open output file: " + path);
  out << text;
  if (!out) throw spofe::Error(ErrorKind::Io, "write failed: " + path);
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> out;
  for (Eigen::Index j = 1; j <= count; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  spofe::configure_threads_from_env();

  CLI::App app{"spofe: sparse polynomial features from kernel principal components with knockoff selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPOFE_VERSION);

  // run
  auto* run = app.add_subcommand("run", "Run the full selection pipeline on a CSV file");
  std::string run_input, run_output, psi_csv, signals_csv, lambdas_csv, w_csv;
  bool run_no_header = false, timings = false;
  ConfigFlags run_flags;
  run->add_option("--input", run_input, "Input CSV")->required();
  run->add_flag("--no-header", run_no_header, "Input has no header row");
  add_kernel_flags(*run, run_flags);
  run_flags.add(*run, "--fdr", "fdr_q", "Per-component knockoff FDR level q");
  run_flags.add(*run, "--selection", "selection", "threshold:<t> | bh:<alpha> | fixed:<r> | auto");
  run_flags.add(*run, "--pvalues", "pvalue_method", "percentile | lognormal");
  run_flags.add(*run, "--lambda-rule", "lambda_rule", "universal[:c] | fixed:<lambda> | cv[:folds]");
  run_flags.add(*run, "--shrinkage", "shrinkage", "Covariance shrinkage toward identity");
  run->add_option("--output", run_output, "Report path (default stdout)");
  run->add_flag("--timings", timings, "Include per-stage timings in the report");
  run->add_option("--psi-csv", psi_csv, "Write the expanded feature matrix");
  run->add_option("--signals-csv", signals_csv, "Write kernel component signals");
  run->add_option("--lambdas-csv", lambdas_csv, "Write scaled eigenvalues");
  run->add_option("--w-csv", w_csv, "Write per-signal knockoff statistics");

  // expand
  auto* exp = app.add_subcommand("expand", "Write the degree-2 polynomial feature matrix");
  std::string exp_input, exp_output;
  bool exp_no_header = false, exp_raw = false;
  exp->add_option("--input", exp_input, "Input CSV")->required();
  exp->add_option("--output", exp_output, "Output CSV (default stdout)");
  exp->add_flag("--no-header", exp_no_header, "Input has no header row");
  exp->add_flag("--raw", exp_raw, "Raw monomials of the input as given, no standardization");

  // simulate-fdr
  auto* sim = app.add_subcommand("simulate-fdr", "Monte-Carlo check of knockoff FDR control and fit quality");
  spofe::SimulationSpec spec;
  std::string sim_lambda = spec.lambda_rule.str(), sim_output;
  bool sim_details = false;
  sim->add_option("--n", spec.n, "Rows")->capture_default_str();
  sim->add_option("--p", spec.p, "Raw variables")->capture_default_str();
  sim->add_option("--k", spec.k, "True support size")->capture_default_str();
  sim->add_option("--coef", spec.coefficient, "Coefficient magnitude")->capture_default_str();
  sim->add_option("--noise", spec.noise, "Noise standard deviation")->capture_default_str();
  sim->add_option("--q", spec.q, "Target FDR")->capture_default_str();
  sim->add_option("--repeats", spec.repeats, "Repeats")->capture_default_str();
  sim->add_option("--seed", spec.seed, "Master seed")->capture_default_str();
  sim->add_option("--shrinkage", spec.shrinkage, "Covariance shrinkage")->capture_default_str();
  sim->add_option("--lambda-rule", sim_lambda, "Lasso penalty rule")->capture_default_str();
  sim->add_option("--output", sim_output, "Summary path (default stdout)");
  sim->add_flag("--details", sim_details, "Include per-repeat outcomes");

  // dump-signals
  auto* dump = app.add_subcommand("dump-signals", "Write kernel component signals and their weights");
  std::string dump_input, dump_output, dump_lambdas;
  bool dump_no_header = false;
  ConfigFlags dump_flags;
  dump->add_option("--input", dump_input, "Input CSV")->required();
  dump->add_flag("--no-header", dump_no_header, "Input has no header row");
  add_kernel_flags(*dump, dump_flags);
  dump->add_option("--output", dump_output, "Signal matrix CSV (default stdout)");
  dump->add_option("--lambdas", dump_lambdas, "Scaled eigenvalue CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string stage = "setup";
  try {
    if (*run) {
      stage = "config";
      const auto cfg = run_flags.resolve();
      stage = "dataio";
      const auto data = spofe::load_csv(run_input, !run_no_header);
      spofe::PipelineArtifacts art;
      const auto report = spofe::run_pipeline(cfg, data, &art);
      stage = "output";
      write_text(run_output, spofe::to_json(report, timings).dump(2) + "\n");
      if (!psi_csv.empty()) spofe::write_csv(psi_csv, art.term_names, art.features.psi);
      if (!signals_csv.empty())
        spofe::write_csv(signals_csv, numbered("z", art.signals.signals.cols()), art.signals.signals);
      if (!lambdas_csv.empty()) spofe::write_csv(lambdas_csv, {"lambda"}, spofe::Matrix(art.signals.lambdas));
      if (!w_csv.empty()) spofe::write_csv(w_csv, numbered("W", art.scores.per_signal.cols()), art.scores.per_signal);
    } else if (*exp) {
      stage = "dataio";
      const auto data = spofe::load_csv(exp_input, !exp_no_header);
      stage = "polybasis";
      const spofe::Dataset x = exp_raw ? data : spofe::standardize(data).data;
      const auto basis = spofe::build_basis(x.cols());
      const spofe::Matrix psi = exp_raw ? spofe::expand_raw(basis, x.values) : spofe::expand(basis, x).psi;
      stage = "output";
      std::ostringstream os;
      spofe::write_csv(os, spofe::term_names(basis, x.column_names), psi);
      write_text(exp_output, os.str());
    } else if (*sim) {
      stage = "config";
      spec.lambda_rule = spofe::LambdaRule::parse(sim_lambda);
      spofe::validate(spec);
      stage = "simulate";
      const auto s = spofe::simulate_fdr(spec);
      nlohmann::ordered_json j;
      j["schema_version"] = spofe::kReportSchemaVersion;
      j["spec"] = {{"n", spec.n}, {"p", spec.p}, {"k", spec.k}, {"coef", spec.coefficient},
                   {"noise", spec.noise}, {"q", spec.q}, {"repeats", spec.repeats}, {"seed", spec.seed},
                   {"shrinkage", spec.shrinkage}, {"lambda_rule", spec.lambda_rule.str()}};
      j["fdr"] = s.fdr;
      j["fdr_se"] = s.fdr_se;
      j["power"] = s.power;
      j["power_se"] = s.power_se;
      j["rmse_gap"] = s.rmse_gap;
      j["rmse_gap_se"] = s.rmse_gap_se;
      j["mean_selected"] = s.mean_selected;
      j["max_null_frequency"] = s.max_null_frequency;
      if (sim_details) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& o : s.outcomes)
          arr.push_back({{"truth", o.truth}, {"selected", o.selected}, {"fdp", o.fdp}, {"power", o.power},
                         {"rmse_selected", o.rmse_selected}, {"rmse_oracle", o.rmse_oracle}});
        j["repeats"] = arr;
      }
      stage = "output";
      write_text(sim_output, j.dump(2) + "\n");
    } else if (*dump) {
      stage = "config";
      const auto cfg = dump_flags.resolve();
      stage = "dataio";
      const auto data = spofe::load_csv(dump_input, !dump_no_header);
      const auto bundle = spofe::generate_signals(cfg, data);
      stage = "output";
      std::ostringstream os;
      spofe::write_csv(os, numbered("z", bundle.signals.cols()), bundle.signals);
      write_text(dump_output, os.str());
      if (!dump_lambdas.empty())
        spofe::write_csv(dump_lambdas, {"lambda"}, spofe::Matrix(bundle.lambdas));
    }
  } catch (const spofe::StageError& e) {
    report_error(e.stage(), e.kind(), e.what());
    return spofe::exit_code(e.kind());
  } catch (const spofe::Error& e) {
    report_error(stage, e.kind(), e.what());
    return spofe::exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error(stage, ErrorKind::Numerical, e.what());
    return 1;
  }
  return 0;
}
