#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spofe/config.hpp"
#include "spofe/dataio.hpp"
#include "spofe/inference.hpp"
#include "spofe/knockoff.hpp"
#include "spofe/kpca.hpp"
#include "spofe/polybasis.hpp"

namespace spofe {

inline constexpr int kReportSchemaVersion = 1;

struct ComponentDiagnostics {
  std::size_t component = 0;
  double weight = 0.0;        // scaled eigenvalue
  double eigenvalue = 0.0;
  double lasso_lambda = 0.0;
  double knockoff_threshold = 0.0;  // +inf when nothing passes
  std::vector<std::size_t> knockoff_selected;
  std::optional<ComponentFit> fit;
};

struct SelectionReport {
  PipelineConfig config;
  std::size_t rows_loaded = 0;
  std::size_t rows_used = 0;
  std::vector<std::string> columns_used;
  std::vector<std::string> columns_dropped;
  double gamma_used = 0.0;
  std::size_t m_requested = 0;
  std::size_t m_eff = 0;
  Vector lambdas;
  std::size_t d_max = 0;
  std::size_t active_features = 0;
  double knockoff_lambda_min = 0.0;
  double knockoff_s = 0.0;
  SelectionResult selection;   // per_feature carries term names
  std::vector<ComponentDiagnostics> components;
  std::map<std::string, double> timings;  // seconds per stage
};

// Intermediate matrices, for the CSV side outputs.
struct PipelineArtifacts {
  SignalBundle signals;
  FeatureMatrix features;
  WekoScores scores;
  std::vector<std::string> term_names;
};

// Algorithm order: signals, polynomial matrix, weighted knockoff scores,
// p-values, selection. Failures are rethrown as StageError.
SelectionReport run_pipeline(const PipelineConfig& config, const Dataset& data,
                             PipelineArtifacts* artifacts = nullptr);

// The preprocessing and signal stages alone (dump-signals).
SignalBundle generate_signals(const PipelineConfig& config, const Dataset& data, Dataset* prepared = nullptr);

// Timings are included only when requested; they break byte-for-byte
// reproducibility.
nlohmann::ordered_json to_json(const SelectionReport& report, bool include_timings = false);

}  // namespace spofe
