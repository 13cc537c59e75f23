#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spofe/inference.hpp"
#include "spofe/kernels.hpp"
#include "spofe/knockoff.hpp"

namespace spofe {

struct PipelineConfig {
  KernelSpec kernel;
  std::size_t num_components = 50;
  double fdr_q = 0.2;
  SelectionStrategy selection;  // threshold:0.05
  PValueMethod pvalue_method = PValueMethod::Percentile;
  std::uint64_t seed = 0;
  LambdaRule lambda_rule;
  LassoOptions lasso;
  double shrinkage = 0.05;
  std::size_t max_rows = 15000;
  std::vector<std::size_t> candidates{10, 20, 50, 100, 150};
  std::size_t cv_folds = 5;
  double ridge_alpha = 1e-3;
  bool component_fits = true;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&);
};

bool operator==(const KernelSpec& a, const KernelSpec& b);

// Throws Error(Config) naming the first out-of-range field.
void validate(const PipelineConfig& cfg);

// Flat key/value view; keys mirror the field names above. Values are the
// strings a config file or command line would carry.
std::map<std::string, std::string> to_key_values(const PipelineConfig& cfg);
void apply_key_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

nlohmann::ordered_json to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);

// "key = value" lines, '#' comments, optional double quotes around values.
// A .json file is also accepted: either a bare config object or a report
// whose "config" member is one.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig parse_config_text(const std::string& text, PipelineConfig base = {});

}  // namespace spofe
