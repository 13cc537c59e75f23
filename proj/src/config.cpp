#include "spofe/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spofe/error.hpp"

namespace spofe {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw Error(ErrorKind::Config, "invalid number for '" + key + "': '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorKind::Config, "invalid integer for '" + key + "': '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorKind::Config, "invalid boolean for '" + key + "': '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool operator==(const KernelSpec& a, const KernelSpec& b) {
  return a.kind == b.kind && a.gamma == b.gamma && a.coef0 == b.coef0 && a.rff_dim == b.rff_dim &&
         a.rff_seed == b.rff_seed;
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  return to_key_values(a) == to_key_values(b) && a.kernel == b.kernel;
}

void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, what); };
  if (c.kernel.gamma && !(*c.kernel.gamma > 0.0)) fail("gamma must be positive");
  if (c.kernel.rff_dim < 1) fail("rff_dim must be at least 1");
  if (c.num_components < 1) fail("num_components must be positive");
  if (!(c.fdr_q > 0.0 && c.fdr_q <= 1.0)) fail("fdr_q must lie in (0, 1]");
  if (!(c.shrinkage >= 0.0 && c.shrinkage < 1.0)) fail("shrinkage must lie in [0, 1)");
  if (c.max_rows < 2) fail("max_rows must be at least 2");
  if (!(c.lasso.tol > 0.0)) fail("lasso_tol must be positive");
  if (c.lasso.max_iter < 1) fail("lasso_max_iter must be positive");
  if (c.cv_folds < 2) fail("cv_folds must be at least 2");
  if (!(c.ridge_alpha >= 0.0)) fail("ridge_alpha must be non-negative");
  if (c.candidates.empty()) fail("candidates must be nonempty");
  for (auto r : c.candidates)
    if (r < 1) fail("candidates must be positive");
}

std::map<std::string, std::string> to_key_values(const PipelineConfig& c) {
  std::string cands;
  for (std::size_t i = 0; i < c.candidates.size(); ++i)
    cands += (i ? "," : "") + std::to_string(c.candidates[i]);
  return {
      {"kernel", to_string(c.kernel.kind)},
      {"gamma", c.kernel.gamma ? format_double(*c.kernel.gamma) : "auto"},
      {"coef0", format_double(c.kernel.coef0)},
      {"rff_dim", std::to_string(c.kernel.rff_dim)},
      {"num_components", std::to_string(c.num_components)},
      {"fdr_q", format_double(c.fdr_q)},
      {"selection", c.selection.str()},
      {"pvalue_method", to_string(c.pvalue_method)},
      {"seed", std::to_string(c.seed)},
      {"lambda_rule", c.lambda_rule.str()},
      {"lasso_tol", format_double(c.lasso.tol)},
      {"lasso_max_iter", std::to_string(c.lasso.max_iter)},
      {"shrinkage", format_double(c.shrinkage)},
      {"max_rows", std::to_string(c.max_rows)},
      {"candidates", cands},
      {"cv_folds", std::to_string(c.cv_folds)},
      {"ridge_alpha", format_double(c.ridge_alpha)},
      {"component_fits", c.component_fits ? "true" : "false"},
  };
}

void apply_key_value(PipelineConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "kernel") c.kernel.kind = parse_kernel_kind(v);
  else if (key == "gamma") c.kernel.gamma = v == "auto" ? std::nullopt : std::optional<double>(parse_double(key, v));
  else if (key == "coef0") c.kernel.coef0 = parse_double(key, v);
  else if (key == "rff_dim") c.kernel.rff_dim = parse_uint(key, v);
  else if (key == "num_components") c.num_components = parse_uint(key, v);
  else if (key == "fdr_q") c.fdr_q = parse_double(key, v);
  else if (key == "selection") c.selection = SelectionStrategy::parse(v);
  else if (key == "pvalue_method" || key == "pvalues") c.pvalue_method = parse_pvalue_method(v);
  else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "lambda_rule") c.lambda_rule = LambdaRule::parse(v);
  else if (key == "lasso_tol") c.lasso.tol = parse_double(key, v);
  else if (key == "lasso_max_iter") c.lasso.max_iter = parse_uint(key, v);
  else if (key == "shrinkage") c.shrinkage = parse_double(key, v);
  else if (key == "max_rows") c.max_rows = parse_uint(key, v);
  else if (key == "candidates") {
    c.candidates.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) c.candidates.push_back(parse_uint(key, trim(item)));
  } else if (key == "cv_folds") c.cv_folds = parse_uint(key, v);
  else if (key == "ridge_alpha") c.ridge_alpha = parse_double(key, v);
  else if (key == "component_fits") c.component_fits = parse_bool(key, v);
  else throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["kernel"] = to_string(c.kernel.kind);
  if (c.kernel.gamma) j["gamma"] = *c.kernel.gamma;
  else j["gamma"] = "auto";
  j["coef0"] = c.kernel.coef0;
  j["rff_dim"] = c.kernel.rff_dim;
  j["num_components"] = c.num_components;
  j["fdr_q"] = c.fdr_q;
  j["selection"] = c.selection.str();
  j["pvalue_method"] = to_string(c.pvalue_method);
  j["seed"] = c.seed;
  j["lambda_rule"] = c.lambda_rule.str();
  j["lasso_tol"] = c.lasso.tol;
  j["lasso_max_iter"] = c.lasso.max_iter;
  j["shrinkage"] = c.shrinkage;
  j["max_rows"] = c.max_rows;
  j["candidates"] = c.candidates;
  j["cv_folds"] = c.cv_folds;
  j["ridge_alpha"] = c.ridge_alpha;
  j["component_fits"] = c.component_fits;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (!j.is_object()) throw Error(ErrorKind::Config, "config JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      apply_key_value(c, key, value.get<std::string>());
    } else if (value.is_boolean()) {
      apply_key_value(c, key, value.get<bool>() ? "true" : "false");
    } else if (value.is_number_unsigned() || value.is_number_integer()) {
      if (key == "gamma" || key == "coef0" || key == "fdr_q" || key == "lasso_tol" || key == "shrinkage" ||
          key == "ridge_alpha")
        apply_key_value(c, key, format_double(value.get<double>()));
      else
        apply_key_value(c, key, std::to_string(value.get<std::uint64_t>()));
    } else if (value.is_number_float()) {
      apply_key_value(c, key, format_double(value.get<double>()));
    } else if (value.is_array() && key == "candidates") {
      c.candidates.clear();
      for (const auto& r : value) c.candidates.push_back(r.get<std::size_t>());
    } else {
      throw Error(ErrorKind::Config, "unsupported value for config key '" + key + "'");
    }
  }
  return c;
}

PipelineConfig parse_config_text(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    apply_key_value(base, key, value);
  }
  return base;
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Config, std::string("invalid JSON config: ") + e.what());
    }
    return config_from_json(j.contains("config") ? j["config"] : j);
  }
  return parse_config_text(text, std::move(base));
}

}  // namespace spofe
