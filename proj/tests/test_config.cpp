#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spofe/config.hpp"
#include "spofe/error.hpp"

using namespace spofe;

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK(c.num_components == 50);
  CHECK(c.fdr_q == 0.2);
  CHECK(c.max_rows == 15000);
  CHECK(c.pvalue_method == PValueMethod::Percentile);
  CHECK(c.shrinkage == 0.05);
  CHECK(c.kernel.rff_dim == 2000);
  CHECK(c.kernel.coef0 == 1.0);
  CHECK_FALSE(c.kernel.gamma.has_value());
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("config echo round-trips through JSON and key/value text") {
  PipelineConfig c;
  c.kernel.kind = KernelKind::Sigmoid;
  c.kernel.gamma = 0.1234567890123;
  c.kernel.coef0 = -0.5;
  c.num_components = 7;
  c.fdr_q = 0.1;
  c.selection = SelectionStrategy::parse("bh:0.05");
  c.pvalue_method = PValueMethod::LogNormal;
  c.seed = 18446744073709551615ULL;
  c.lambda_rule = LambdaRule::parse("universal:0.75");
  c.lasso.tol = 3e-8;
  c.shrinkage = 0.1;
  c.candidates = {3, 9};
  c.component_fits = false;

  const auto j = to_json(c);
  CHECK(config_from_json(nlohmann::json::parse(j.dump())) == c);

  std::string text;
  for (const auto& [k, v] : to_key_values(c)) text += k + " = \"" + v + "\"\n";
  CHECK(parse_config_text(text) == c);
}

TEST_CASE("config file parsing") {
  const auto c = parse_config_text("# comment\nkernel = cosine\nnum_components = 12  # trailing\nselection = fixed:10\ngamma = auto\n");
  CHECK(c.kernel.kind == KernelKind::Cosine);
  CHECK(c.num_components == 12);
  CHECK(c.selection.kind == SelectionKind::Fixed);
  CHECK(c.selection.value == 10);

  CHECK_THROWS_AS(parse_config_text("bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_config_text("kernel\n"), Error);
  CHECK_THROWS_AS(parse_config_text("fdr_q = abc\n"), Error);
  CHECK_THROWS_AS(parse_config_text("selection = fixed:2.5\n"), Error);
}

TEST_CASE("config file: JSON report echo is accepted") {
  PipelineConfig c;
  c.num_components = 3;
  nlohmann::ordered_json report;
  report["config"] = to_json(c);
  const auto path = std::filesystem::temp_directory_path() / "spofe_cfg_test.json";
  std::ofstream(path) << report.dump();
  CHECK(load_config_file(path) == c);
  std::filesystem::remove(path);
}

TEST_CASE("validation rejects out-of-range values") {
  PipelineConfig c;
  c.fdr_q = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.shrinkage = 1.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.num_components = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.max_rows = 1;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_THROWS_AS(SelectionStrategy::parse("bh:1.5"), Error);
  CHECK_THROWS_AS(LambdaRule::parse("cv:1"), Error);
}
