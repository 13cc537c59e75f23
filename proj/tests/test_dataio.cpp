#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spofe/dataio.hpp"
#include "spofe/error.hpp"

using namespace spofe;

namespace {

Dataset parse(const std::string& text, bool header = true) {
  std::istringstream in(text);
  return parse_csv(in, header);
}

}  // namespace

TEST_CASE("load_csv parses a small file with header") {
  const auto d = parse("a,b\n1,2\n3,4\n5,6\n");
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 2);
  CHECK(d.column_names == std::vector<std::string>{"a", "b"});
  CHECK(d.values(2, 1) == 6.0);
}

TEST_CASE("load_csv reports the coordinates of a non-numeric cell") {
  try {
    parse("a,b\n1,2\n1,x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.col() == 2);
  }
}

TEST_CASE("load_csv error cases") {
  CHECK_THROWS_AS(parse("a,b\n"), Error);
  try {
    parse("a,b\n");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
  try {
    parse("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  CHECK_THROWS_AS(parse("a,b\n1,nan\n2,3\n"), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,inf\n2,3\n"), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,\n2,3\n"), ParseError);
  CHECK_THROWS_AS(parse("a,a\n1,2\n2,3\n"), Error);
  CHECK_THROWS_AS(load_csv("/nonexistent/spofe/file.csv"), Error);
}

TEST_CASE("load_csv without header names columns x0..") {
  const auto d = parse("1,2,3\n4,5,6\n", false);
  CHECK(d.column_names == std::vector<std::string>{"x0", "x1", "x2"});
  CHECK(d.rows() == 2);
}

TEST_CASE("load_csv preserves representable decimals exactly") {
  const auto d = parse("a\n0.1\n-1e-300\n123456789.123456789\n");
  CHECK(d.values(0, 0) == 0.1);
  CHECK(d.values(1, 0) == -1e-300);
  CHECK(d.values(2, 0) == 123456789.123456789);
}

TEST_CASE("csv write then load reproduces values bitwise") {
  const Matrix m = oracle::gaussian(7, 3, 11);
  const auto path = std::filesystem::temp_directory_path() / "spofe_roundtrip.csv";
  write_csv(path, {"u", "v", "w"}, m);
  const auto d = load_csv(path);
  std::filesystem::remove(path);
  CHECK(d.values == m);
}

TEST_CASE("standardize z-scores by population moments") {
  Matrix v(2, 1);
  v << 1, 3;
  const auto st = standardize(make_dataset(v, {"a"}));
  CHECK(st.data.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(st.data.values(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.params.means(0) == 2.0);
  CHECK(st.params.stds(0) == 1.0);
}

TEST_CASE("standardize drops zero-variance columns") {
  Matrix v(3, 2);
  v << 5, 1, 5, 2, 5, 4;
  const auto st = standardize(make_dataset(v, {"const", "x"}));
  CHECK(st.data.cols() == 1);
  CHECK(st.params.dropped == std::vector<std::string>{"const"});
  CHECK(st.data.column_names == std::vector<std::string>{"x"});

  Matrix all_const = Matrix::Constant(4, 2, 3.0);
  try {
    standardize(make_dataset(all_const, {"a", "b"}));
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
}

TEST_CASE("standardize is idempotent and meets moment tolerances") {
  const Matrix m = oracle::gaussian(50, 4, 3) * 7.0 + Matrix::Constant(50, 4, 3.0);
  const auto once = standardize(make_dataset(m, {"a", "b", "c", "d"}));
  const auto twice = standardize(once.data);
  CHECK((once.data.values - twice.data.values).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const auto col = once.data.values.col(j);
    CHECK(std::abs(col.mean()) <= 1e-10 * 50);
    CHECK(std::abs(std::sqrt(col.squaredNorm() / 50.0) - 1.0) <= 1e-10);
  }
}

TEST_CASE("subsample") {
  const Matrix m = oracle::gaussian(100, 3, 5);
  const auto d = make_dataset(m, {"a", "b", "c"});

  SUBCASE("no-op when under the cap") {
    const auto small = make_dataset(m.topRows(10), {"a", "b", "c"});
    CHECK(subsample(small, 20, 1).values == small.values);
  }
  SUBCASE("deterministic, exact size, distinct rows") {
    const auto a = subsample_indices(100, 50, 7);
    const auto b = subsample_indices(100, 50, 7);
    CHECK(a == b);
    CHECK(a.size() == 50);
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 50);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(subsample_indices(100, 50, 8) != a);
  }
  SUBCASE("output rows are bitwise input rows") {
    const auto idx = subsample_indices(100, 30, 9);
    const auto s = subsample(d, 30, 9);
    REQUIRE(s.rows() == 30);
    for (std::size_t r = 0; r < idx.size(); ++r)
      CHECK(s.values.row(static_cast<Eigen::Index>(r)) == m.row(static_cast<Eigen::Index>(idx[r])));
  }
}
