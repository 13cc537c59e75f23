#include "spofe/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "spofe/error.hpp"
#include "spofe/rng.hpp"

namespace spofe {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

std::vector<std::string> default_column_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

Dataset make_dataset(Matrix values, std::vector<std::string> names) {
  if (values.rows() < 2) throw Error(ErrorKind::EmptyInput, "dataset needs at least 2 rows");
  if (values.cols() < 1) throw Error(ErrorKind::EmptyInput, "dataset needs at least 1 column");
  if (names.size() != static_cast<std::size_t>(values.cols()))
    throw Error(ErrorKind::Parse, "column name count does not match column count");
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw Error(ErrorKind::Parse, "empty column name");
    if (!seen.insert(n).second) throw Error(ErrorKind::Parse, "duplicate column name '" + n + "'");
  }
  if (!values.allFinite()) throw Error(ErrorKind::Parse, "non-finite value in dataset");
  return Dataset{std::move(values), std::move(names)};
}

Dataset parse_csv(std::istream& in, bool has_header) {
  std::vector<std::string> names;
  std::vector<double> cells;
  std::size_t p = 0;
  std::size_t row = 0;
  std::string line;
  bool header_pending = has_header;

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (header_pending) {
      for (auto f : fields) names.push_back(unquote(f));
      p = names.size();
      header_pending = false;
      continue;
    }
    ++row;
    if (p == 0) p = fields.size();
    if (fields.size() != p)
      throw ParseError(row, std::min(fields.size(), p) + 1,
                       "expected " + std::to_string(p) + " fields, found " +
                           std::to_string(fields.size()));
    for (std::size_t j = 0; j < p; ++j) {
      const auto f = fields[j];
      double v = 0.0;
      const auto* first = f.data();
      const auto* last = f.data() + f.size();
      if (first != last && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc() || ptr != last)
        throw ParseError(row, j + 1, "not a number: '" + std::string(f) + "'");
      if (!std::isfinite(v)) throw ParseError(row, j + 1, "non-finite value '" + std::string(f) + "'");
      cells.push_back(v);
    }
  }

  if (row == 0) throw Error(ErrorKind::EmptyInput, "no data rows");
  if (names.empty()) names = default_column_names(p);

  Matrix values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t j = 0; j < p; ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * p + j];
  return make_dataset(std::move(values), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open input file: " + path.string());
  return parse_csv(in, has_header);
}

Standardized standardize(const Dataset& d) {
  const auto n = static_cast<double>(d.rows());
  StandardizationParams params;
  std::vector<double> means, stds;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    const auto col = d.values.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      params.dropped.push_back(d.column_names[j]);
      continue;
    }
    params.kept.push_back(j);
    means.push_back(mean);
    stds.push_back(sd);
  }
  if (params.kept.empty())
    throw Error(ErrorKind::DegenerateInput, "every column has zero variance");

  const auto k = static_cast<Eigen::Index>(params.kept.size());
  params.means = Eigen::Map<Vector>(means.data(), k);
  params.stds = Eigen::Map<Vector>(stds.data(), k);

  Matrix out(d.values.rows(), k);
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto j = static_cast<Eigen::Index>(params.kept[static_cast<std::size_t>(c)]);
    out.col(c) = (d.values.col(j).array() - params.means(c)) / params.stds(c);
    names.push_back(d.column_names[static_cast<std::size_t>(j)]);
  }
  return Standardized{Dataset{std::move(out), std::move(names)}, std::move(params)};
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_rows, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (n <= max_rows) return all;
  std::vector<std::size_t> picked;
  picked.reserve(max_rows);
  auto rng = make_stream(seed, "subsample");
  // std::sample is a stable selection sample: output keeps input order.
  std::sample(all.begin(), all.end(), std::back_inserter(picked), max_rows, rng);
  return picked;
}

Dataset subsample(const Dataset& d, std::size_t max_rows, std::uint64_t seed) {
  if (d.rows() <= max_rows) return d;
  const auto idx = subsample_indices(d.rows(), max_rows, seed);
  Matrix out(static_cast<Eigen::Index>(idx.size()), d.values.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = d.values.row(static_cast<Eigen::Index>(idx[r]));
  return Dataset{std::move(out), d.column_names};
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, values(i, j));
      if (j) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open output file: " + path.string());
  write_csv(out, header, values);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace spofe
