#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spofe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tabular data, n rows by p columns. Construct through make_dataset or
// load_csv; both enforce the invariants (n >= 2, p >= 1, finite entries,
// unique nonempty names).
struct Dataset {
  Matrix values;
  std::vector<std::string> column_names;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

Dataset make_dataset(Matrix values, std::vector<std::string> names);

// Names used when the input has no header: x0, x1, ...
std::vector<std::string> default_column_names(std::size_t p);

Dataset parse_csv(std::istream& in, bool has_header = true);
Dataset load_csv(const std::filesystem::path& path, bool has_header = true);

struct StandardizationParams {
  Vector means;                             // retained columns
  Vector stds;                              // population standard deviations
  std::vector<std::size_t> kept;            // original indices of retained columns
  std::vector<std::string> dropped;         // zero-variance columns
};

struct Standardized {
  Dataset data;
  StandardizationParams params;
};

Standardized standardize(const Dataset& d);

// Sorted original row indices retained by subsample.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_rows, std::uint64_t seed);

// Uniform sample without replacement when n > max_rows; row order is kept.
Dataset subsample(const Dataset& d, std::size_t max_rows, std::uint64_t seed);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values);
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values);

}  // namespace spofe
