#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "spofe/dataio.hpp"

namespace spofe {

enum class KernelKind { Cosine, Rbf, Sigmoid, RffRbf };

const char* to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& s);

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  std::optional<double> gamma;  // nullopt means "auto", i.e. 1/p
  double coef0 = 1.0;           // sigmoid only
  std::size_t rff_dim = 2000;   // RffRbf only
  std::uint64_t rff_seed = 0;   // RffRbf only

  double resolved_gamma(std::size_t p) const;
};

struct KernelMatrix {
  Matrix values;
  bool centered = false;
};

// Exact kernel evaluation. For RffRbf this is the RBF kernel the random
// features approximate.
double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Dense n x n kernel matrix, filled in parallel over rows. RffRbf returns the
// Gram matrix of rff_features.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Dataset& d);

// Double centering: K - 1K - K1 + 1K1 with 1 = (1/n) 11^T.
KernelMatrix center(const KernelMatrix& k);

// Row i is sqrt(2/D) cos(W x_i + b), W ~ N(0, 2 gamma), b ~ U[0, 2pi).
Matrix rff_features(const KernelSpec& spec, const Dataset& d);

KernelMatrix gram_matrix(const Matrix& features);

}  // namespace spofe
