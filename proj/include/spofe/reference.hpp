#pragma once

// Serial, unoptimized counterparts of the parallel kernels. Kept for tests
// and for the benchmark; not used by the pipeline.

#include "spofe/knockoff.hpp"
#include "spofe/lasso.hpp"
#include "spofe/polybasis.hpp"

namespace spofe::reference {

// Evaluates every (i, j) entry independently, no symmetry shortcut.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Dataset& d);

Matrix expand_raw(const PolyBasis& basis, const Matrix& x);

// One lasso design per signal, signals in order.
WekoScores weko_with_knockoffs(const Matrix& psi, const Matrix& psi_tilde, const std::vector<bool>& active,
                               const SignalBundle& bundle, const WekoOptions& opts, std::uint64_t seed);

// Naive coordinate descent on the residual, no Gram matrix, no active set.
LassoResult lasso_cd(const Matrix& a, const Vector& y, double lambda, const LassoOptions& opts = {});

}  // namespace spofe::reference
