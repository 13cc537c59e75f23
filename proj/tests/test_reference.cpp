#include <doctest.h>

#include "oracles.hpp"
#include "spofe/kernels.hpp"
#include "spofe/knockoff.hpp"
#include "spofe/kpca.hpp"
#include "spofe/parallel.hpp"
#include "spofe/reference.hpp"

using namespace spofe;

namespace {

Dataset data(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  return make_dataset(oracle::gaussian(n, p, seed), default_column_names(static_cast<std::size_t>(p)));
}

}  // namespace

TEST_CASE("parallel kernel matrix equals the serial reference") {
  const auto d = data(120, 4, 1);
  for (const char* kind : {"cosine", "rbf", "sigmoid"}) {
    KernelSpec spec;
    spec.kind = parse_kernel_kind(kind);
    CHECK(kernel_matrix(spec, d).values == reference::kernel_matrix(spec, d).values);
  }
  KernelSpec rff;
  rff.kind = KernelKind::RffRbf;
  rff.rff_dim = 300;
  CHECK((kernel_matrix(rff, d).values - reference::kernel_matrix(rff, d).values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("parallel expansion equals the serial reference") {
  const Matrix x = oracle::gaussian(90, 7, 2);
  const auto basis = build_basis(7);
  CHECK(expand_raw(basis, x) == reference::expand_raw(basis, x));
}

TEST_CASE("parallel weighted knockoff scores equal the per-signal reference") {
  const auto d = data(150, 4, 3);
  KernelSpec spec;
  const auto bundle = s4gen(center(kernel_matrix(spec, d)), 5);
  const auto fm = expand(build_basis(4), d);
  const auto model = fit_knockoff_model(fm, 0.05);
  const Matrix kt = sample_knockoffs(fm.psi, model, 4);
  WekoOptions opts;
  const int before = thread_count();
  set_thread_count(4);
  const auto par = weko_with_knockoffs(fm.psi, kt, fm.active, bundle, opts, 4);
  set_thread_count(before);
  const auto ser = reference::weko_with_knockoffs(fm.psi, kt, fm.active, bundle, opts, 4);
  CHECK((par.per_signal - ser.per_signal).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((par.s - ser.s).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(par.lambda_used == ser.lambda_used);
}

TEST_CASE("active-set lasso agrees with the naive residual solver") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix a = oracle::gaussian(60, 25, seed + 10);
    const Vector y = oracle::gaussian(60, 1, seed + 20).col(0);
    const auto fast = lasso_cd(a, y, 0.05, {1e-11, 100000});
    const auto slow = reference::lasso_cd(a, y, 0.05, {1e-11, 100000});
    CHECK((fast.beta - slow.beta).cwiseAbs().maxCoeff() <= 1e-7);
  }
}
