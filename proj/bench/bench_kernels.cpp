// Times the OpenMP kernels against their serial references and checks that
// both produce the same numbers.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "spofe/kernels.hpp"
#include "spofe/knockoff.hpp"
#include "spofe/kpca.hpp"
#include "spofe/parallel.hpp"
#include "spofe/polybasis.hpp"
#include "spofe/reference.hpp"

using namespace spofe;

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int main(int argc, char** argv) {
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 1500;
  const Eigen::Index p = argc > 2 ? std::atol(argv[2]) : 12;
  const int threads = configure_threads_from_env();

  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = normal(rng);
  const Dataset d{x, default_column_names(static_cast<std::size_t>(p))};

  std::printf("n=%ld p=%ld threads=%d\n", static_cast<long>(n), static_cast<long>(p), threads);

  KernelSpec spec;
  KernelMatrix kp, ks;
  const double t_kp = seconds([&] { kp = kernel_matrix(spec, d); });
  const double t_ks = seconds([&] { ks = reference::kernel_matrix(spec, d); });
  std::printf("kernel_matrix   parallel %8.4fs  serial %8.4fs  max|diff| %.3g\n", t_kp, t_ks,
              (kp.values - ks.values).cwiseAbs().maxCoeff());

  const PolyBasis basis = build_basis(static_cast<std::size_t>(p));
  Matrix ep, es;
  const double t_ep = seconds([&] { ep = expand_raw(basis, x); });
  const double t_es = seconds([&] { es = reference::expand_raw(basis, x); });
  std::printf("expand_raw      parallel %8.4fs  serial %8.4fs  max|diff| %.3g\n", t_ep, t_es,
              (ep - es).cwiseAbs().maxCoeff());

  const SignalBundle bundle = s4gen(center(kp), 20);
  const FeatureMatrix fm = expand(basis, d);
  const KnockoffModel model = fit_knockoff_model(fm, 0.05);
  const Matrix tilde = sample_knockoffs(fm.psi, model, 1);
  WekoOptions opts;
  WekoScores wp, ws;
  const double t_wp = seconds([&] { wp = weko_with_knockoffs(fm.psi, tilde, fm.active, bundle, opts, 1); });
  const double t_ws = seconds([&] { ws = reference::weko_with_knockoffs(fm.psi, tilde, fm.active, bundle, opts, 1); });
  std::printf("weko (%2ld sigs) parallel %8.4fs  serial %8.4fs  max|diff| %.3g\n",
              static_cast<long>(bundle.m_eff), t_wp, t_ws, (wp.s - ws.s).cwiseAbs().maxCoeff());
  return 0;
}
