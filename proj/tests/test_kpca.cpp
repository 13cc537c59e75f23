#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spofe/error.hpp"
#include "spofe/kernels.hpp"
#include "spofe/kpca.hpp"

using namespace spofe;

namespace {

KernelMatrix centered_rbf(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  const auto d = make_dataset(oracle::gaussian(n, p, seed), default_column_names(static_cast<std::size_t>(p)));
  return center(kernel_matrix(KernelSpec{}, d));
}

}  // namespace

TEST_CASE("eigendecompose 2x2 hand example") {
  Matrix k(2, 2);
  k << 1, -1, -1, 1;
  const auto e = eigendecompose(KernelMatrix{k, true}, 2);
  CHECK(e.values(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(e.values(1)) <= 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  // Sign convention: largest-magnitude entry positive, lowest index on ties.
  CHECK(e.vectors(0, 0) == doctest::Approx(r).epsilon(1e-14));
  CHECK(e.vectors(1, 0) == doctest::Approx(-r).epsilon(1e-14));
}

TEST_CASE("eigendecompose residuals, orthonormality and reconstruction") {
  const auto kc = centered_rbf(80, 3, 4);
  const auto e = eigendecompose(kc, 80);
  const double scale = std::max(1.0, std::abs(e.values(0)));
  for (Eigen::Index j = 0; j < 80; ++j)
    CHECK((kc.values * e.vectors.col(j) - e.values(j) * e.vectors.col(j)).norm() <= 1e-7 * scale);
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(80, 80)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - kc.values).cwiseAbs().maxCoeff() <= 1e-7);
  for (Eigen::Index j = 1; j < 80; ++j) CHECK(e.values(j) <= e.values(j - 1));

  const auto top = eigendecompose(kc, 5);
  CHECK(top.values.size() == 5);
  CHECK(top.vectors.cols() == 5);
}

TEST_CASE("eigendecompose of the zero matrix") {
  const auto e = eigendecompose(KernelMatrix{Matrix::Zero(4, 4), true}, 4);
  CHECK(e.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(s4gen(KernelMatrix{Matrix::Zero(4, 4), true}, 2), Error);
}

TEST_CASE("s4gen keeps only positive eigenvalues") {
  Matrix k(2, 2);
  k << 1, -1, -1, 1;
  const auto b = s4gen(KernelMatrix{k, true}, 2);
  CHECK(b.m_requested == 2);
  CHECK(b.m_eff == 1);
  CHECK(b.lambdas(0) == doctest::Approx(1.0));
  CHECK(b.signals(0, 0) == doctest::Approx(1.0));
  CHECK(b.signals(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("s4gen invariants on an rbf kernel") {
  const auto kc = centered_rbf(70, 4, 5);
  const auto all = symmetric_eigen(kc.values);
  const auto b = s4gen(kc, 10);
  REQUIRE(b.m_eff == 10);
  CHECK((b.lambdas.array() > 0.0).all());
  for (Eigen::Index j = 1; j < 10; ++j) CHECK(b.lambdas(j) <= b.lambdas(j - 1));
  CHECK(b.lambdas.sum() <= 1.0 + 1e-10);
  CHECK(b.signals.allFinite());
  for (Eigen::Index j = 0; j < 10; ++j) {
    const auto col = b.signals.col(j);
    CHECK(std::abs(col.mean()) <= 1e-10);
    CHECK(std::abs(col.squaredNorm() / 70.0 - 1.0) <= 1e-8);
  }

  SUBCASE("m = 1 gives mu_1 over the positive spectrum") {
    double pos = 0.0;
    for (Eigen::Index j = 0; j < all.values.size(); ++j)
      if (all.values(j) > kEigenFloor * std::max(1.0, all.values(0))) pos += all.values(j);
    CHECK(s4gen(kc, 1).lambdas(0) == doctest::Approx(all.values(0) / pos).epsilon(1e-12));
  }
  SUBCASE("PSD kernel: weights equal trace share") {
    CHECK(std::abs(b.lambdas.sum() - b.eigenvalues.sum() / kc.values.trace()) <= 1e-8);
  }
  SUBCASE("weights are invariant to scaling the kernel") {
    const auto scaled = s4gen(KernelMatrix{kc.values * 7.5, true}, 10);
    CHECK((scaled.lambdas - b.lambdas).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("unscaled projection column j equals mu_j v_j") {
    const auto e = eigendecompose(kc, 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const Vector proj = kc.values * e.vectors.col(j);
      CHECK((proj - e.values(j) * e.vectors.col(j)).cwiseAbs().maxCoeff() <= 1e-7);
      // The scaled signal is the same direction up to a positive factor.
      const Vector unit = proj / std::sqrt(proj.squaredNorm() / 70.0);
      CHECK((unit - b.signals.col(j)).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("m larger than n is clipped") {
    const auto big = s4gen(kc, 500);
    CHECK(big.m_eff <= 70);
    CHECK(big.m_requested == 500);
  }
}

TEST_CASE("sigmoid kernel: negative eigenvalues excluded from weights") {
  const auto d = make_dataset(oracle::gaussian(60, 3, 9) * 3.0, default_column_names(3));
  KernelSpec s;
  s.kind = KernelKind::Sigmoid;
  s.gamma = 1.0;
  s.coef0 = -1.0;
  const auto kc = center(kernel_matrix(s, d));
  const auto all = symmetric_eigen(kc.values);
  REQUIRE(all.values.minCoeff() < -1e-6);  // genuinely indefinite
  const auto b = s4gen(kc, 60);
  CHECK((b.eigenvalues.array() > 0.0).all());
  CHECK(b.lambdas.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
