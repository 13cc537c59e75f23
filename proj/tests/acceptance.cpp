// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "spofe/error.hpp"
#include "spofe/inference.hpp"
#include "spofe/kernels.hpp"
#include "spofe/knockoff.hpp"
#include "spofe/kpca.hpp"
#include "spofe/lasso.hpp"
#include "spofe/parallel.hpp"
#include "spofe/polybasis.hpp"
#include "spofe/simulate.hpp"

using namespace spofe;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string cli = SPOFE_CLI_PATH;
const std::string demo = std::string(SPOFE_DATA_DIR) + "/demo.csv";
const fs::path golden = fs::path(SPOFE_GOLDEN_DIR) / "demo_fixed10.json";
const std::string golden_args = " run --input " + demo + " --seed 42 --selection fixed:10 --num-components 10";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spofe_acceptance";
  fs::create_directories(dir);
  return dir / name;
}

Matrix covariance(const Matrix& a, const Matrix& b) {
  const Matrix ac = a.rowwise() - a.colwise().mean();
  const Matrix bc = b.rowwise() - b.colwise().mean();
  return ac.transpose() * bc / static_cast<double>(a.rows());
}

Verdict basis_counts() {
  const auto a = build_basis(24).size(), b = build_basis(25).size(), c = build_basis(20).size();
  return {a == 325 && b == 351 && c == 231,
          "d_max(24)=" + std::to_string(a) + " d_max(25)=" + std::to_string(b) + " d_max(20)=" + std::to_string(c)};
}

Verdict empirical_fdr() {
  SimulationSpec spec;
  spec.n = 500;
  spec.p = 10;
  spec.k = 5;
  spec.coefficient = 1.0;
  spec.noise = 1.0;
  spec.q = 0.2;
  spec.repeats = 50;
  const int before = thread_count();
  set_thread_count(1);
  const auto start = std::chrono::steady_clock::now();
  const auto s = simulate_fdr(spec);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  set_thread_count(before);
  return {s.fdr <= 0.25 && s.power >= 0.5 && secs <= 120.0,
          fmt("mean FDP %.4f (<= 0.25), power %.4f (>= 0.5), single-threaded %.1f s (<= 120)", s.fdr, s.power, secs)};
}

Verdict exchangeability() {
  const Eigen::Index n = 5000, d = 20;
  Matrix ar(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) ar(i, j) = std::pow(0.5, std::abs(static_cast<double>(i - j)));
  const Matrix psi = oracle::gaussian(n, d, 77) * Eigen::LLT<Matrix>(ar).matrixU();
  const auto model = fit_knockoff_model(psi, std::vector<bool>(d, true), 0.0);
  const Matrix kt = sample_knockoffs(psi, model, 78);
  const Matrix zx = (psi.rowwise() - model.mu.transpose()) * model.scale.cwiseInverse().asDiagonal();
  const Matrix zk = (kt.rowwise() - model.mu.transpose()) * model.scale.cwiseInverse().asDiagonal();
  const double tol = 6.0 / std::sqrt(static_cast<double>(n));
  const double dcov = (covariance(psi, psi) - covariance(kt, kt)).cwiseAbs().maxCoeff();
  const double dcross = (covariance(zx, zk) - (model.sigma - Matrix(model.s.asDiagonal()))).cwiseAbs().maxCoeff();
  return {dcov <= tol && dcross <= tol,
          fmt("max|cov(Psi)-cov(Psi~)| %.4f, max|cross-cov - (Sigma - diag s)| %.4f (<= %.4f)", dcov, dcross, tol)};
}

Verdict lasso_correctness() {
  double worst_kkt = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = 40 + static_cast<Eigen::Index>(seed % 5) * 20, k = 10 + static_cast<Eigen::Index>(seed % 7) * 10;
    const Matrix a = oracle::gaussian(n, k, 500 + seed);
    const Vector y = a.leftCols(3).rowwise().sum() + oracle::gaussian(n, 1, 900 + seed).col(0);
    const double lambda = lambda_max(a.transpose() * y / static_cast<double>(n)) * (0.01 + 0.009 * static_cast<double>(seed % 10));
    const auto r = lasso_cd(a, y, lambda);
    worst_kkt = std::max(worst_kkt, kkt_residual(a, y, r.beta, lambda));
  }
  double worst_soft = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Eigen::HouseholderQR<Matrix> qr(oracle::gaussian(100, 12, 1500 + seed));
    const Matrix q = Matrix(qr.householderQ()).leftCols(12) * 10.0;  // A^T A = 100 I
    const Vector y = oracle::gaussian(100, 1, 1600 + seed).col(0) * 3.0;
    const Vector c = q.transpose() * y / 100.0;
    for (double lambda : {0.0, 0.05, 0.1, 0.3, 1.0}) {
      const auto r = lasso_cd(q, y, lambda);
      for (Eigen::Index j = 0; j < 12; ++j) {
        const double expect = std::copysign(std::max(std::abs(c(j)) - lambda, 0.0), c(j));
        worst_soft = std::max(worst_soft, std::abs(r.beta(j) - expect));
      }
    }
  }
  return {worst_kkt <= 1e-6 && worst_soft <= 1e-8,
          fmt("worst KKT residual %.2e (<= 1e-6) over 100 instances, worst soft-threshold error %.2e (<= 1e-8)",
              worst_kkt, worst_soft)};
}

Verdict eigendecomposition() {
  double worst_res = 0.0, worst_orth = 0.0, worst_rows = 0.0;
  for (Eigen::Index n : {20, 100, 250, 500}) {
    const Matrix g = oracle::gaussian(n, n / 2 + 3, 3000 + static_cast<std::uint64_t>(n));
    const Matrix k = g * g.transpose() / static_cast<double>(g.cols());
    const KernelMatrix kc = center(KernelMatrix{k, false});
    worst_rows = std::max(worst_rows, kc.values.rowwise().sum().cwiseAbs().maxCoeff() / static_cast<double>(n));
    const auto e = eigendecompose(kc, static_cast<std::size_t>(n));
    const double scale = std::max(1.0, e.values(0));
    for (Eigen::Index j = 0; j < e.values.size(); ++j)
      worst_res = std::max(worst_res, (kc.values * e.vectors.col(j) - e.values(j) * e.vectors.col(j)).norm() / scale);
    worst_orth = std::max(worst_orth,
                          (e.vectors.transpose() * e.vectors - Matrix::Identity(e.vectors.cols(), e.vectors.cols())).cwiseAbs().maxCoeff());
  }
  return {worst_res <= 1e-7 && worst_orth <= 1e-8 && worst_rows <= 1e-8,
          fmt("residual/max(1,mu1) %.2e (<= 1e-7), |V^T V - I| %.2e (<= 1e-8), row sums/n %.2e (<= 1e-8)",
              worst_res, worst_orth, worst_rows)};
}

Verdict reconstruction_gap() {
  SimulationSpec spec;
  spec.n = 1000;
  spec.p = 10;
  spec.k = 5;
  spec.repeats = 20;
  spec.seed = 6;
  const auto s = simulate_fdr(spec);
  return {s.rmse_gap <= 0.1, fmt("mean |rmse(selected) - rmse(oracle)| %.4f (<= 0.1) over 20 seeds, power %.3f", s.rmse_gap, s.power)};
}

Verdict pvalue_calibration() {
  const Eigen::Index n = 200, d = 100, m = 20;
  const std::vector<bool> active(d, true);
  std::vector<double> p0;
  for (std::uint64_t run = 0; run < 200; ++run) {
    const Matrix psi = oracle::gaussian(n, d, 10000 + run);
    SignalBundle b;
    b.signals = oracle::gaussian(n, m, 20000 + run);
    b.lambdas.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) b.lambdas(j) = 1.0 / static_cast<double>(j + 1);
    b.lambdas /= b.lambdas.sum();
    b.m_eff = b.m_requested = static_cast<std::size_t>(m);
    const auto model = fit_knockoff_model(psi, active, 0.05);
    const Matrix kt = sample_knockoffs(psi, model, run);
    const auto scores = weko_with_knockoffs(psi, kt, active, b, WekoOptions{}, run);
    p0.push_back(pvalues_percentile(scores).p(0));
  }
  const double ks = oracle::ks_uniform(p0);

  const Vector distinct = oracle::gaussian(325, 1, 4).col(0);
  auto p = pvalues_percentile(distinct).p;
  std::sort(p.begin(), p.end());
  bool exact = true;
  for (Eigen::Index k = 0; k < 325; ++k) exact = exact && p(k) == static_cast<double>(k + 1) / 325.0;
  return {ks <= 0.1 && exact,
          fmt("KS distance %.4f (<= 0.1) over 200 null runs; distinct scores give exactly {k/325}: ", ks) +
              (exact ? "yes" : "no")};
}

Verdict determinism() {
  const auto a = scratch("det_a.json"), b = scratch("det_b.json"), c = scratch("det_c.json"), d = scratch("det_d.json");
  int rc = 0;
  rc |= shell("SPOFE_THREADS=1 " + cli + golden_args + " --output " + a.string());
  rc |= shell("SPOFE_THREADS=1 " + cli + golden_args + " --output " + b.string());
  rc |= shell("SPOFE_THREADS=8 " + cli + golden_args + " --output " + c.string());
  rc |= shell("SPOFE_THREADS=8 " + cli + " run --input " + demo + " --seed 7 --kernel rff --output " + d.string());
  const auto d1 = scratch("det_e.json");
  rc |= shell("SPOFE_THREADS=1 " + cli + " run --input " + demo + " --seed 7 --kernel rff --output " + d1.string());
  const std::string sa = slurp(a);
  const bool same = rc == 0 && !sa.empty() && sa == slurp(b) && sa == slurp(c) && slurp(d) == slurp(d1);
  return {same, same ? "reports byte-identical across repeated runs and SPOFE_THREADS=1 vs 8"
                     : "reports differ or a run failed (exit status " + std::to_string(rc) + ")"};
}

Verdict rff_fidelity() {
  const Dataset x = standardize(make_dataset(oracle::gaussian(50, 5, 99), default_column_names(5))).data;
  KernelSpec exact;
  exact.kind = KernelKind::Rbf;
  KernelSpec rff = exact;
  rff.kind = KernelKind::RffRbf;
  rff.rff_dim = 2000;
  rff.rff_seed = 42;
  const auto ke = kernel_matrix(exact, x), kr = kernel_matrix(rff, x);
  const double dev = (ke.values - kr.values).cwiseAbs().maxCoeff();
  const double me = eigendecompose(center(ke), 1).values(0), mr = eigendecompose(center(kr), 1).values(0);
  const double rel = std::abs(mr - me) / me;
  return {dev <= 0.15 && rel <= 0.10, fmt("max |K_rff - K_rbf| %.4f (<= 0.15), top eigenvalue relative gap %.4f (<= 0.10)", dev, rel)};
}

Verdict golden_run() {
  if (!fs::exists(golden)) return {false, "golden file missing: " + golden.string()};
  const auto out = scratch("golden_run.json");
  const int rc = shell(cli + golden_args + " --output " + out.string());
  const std::string got = slurp(out), want = slurp(golden);
  if (rc != 0) return {false, "run failed with exit status " + std::to_string(rc)};
  if (got != want) return {false, "report differs from " + golden.filename().string()};
  const auto j = nlohmann::json::parse(got);
  const auto count = j["selection"]["selected"].size();
  return {count == 10, "report matches " + golden.filename().string() + ", " + std::to_string(count) + " features selected"};
}

}  // namespace

int main() {
  configure_threads_from_env();
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria{
      {"basis counts", 1, basis_counts},
      {"empirical FDR control", 120, empirical_fdr},
      {"knockoff second-moment exchangeability", 30, exchangeability},
      {"lasso correctness", 10, lasso_correctness},
      {"eigendecomposition accuracy", 10, eigendecomposition},
      {"reconstruction gap", 60, reconstruction_gap},
      {"p-value calibration", 60, pvalue_calibration},
      {"determinism", 30, determinism},
      {"random Fourier feature fidelity", 10, rff_fidelity},
      {"end-to-end golden run", 10, golden_run},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget) {
      v.pass = false;
      v.detail += fmt(" [over time budget: %.1f s > %.0f s]", secs, c.budget);
    }
    failed += !v.pass;
    std::printf("[%s] %2zu %-40s %6.2fs  %s\n", v.pass ? "PASS" : "FAIL", i + 1, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
