#include "spofe/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spofe/error.hpp"
#include "spofe/rng.hpp"

namespace spofe {

const char* to_string(PValueMethod m) {
  return m == PValueMethod::Percentile ? "percentile" : "lognormal";
}

PValueMethod parse_pvalue_method(const std::string& s) {
  if (s == "percentile") return PValueMethod::Percentile;
  if (s == "lognormal") return PValueMethod::LogNormal;
  throw Error(ErrorKind::Config, "unknown p-value method '" + s + "'");
}

namespace {

bool is_active(const std::vector<bool>& active, Eigen::Index d) {
  return active.empty() || active[static_cast<std::size_t>(d)];
}

void check_mask(const Vector& scores, const std::vector<bool>& active) {
  if (!active.empty() && active.size() != static_cast<std::size_t>(scores.size()))
    throw Error(ErrorKind::Bounds, "active mask does not match score count");
}

}  // namespace

PValueVector pvalues_percentile(const Vector& scores, const std::vector<bool>& active) {
  check_mask(scores, active);
  const auto d = scores.size();
  if (d < 1) throw Error(ErrorKind::InsufficientData, "no scores");
  std::vector<double> sorted;
  for (Eigen::Index i = 0; i < d; ++i)
    if (is_active(active, i)) sorted.push_back(scores(i));
  std::sort(sorted.begin(), sorted.end());

  PValueVector out{Vector::Ones(d), PValueMethod::Percentile};
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!is_active(active, i)) continue;
    const auto at_least = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), scores(i));
    out.p(i) = static_cast<double>(at_least) / static_cast<double>(d);
  }
  return out;
}

PValueVector pvalues_percentile(const WekoScores& s) { return pvalues_percentile(s.s, s.active); }

PValueVector pvalues_lognormal(const Vector& scores, const std::vector<bool>& active) {
  check_mask(scores, active);
  std::vector<double> logs;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (is_active(active, i) && scores(i) > 0.0) logs.push_back(std::log(scores(i)));
  if (logs.size() < 3)
    throw Error(ErrorKind::InsufficientData, "log-normal fit needs at least 3 positive scores");
  const double k = static_cast<double>(logs.size());
  const double mu = std::accumulate(logs.begin(), logs.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : logs) ss += (v - mu) * (v - mu);
  const double sigma = std::sqrt(ss / (k - 1.0));
  if (!(sigma > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "positive scores have zero log-variance");

  PValueVector out{Vector::Ones(scores.size()), PValueMethod::LogNormal};
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!is_active(active, i) || scores(i) <= 0.0) continue;
    const double zscore = (std::log(scores(i)) - mu) / sigma;
    // 1 - Phi(z) without cancellation in the upper tail.
    out.p(i) = 0.5 * std::erfc(zscore / std::sqrt(2.0));
  }
  return out;
}

PValueVector pvalues_lognormal(const WekoScores& s) { return pvalues_lognormal(s.s, s.active); }

PValueVector estimate_pvalues(const WekoScores& s, PValueMethod method) {
  return method == PValueMethod::Percentile ? pvalues_percentile(s) : pvalues_lognormal(s);
}

const char* to_string(SelectionKind k) {
  switch (k) {
    case SelectionKind::Threshold: return "threshold";
    case SelectionKind::BenjaminiHochberg: return "bh";
    case SelectionKind::Fixed: return "fixed";
    case SelectionKind::Varying: return "auto";
  }
  return "?";
}

SelectionStrategy SelectionStrategy::parse(const std::string& s) {
  SelectionStrategy out;
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
  try {
    if (head == "auto") {
      out.kind = SelectionKind::Varying;
      out.value = 0.0;
      return out;
    }
    if (tail.empty()) throw Error(ErrorKind::Config, "selection '" + s + "' needs a parameter");
    std::size_t used = 0;
    out.value = std::stod(tail, &used);
    if (used != tail.size()) throw std::invalid_argument(tail);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Config, "malformed selection '" + s + "'");
  }
  if (head == "threshold") {
    out.kind = SelectionKind::Threshold;
    if (!(out.value > 0.0 && out.value <= 1.0)) throw Error(ErrorKind::Config, "threshold must lie in (0, 1]");
  } else if (head == "bh") {
    out.kind = SelectionKind::BenjaminiHochberg;
    if (!(out.value > 0.0 && out.value < 1.0)) throw Error(ErrorKind::Config, "BH alpha must lie in (0, 1)");
  } else if (head == "fixed") {
    out.kind = SelectionKind::Fixed;
    if (!(out.value >= 1.0) || out.value != std::floor(out.value))
      throw Error(ErrorKind::Config, "fixed selection needs a positive integer");
  } else {
    throw Error(ErrorKind::Config, "unknown selection strategy '" + s + "'");
  }
  return out;
}

std::string SelectionStrategy::str() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind);
  if (kind == SelectionKind::Fixed) os << ':' << static_cast<std::size_t>(value);
  else if (kind != SelectionKind::Varying) os << ':' << value;
  return os.str();
}

std::vector<std::size_t> canonical_order(const PValueVector& p, const Vector& scores) {
  if (p.p.size() != scores.size()) throw Error(ErrorKind::Bounds, "p-values and scores differ in length");
  std::vector<std::size_t> order(static_cast<std::size_t>(p.p.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    if (p.p(ia) != p.p(ib)) return p.p(ia) < p.p(ib);
    if (scores(ia) != scores(ib)) return scores(ia) > scores(ib);
    return a < b;
  });
  return order;
}

namespace {

SelectionResult finish(const PValueVector& p, const Vector& scores, std::vector<std::size_t> selected,
                       SelectionKind kind) {
  SelectionResult out;
  out.strategy = kind;
  out.selected = std::move(selected);
  out.per_feature.resize(static_cast<std::size_t>(p.p.size()));
  for (std::size_t d = 0; d < out.per_feature.size(); ++d) {
    auto& rec = out.per_feature[d];
    rec.index = d;
    rec.score = scores(static_cast<Eigen::Index>(d));
    rec.p = p.p(static_cast<Eigen::Index>(d));
  }
  for (auto d : out.selected) out.per_feature[d].selected = true;
  return out;
}

std::vector<std::size_t> top_r(const std::vector<std::size_t>& order, std::size_t r) {
  return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(r, order.size()))};
}

}  // namespace

SelectionResult select_threshold(const PValueVector& p, const Vector& scores, double threshold) {
  std::vector<std::size_t> sel;
  for (auto d : canonical_order(p, scores))
    if (p.p(static_cast<Eigen::Index>(d)) <= threshold) sel.push_back(d);
  auto out = finish(p, scores, std::move(sel), SelectionKind::Threshold);
  out.threshold_used = threshold;
  return out;
}

SelectionResult select_bh(const PValueVector& p, const Vector& scores, double alpha) {
  const auto order = canonical_order(p, scores);
  const double m = static_cast<double>(order.size());
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= order.size(); ++k)
    if (p.p(static_cast<Eigen::Index>(order[k - 1])) <= static_cast<double>(k) * alpha / m) k_star = k;
  std::vector<std::size_t> sel;
  double cut = 0.0;
  if (k_star > 0) {
    cut = p.p(static_cast<Eigen::Index>(order[k_star - 1]));
    for (auto d : order)
      if (p.p(static_cast<Eigen::Index>(d)) <= cut) sel.push_back(d);
  }
  auto out = finish(p, scores, std::move(sel), SelectionKind::BenjaminiHochberg);
  out.threshold_used = cut;
  return out;
}

SelectionResult select_fixed(const PValueVector& p, const Vector& scores, std::size_t r) {
  if (r < 1 || r > static_cast<std::size_t>(p.p.size()))
    throw Error(ErrorKind::Bounds, "fixed selection size " + std::to_string(r) + " out of range");
  auto out = finish(p, scores, top_r(canonical_order(p, scores), r), SelectionKind::Fixed);
  out.r_used = r;
  return out;
}

Vector ridge_fit(const Matrix& a, const Vector& y, double alpha) {
  if (a.cols() < 1) throw Error(ErrorKind::Bounds, "ridge fit needs at least one column");
  if (a.rows() != y.size()) throw Error(ErrorKind::Bounds, "ridge design and response differ in rows");
  if (alpha < 0.0) throw Error(ErrorKind::Config, "ridge penalty must be non-negative");
  const double n = static_cast<double>(a.rows());
  Matrix lhs = Matrix::Zero(a.cols(), a.cols());
  lhs.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  lhs.triangularView<Eigen::StrictlyUpper>() = lhs.transpose();
  lhs.diagonal().array() += n * alpha;
  const Vector rhs = a.transpose() * y;
  if (alpha > 0.0) {
    Eigen::LLT<Matrix> llt(lhs);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
  qr.setThreshold(1e-12);
  if (!qr.isInvertible()) throw Error(ErrorKind::Numerical, "singular normal equations in ridge fit");
  return qr.solve(rhs);
}

namespace {

Matrix gather_columns(const Matrix& psi, const std::vector<std::size_t>& cols) {
  Matrix out(psi.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = psi.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

SelectionResult select_varying(const PValueVector& p, const Vector& scores, const Matrix& psi,
                               const SignalBundle& bundle, const VaryingOptions& opts) {
  if (opts.candidates.empty()) throw Error(ErrorKind::Config, "varying selection needs candidates");
  if (opts.folds < 2) throw Error(ErrorKind::Config, "varying selection needs at least 2 folds");
  if (psi.rows() != bundle.signals.rows()) throw Error(ErrorKind::Bounds, "features and signals differ in rows");
  const auto d_max = static_cast<std::size_t>(p.p.size());
  const auto n = psi.rows();
  if (static_cast<std::size_t>(n) < opts.folds) throw Error(ErrorKind::InsufficientData, "fewer rows than folds");

  std::vector<std::size_t> cands;
  for (auto r : opts.candidates) {
    if (r < 1) throw Error(ErrorKind::Bounds, "candidate size must be positive");
    cands.push_back(std::min(r, d_max));
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto rng = make_stream(opts.seed, "cv");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> test(opts.folds), train(opts.folds);
  for (std::size_t i = 0; i < order.size(); ++i) test[i % opts.folds].push_back(order[i]);
  for (std::size_t f = 0; f < opts.folds; ++f) {
    std::sort(test[f].begin(), test[f].end());
    for (std::size_t g = 0; g < opts.folds; ++g)
      if (g != f) train[f].insert(train[f].end(), test[g].begin(), test[g].end());
    std::sort(train[f].begin(), train[f].end());
  }

  const auto ranked = canonical_order(p, scores);
  const double weight_total = bundle.lambdas.sum();
  std::vector<CandidateScore> results;
  for (auto r : cands) {
    const Matrix a = gather_columns(psi, top_r(ranked, r));
    double objective = 0.0;
    for (Eigen::Index j = 0; j < bundle.signals.cols(); ++j) {
      double sse = 0.0;
      for (std::size_t f = 0; f < opts.folds; ++f) {
        const Matrix a_train = gather_rows(a, train[f]);
        const Matrix a_test = gather_rows(a, test[f]);
        const Vector z = bundle.signals.col(j);
        const Vector z_train = gather_rows(z, train[f]);
        const Vector z_test = gather_rows(z, test[f]);
        const Vector beta = ridge_fit(a_train, z_train, opts.ridge_alpha);
        sse += (z_test - a_test * beta).squaredNorm();
      }
      objective += bundle.lambdas(j) * sse / static_cast<double>(n);
    }
    results.push_back({r, objective / weight_total});
  }

  // Objectives that agree to rounding count as ties; the smaller r wins.
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const double b = results[best].objective;
    if (results[i].objective < b - 1e-9 * std::max(1.0, std::abs(b)) - 1e-12) best = i;
  }
  auto out = finish(p, scores, top_r(ranked, results[best].r), SelectionKind::Varying);
  out.r_used = results[best].r;
  out.candidates = std::move(results);
  return out;
}

ComponentFit fit_component(const Matrix& psi, const Vector& z, std::vector<std::size_t> support,
                           std::size_t component) {
  if (support.empty()) throw Error(ErrorKind::Bounds, "component fit needs a nonempty support");
  for (auto d : support)
    if (d >= static_cast<std::size_t>(psi.cols())) throw Error(ErrorKind::Bounds, "support index out of range");
  const Matrix a = gather_columns(psi, support);
  ComponentFit out;
  out.component = component;
  // The stabilizer is an absolute diagonal, not scaled by n.
  out.coefficients = ridge_fit(a, z, kComponentRidge / static_cast<double>(a.rows()));
  out.rmse = std::sqrt((z - a * out.coefficients).squaredNorm() / static_cast<double>(z.size()));
  out.support = std::move(support);
  return out;
}

}  // namespace spofe
