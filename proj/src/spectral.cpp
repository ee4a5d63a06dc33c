#include "psilab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "psilab/errors.hpp"

namespace psilab {

SingularValueFunction::SingularValueFunction(std::vector<double> values, std::vector<double> weights) {
  if (values.size() != weights.size())
    throw ConfigurationError("SingularValueFunction: values and weights differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  for (std::size_t i : order) {
    if (!(values[i] >= 0.0)) throw ConfigurationError("SingularValueFunction: negative value");
    if (!(weights[i] > 0.0)) throw ConfigurationError("SingularValueFunction: weights must be positive");
    values_.push_back(values[i]);
    weights_.push_back(weights[i]);
    total_ += weights[i];
    cumulative_.push_back(total_);
  }
}

SingularValueFunction::SingularValueFunction(const RVector& values, double weight_each)
    : SingularValueFunction(std::vector<double>(values.data(), values.data() + values.size()),
                            std::vector<double>(values.size(), weight_each)) {}

double SingularValueFunction::mu(double t) const {
  if (t < 0.0) throw RangeError("mu: t must be nonnegative");
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
  if (it == cumulative_.end()) return 0.0;
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double SingularValueFunction::distribution(double s) const {
  double w = 0.0;
  for (std::size_t i = 0; i < values_.size() && values_[i] > s; ++i) w += weights_[i];
  return w;
}

double SingularValueFunction::integral(double T) const {
  double acc = 0.0, start = 0.0;
  for (std::size_t i = 0; i < values_.size() && start < T; ++i) {
    const double end = std::min(cumulative_[i], T);
    acc += values_[i] * (end - start);
    start = cumulative_[i];
  }
  return acc;
}

SingularValueFunction singular_value_function(const DiscretizedOperator& a) {
  const double w0 = a.trace_weights.empty() ? 1.0 : a.trace_weights.front();
  for (double w : a.trace_weights)
    if (std::abs(w - w0) > 1e-14 * w0)
      throw ConfigurationError("singular_value_function: trace weights must be uniform");
  RVector s;
  try {
    s = singular_values(a.matrix);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (operator side " + std::to_string(a.side()) +
                         ", norm " + std::to_string(a.matrix.norm()) + ")");
  }
  return SingularValueFunction(s, w0);
}

std::pair<double, double> default_window(const SingularValueFunction& svf) {
  return {0.02 * svf.total_weight(), 0.15 * svf.total_weight()};
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

}  // namespace

WeylEstimate weyl_limit(const SingularValueFunction& svf, double m, int d,
                        std::pair<double, double> window) {
  if (!(m > 0.0) || d < 1) throw ConfigurationError("weyl_limit: need m > 0 and d ≥ 1");
  const auto [lo, hi] = window;
  if (!(lo > 0.0) || !(hi > lo) || hi > 0.5 * svf.total_weight() * (1.0 + 1e-12))
    throw RangeError("weyl_limit: window must satisfy 0 < t_lo < t_hi ≤ total_weight/2");
  std::vector<double> g;
  const int count = 200;
  for (int i = 0; i < count; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    g.push_back(std::pow(t, m / d) * svf.mu(t));
  }
  WeylEstimate e;
  e.t_lo = lo;
  e.t_hi = hi;
  e.limit = quantile(g, 0.5);
  e.spread = quantile(g, 0.75) - quantile(g, 0.25);
  return e;
}

double dixmier_log_average(const SingularValueFunction& svf, double Nmax) {
  if (!(Nmax > 1.0) || Nmax > svf.total_weight() * (1.0 + 1e-12))
    throw RangeError("dixmier_log_average: need 1 < N ≤ total_weight");
  return svf.integral(Nmax) / std::log(Nmax);
}

std::vector<cplx> microlocal_counting_curve(const DiscretizedOperator& A, const DiscretizedOperator& Q,
                                            const SymbolFn& phi, const std::vector<double>& lambdas) {
  if (!A.hermitian) throw DomainError("microlocal_counting: A must be Hermitian");
  if (!(A.grid == Q.grid) || !(A.algebra == Q.algebra))
    throw ConfigurationError("microlocal_counting: A and Q live on different grids");
  const double lam_max = lambdas.empty() ? 0.0 : *std::max_element(lambdas.begin(), lambdas.end());
  const HermitianEigen e = eigh(A.matrix, true);
  Eigen::Index count = 0;
  while (count < e.values.size() && e.values(count) <= lam_max) ++count;
  std::vector<cplx> out(lambdas.size(), 0.0);
  if (count == 0) return out;
  const int n = A.algebra.n;
  const CMatrix V = e.vectors.leftCols(count);
  CMatrix B = Q.matrix * V;  // Q v_i
  for (std::size_t j = 0; j < A.grid.size(); ++j) {
    const CMatrix f = phi(A.grid.point(j));
    const CMatrix fb = (f.rows() == 1 && n > 1) ? CMatrix(f(0, 0) * CMatrix::Identity(n, n)) : f;
    B.middleRows(j * n, n) = (fb * B.middleRows(j * n, n)).eval();
  }
  // c_i = Σ_j w_j conj(V_ji) B_ji
  std::vector<cplx> contrib(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    cplx s = 0.0;
    for (Eigen::Index j = 0; j < V.rows(); ++j) s += A.trace_weights[j] * std::conj(V(j, i)) * B(j, i);
    contrib[i] = s;
  }
  for (std::size_t q = 0; q < lambdas.size(); ++q) {
    if (lambdas[q] < 0.0) continue;
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < count; ++i)
      if (e.values(i) >= 0.0 && e.values(i) <= lambdas[q]) s += contrib[i];
    out[q] = s;
  }
  return out;
}

double microlocal_counting(const DiscretizedOperator& A, const DiscretizedOperator& Q,
                           const SymbolFn& phi, double lambda) {
  return microlocal_counting_curve(A, Q, phi, {lambda}).front().real();
}

TauberianReport tauberian_duality_check(const SingularValueFunction& svf, double p,
                                        const std::vector<double>& s_grid) {
  if (!(p > 0.0)) throw ConfigurationError("tauberian_duality_check: p must be positive");
  TauberianReport r;
  for (double s : s_grid) {
    const double n = svf.distribution(s);
    if (n <= 0.0) continue;
    const double lhs = std::pow(s, p) * n;
    const double rhs = n * std::pow(svf.mu(n - 1e-12 * n), p);
    r.s_grid.push_back(s);
    r.distribution_side.push_back(lhs);
    r.quantile_side.push_back(rhs);
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(lhs - rhs) / std::max(lhs, rhs));
  }
  return r;
}

void write_svf_csv(std::ostream& out, const SingularValueFunction& svf, int points) {
  out << "t,mu\n";
  const double total = svf.total_weight();
  if (total <= 0.0) return;
  const double lo = std::min(1e-3 * total, 0.5);
  out << std::setprecision(17);
  for (int i = 0; i < points; ++i) {
    const double t = lo * std::pow(total / lo, static_cast<double>(i) / points);
    out << t << ',' << svf.mu(t) << '\n';
  }
}

}  // namespace psilab
