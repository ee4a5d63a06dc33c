#include "psilab/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "psilab/errors.hpp"
#include "psilab/parallel.hpp"
#include "psilab/powers.hpp"
#include "psilab/quadrature.hpp"

namespace psilab {

double trace_abs_power(const CMatrix& x, double p) {
  Eigen::JacobiSVD<CMatrix> svd(x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double v = svd.singularValues()(i);
    if (v > 0.0) s += std::pow(v, p);
  }
  return s;
}

namespace {

CMatrix full(const CMatrix& v, int n) {
  if (v.rows() == 1 && n > 1) return v(0, 0) * CMatrix::Identity(n, n);
  return v;
}

Rule sphere_level(int d, int points, int level) {
  if (d == 3) return sphere_rule(3, level == 0 ? 50 : 86);
  return sphere_rule(d, level == 0 ? points : 2 * points);
}

// Runs the double integral ∫_S ∫_box h(x, s) at two refinement levels.
template <class H>
Prediction two_level(int d, const Box& box, const PredictorQuadrature& q, H h,
                     const std::function<double(double)>& finish) {
  double val[2];
  for (int level = 0; level < 2; ++level) {
    const Rule space = box_rule(box, level == 0 ? q.space_per_axis : 2 * q.space_per_axis - 1);
    const Rule sphere = sphere_level(d, q.sphere_points, level);
    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t k = 0; k < sphere.size(); ++k)
        acc += space.weights[i] * sphere.weights[k] * h(space.nodes[i], sphere.nodes[k]);
    val[level] = finish(acc);
  }
  Prediction p;
  p.value = val[1];
  const double scale = std::max(std::abs(val[0]), std::abs(val[1]));
  p.refinement_gap = scale > 0.0 ? std::abs(val[1] - val[0]) / scale : 0.0;
  p.precision_warning = p.refinement_gap > 0.01;
  return p;
}

const Box& support_of(const Field& f, const char* who) {
  if (!f.support()) throw ConfigurationError(std::string(who) + ": function must be compactly supported");
  return *f.support();
}

// ∂_k f(x) for k = 0..d−1 from a first-order jet.
std::vector<CMatrix> gradient(const Field& f, std::span<const double> x) {
  const int d = f.d();
  std::vector<double> zero(d, 0.0);
  const Jet j = f.jet(JetPoint(x, zero, 1));
  std::vector<CMatrix> g;
  for (int k = 0; k < d; ++k) {
    MultiIndex e(2 * d, 0);
    e[k] = 1;
    g.push_back(full(j.partial(e), f.n()));
  }
  return g;
}

}  // namespace

Prediction expected_weyl(const ClassicalSymbol& sigma, const Field& f, double m, int d,
                         const PredictorQuadrature& q) {
  if (!(m > 0.0)) throw DomainError("expected_weyl: m must be positive");
  if (sigma.d() != d || f.d() != d) throw ConfigurationError("expected_weyl: dimension mismatch");
  const int n = sigma.n();
  const Box& box = support_of(f, "expected_weyl");
  const double p = d / m;
  return two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const CMatrix fx = full(f(x), n);
        if (fx.cwiseAbs().maxCoeff() == 0.0) return 0.0;
        return trace_abs_power(full(sigma.principal().value(x, s), n) * fx, p);
      },
      [&](double integral) {
        return std::pow(d, -m / d) * std::pow(2.0 * kPi, -m) * std::pow(integral, m / d);
      });
}

Prediction expected_weyl_elliptic(const ClassicalSymbol& sigma_A, const Field& g, const CMatrix& proj,
                                  const PredictorQuadrature& q) {
  const double m = sigma_A.real_order();
  const int d = sigma_A.d();
  if (!(m > 0.0)) throw DomainError("expected_weyl_elliptic: order must be positive");
  const int n = sigma_A.n();
  const Box& box = support_of(g, "expected_weyl_elliptic");
  return two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const double gx = g(x)(0, 0).real();
        if (gx == 0.0) return 0.0;
        const CMatrix a = full(sigma_A.principal().value(x, s), n);
        const CMatrix h = a.adjoint() * a;
        const CMatrix mod = matrix_power(0.5 * (h + h.adjoint()), -0.5 * d / m);
        return std::pow(gx, 2.0 * d / m) * (mod * proj).trace().real();
      },
      [&](double integral) {
        return std::pow(d, -m / d) * std::pow(2.0 * kPi, -m) * std::pow(integral, m / d);
      });
}

Prediction dixmier_value(const ClassicalSymbol& sigma, const Box& box, const PredictorQuadrature& q) {
  const int d = sigma.d();
  if (std::abs(sigma.order() + static_cast<double>(d)) > 1e-12)
    throw DomainError("dixmier_value: symbol order must be −d");
  const int n = sigma.n();
  return two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        return full(sigma.principal().value(x, s), n).trace().real();
      },
      [&](double integral) { return integral / (d * std::pow(2.0 * kPi, d)); });
}

SphereFunction SphereFunction::riesz(int d, int j) {
  if (j < 0 || j >= d) throw ConfigurationError("SphereFunction::riesz: axis out of range");
  SphereFunction f;
  f.value = [j](std::span<const double> s) { return s[j]; };
  f.gradient = [d, j](std::span<const double> s) {
    std::vector<double> g(d);
    for (int k = 0; k < d; ++k) g[k] = (k == j ? 1.0 : 0.0) - s[j] * s[k];
    return g;
  };
  return f;
}

SphereFunction SphereFunction::from_values(std::function<double(std::span<const double>)> v) {
  SphereFunction f;
  f.value = v;
  f.gradient = [v](std::span<const double> s) {
    const int d = static_cast<int>(s.size());
    std::vector<double> g(d);
    const double h = 1e-5;
    auto ext = [&](std::vector<double> y) {
      double r = 0.0;
      for (double a : y) r += a * a;
      r = std::sqrt(r);
      for (double& a : y) a /= r;
      return v(y);
    };
    for (int k = 0; k < d; ++k) {
      std::vector<double> p(s.begin(), s.end()), m(s.begin(), s.end());
      p[k] += h;
      m[k] -= h;
      g[k] = (ext(p) - ext(m)) / (2.0 * h);
    }
    return g;
  };
  return f;
}

Discretization parse_discretization(const std::string& name) {
  if (name == "collocation") return Discretization::collocation;
  if (name == "galerkin") return Discretization::galerkin;
  throw ConfigurationError("unknown discretization '" + name + "' (collocation, galerkin)");
}

namespace {

// [T, M_f] for a scalar multiplier symbol t(ξ) acting on every internal index.
DiscretizedOperator scalar_commutator(const std::function<double(std::span<const double>)>& t, double order,
                                      const Field& f, const GridSpec& grid, Discretization mode) {
  check_support(f.support(), grid);
  const int n = f.n();
  const SymbolFn fn = [f](std::span<const double> x) { return f(x); };
  if (mode == Discretization::collocation) {
    const SymbolFn symbol = [t, n](std::span<const double> xi) { return CMatrix(t(xi) * CMatrix::Identity(n, n)); };
    const DiscretizedOperator T = fourier_multiplier(symbol, n, grid, order);
    const DiscretizedOperator M = multiplication_op(fn, n, grid);
    return commutator(T, M);
  }
  CMatrix c = galerkin_multiplication_frequency(fn, n, grid);
  const std::size_t P = grid.size();
  std::vector<double> tk(P);
  for (std::size_t k = 0; k < P; ++k) tk[k] = t(grid.frequency(k));
  for (std::size_t k = 0; k < P; ++k)
    for (std::size_t l = 0; l < P; ++l) c.block(k * n, l * n, n, n) *= (tk[k] - tk[l]);
  DiscretizedOperator op(grid, MatrixAlgebraSpec(n), from_frequency_basis(grid, n, c), order - 1.0);
  return op;
}

}  // namespace

DiscretizedOperator cz_commutator_build(const SphereFunction& phi, const Field& f, const GridSpec& grid,
                                        Discretization mode) {
  if (grid.d < 2) throw DomainError("cz_commutator_build: requires d ≥ 2");
  auto symbol = [phi](std::span<const double> xi) {
    double r = 0.0;
    for (double a : xi) r += a * a;
    if (r == 0.0) return 0.0;
    r = std::sqrt(r);
    std::vector<double> s(xi.begin(), xi.end());
    for (double& a : s) a /= r;
    return phi.value(s);
  };
  return scalar_commutator(symbol, 0.0, f, grid, mode);
}

Prediction expected_weyl_cz(const SphereFunction& phi, const Field& f, int d, const PredictorQuadrature& q) {
  if (d < 2) throw DomainError("expected_weyl_cz: requires d ≥ 2");
  const Box& box = support_of(f, "expected_weyl_cz");
  const int n = f.n();
  const cplx minus_i(0.0, -1.0);
  return two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const std::vector<double> gphi = phi.gradient(s);
        const std::vector<CMatrix> gf = gradient(f, x);
        CMatrix acc = CMatrix::Zero(n, n);
        for (int k = 0; k < d; ++k) acc += gphi[k] * minus_i * gf[k];
        return trace_abs_power(acc, d);
      },
      [&](double integral) {
        return std::pow(2.0 * kPi, -1.0) * std::pow(d, -1.0 / d) * std::pow(integral, 1.0 / d);
      });
}

void check_fractional_range(double alpha, int d) {
  const bool ok = (d >= 2 && ((alpha > -0.5 * d && alpha < 0.0) || (alpha > 0.0 && alpha < 1.0))) ||
                  (d == 1 && alpha > 0.0 && alpha < 1.0);
  if (!ok) {
    throw DomainError("fractional commutator: α = " + std::to_string(alpha) + " with d = " +
                      std::to_string(d) +
                      " violates the hypothesis (d ≥ 2 and α ∈ (−d/2, 0) ∪ (0, 1), or d = 1 and α ∈ (0, 1))");
  }
}

Prediction expected_weyl_frac(double alpha, const Field& f, int d, const PredictorQuadrature& q) {
  check_fractional_range(alpha, d);
  const Box& box = support_of(f, "expected_weyl_frac");
  const int n = f.n();
  const double p = d / (1.0 - alpha);
  const double C = std::abs(alpha) * std::pow(d, (alpha - 1.0) / d) * std::pow(2.0 * kPi, alpha - 1.0);
  return two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const std::vector<CMatrix> gf = gradient(f, x);
        CMatrix acc = CMatrix::Zero(n, n);
        for (int k = 0; k < d; ++k) acc += s[k] * gf[k];
        return trace_abs_power(acc, p);
      },
      [&](double integral) { return C * std::pow(integral, (1.0 - alpha) / d); });
}

DiscretizedOperator frac_commutator_build(double alpha, const Field& f, const GridSpec& grid,
                                          Discretization mode) {
  check_fractional_range(alpha, grid.d);
  const SymbolFn base = multipliers::riesz_potential(alpha);
  return scalar_commutator([base](std::span<const double> xi) { return base(xi)(0, 0).real(); }, alpha, f,
                           grid, mode);
}

CouplingLaw parse_coupling_law(const std::string& name) {
  if (name == "rademacher") return CouplingLaw::rademacher;
  if (name == "uniform") return CouplingLaw::uniform;
  if (name == "deterministic") return CouplingLaw::deterministic;
  throw ConfigurationError("unknown coupling law '" + name + "' (rademacher, uniform, deterministic)");
}

RandomModel::RandomModel(Field v0, CouplingLaw l, int samples, std::uint64_t s)
    : base_profile(std::move(v0)), law(l), sample_count(samples), seed(s) {
  if (samples < 1) throw ConfigurationError("RandomModel: sample count must be at least 1");
  if (base_profile.n() != 1) throw ConfigurationError("RandomModel: base profile must be scalar");
}

int lattice_side(const GridSpec& grid) {
  const long side = std::lround(grid.L);
  if (std::abs(grid.L - side) > 1e-12 || side < 1)
    throw ConfigurationError("random model: torus side L must be a positive integer");
  if (grid.Npts % side != 0)
    throw ConfigurationError("random model: Npts must be a multiple of L for exact lattice shifts");
  return static_cast<int>(side);
}

namespace {

std::size_t site_count(int side, int d) {
  std::size_t c = 1;
  for (int a = 0; a < d; ++a) c *= side;
  return c;
}

std::vector<int> site_label(std::size_t idx, int side, int d) {
  std::vector<int> n(d);
  for (int a = d - 1; a >= 0; --a) {
    n[a] = static_cast<int>(idx % side);
    idx /= side;
  }
  return n;
}

std::size_t site_index(const std::vector<int>& n, int side) {
  std::size_t idx = 0;
  for (int v : n) idx = idx * side + static_cast<std::size_t>(((v % side) + side) % side);
  return idx;
}

}  // namespace

std::vector<double> RandomModel::couplings(const GridSpec& grid, std::size_t sample) const {
  const int side = lattice_side(grid);
  const std::size_t count = site_count(side, grid.d);
  std::vector<double> eps(count, 0.0);
  if (law == CouplingLaw::deterministic) return eps;
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample & 0xffffffffu),
                    static_cast<std::uint32_t>(sample >> 32)};
  std::mt19937_64 rng(seq);
  for (double& e : eps) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    e = law == CouplingLaw::rademacher ? (u < 0.5 ? -1.0 : 1.0) : 2.0 * u - 1.0;
  }
  return eps;
}

RVector RandomModel::potential(const GridSpec& grid, const std::vector<double>& eps) const {
  const int side = lattice_side(grid);
  const int d = grid.d;
  if (eps.size() != site_count(side, d)) throw ConfigurationError("RandomModel: coupling count mismatch");
  RVector v = RVector::Zero(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::vector<double> x = grid.point(j);
    double acc = 0.0;
    for (std::size_t s = 0; s < eps.size(); ++s) {
      if (eps[s] == 0.0) continue;
      const std::vector<int> n = site_label(s, side, d);
      std::vector<double> y(d);
      for (int a = 0; a < d; ++a) {
        // x + n wrapped into [−L/2, L/2)
        double t = x[a] + n[a] + 0.5 * grid.L;
        t -= grid.L * std::floor(t / grid.L);
        y[a] = t - 0.5 * grid.L;
      }
      acc += base_profile(y)(0, 0).real() * eps[s];
    }
    v(j) = acc;
  }
  return v;
}

std::vector<double> RandomModel::shift(const GridSpec& grid, const std::vector<double>& eps,
                                       const std::vector<int>& k) {
  const int side = lattice_side(grid);
  const int d = grid.d;
  std::vector<double> out(eps.size());
  for (std::size_t s = 0; s < eps.size(); ++s) {
    std::vector<int> n = site_label(s, side, d);
    for (int a = 0; a < d; ++a) n[a] -= k[a];
    out[s] = eps[site_index(n, side)];
  }
  return out;
}

DosResult dos_estimate(const RandomModel& model, const OperatorBuilder& build,
                       const std::vector<double>& lambdas, const GridSpec& grid) {
  if (model.sample_count < 1) throw ConfigurationError("dos_estimate: sample count must be at least 1");
  const std::size_t S = static_cast<std::size_t>(model.sample_count);
  const double volume = std::pow(grid.L, grid.d);
  std::vector<std::vector<double>> counts(S);
  std::vector<std::string> failure(S);
  parallel_for(S, [&](std::size_t s) {
    try {
      const RVector v = model.potential(grid, model.couplings(grid, s));
      DiscretizedOperator op = build(v);
      const RVector ev = eigvalsh(op.matrix);
      std::vector<double> c;
      for (double lam : lambdas) {
        double w = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
          if (ev(i) >= 0.0 && ev(i) <= lam) w += op.trace_weights[i];
        c.push_back(w / volume);
      }
      counts[s] = std::move(c);
    } catch (const std::exception& e) {
      failure[s] = e.what();
    }
  });
  DosResult r;
  for (std::size_t s = 0; s < S; ++s)
    if (!failure[s].empty()) r.skipped.push_back("sample " + std::to_string(s) + ": " + failure[s]);
  if (r.skipped.size() * 10 > S)
    throw NumericalError("dos_estimate: " + std::to_string(r.skipped.size()) + " of " +
                         std::to_string(S) + " samples failed; first: " + r.skipped.front());
  r.used_samples = static_cast<int>(S - r.skipped.size());
  for (std::size_t q = 0; q < lambdas.size(); ++q) {
    double mean = 0.0;
    for (std::size_t s = 0; s < S; ++s)
      if (failure[s].empty()) mean += counts[s][q];
    mean /= r.used_samples;
    double var = 0.0;
    for (std::size_t s = 0; s < S; ++s)
      if (failure[s].empty()) var += (counts[s][q] - mean) * (counts[s][q] - mean);
    const double se = r.used_samples > 1 ? std::sqrt(var / (r.used_samples - 1) / r.used_samples) : 0.0;
    r.points.push_back({lambdas[q], mean, se});
  }
  return r;
}

double dos_constant(int d) { return 1.0 / (d * std::pow(2.0 * kPi, d)); }

double dos_prediction(const ClassicalSymbol& sigma, double lambda, const PredictorQuadrature& q) {
  const double m = sigma.real_order();
  const int d = sigma.d();
  if (!(m > 0.0)) throw DomainError("dos_prediction: order must be positive");
  if (lambda <= 0.0) return 0.0;
  const int n = sigma.n();
  Box unit{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  const Prediction p = two_level(
      d, unit, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const CMatrix a = full(sigma.principal().value(x, s), n);
        return matrix_power(0.5 * (a + a.adjoint()), -d / m).trace().real();
      },
      [](double integral) { return integral; });
  return std::pow(lambda, d / m) * dos_constant(d) * p.value;
}

double microlocal_prediction(const ClassicalSymbol& sigma_A, const ClassicalSymbol& Q, const Field& phi,
                             double lambda, const PredictorQuadrature& q) {
  const double m = sigma_A.real_order();
  const int d = sigma_A.d();
  if (!(m > 0.0)) throw DomainError("microlocal_prediction: order must be positive");
  if (lambda <= 0.0) return 0.0;
  const int n = sigma_A.n();
  const Box& box = support_of(phi, "microlocal_prediction");
  const Prediction p = two_level(
      d, box, q,
      [&](const std::vector<double>& x, const std::vector<double>& s) {
        const CMatrix f = full(phi(x), n);
        if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
        const CMatrix a = full(sigma_A.principal().value(x, s), n);
        const CMatrix qa = full(Q.principal().value(x, s), n);
        return (f * qa * matrix_power(0.5 * (a + a.adjoint()), -d / m)).trace().real();
      },
      [](double integral) { return integral; });
  return std::pow(lambda, d / m) * dos_constant(d) * p.value;
}

}  // namespace psilab
