#include "psilab/families.hpp"

#include <cmath>
#include <random>

#include "psilab/errors.hpp"

namespace psilab {

HomogeneousComponent component_from_jet(cplx degree, JetFormula f,
                                        HomogeneousComponent::EvalFn eval) {
  HomogeneousComponent c;
  c.degree = degree;
  c.eval = std::move(eval);
  c.jet_fn = [f](std::span<const double> x, std::span<const double> xi, int order) {
    return f(JetPoint(x, xi, order));
  };
  return c;
}

HomogeneousComponent zero_component(int d, cplx degree) {
  return component_from_jet(
      degree, [](const JetPoint& p) { return p.constant(0.0); },
      [d](std::span<const double>, std::span<const double>) {
        (void)d;
        return CMatrix(CMatrix::Zero(1, 1));
      });
}

namespace families {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s;
}

// |ξ|^s as a scalar jet.
Jet xi_abs_pow(const JetPoint& p, cplx s) { return pow(p.xi_norm2(), 0.5 * s); }

}  // namespace

ClassicalSymbol from_formulas(int d, int n, cplx order, std::vector<JetFormula> formulas,
                              std::optional<Box> support) {
  std::vector<HomogeneousComponent> comps;
  for (std::size_t j = 0; j < formulas.size(); ++j)
    comps.push_back(component_from_jet(order - static_cast<double>(j), formulas[j]));
  return ClassicalSymbol(d, MatrixAlgebraSpec(n), order, std::move(comps), std::move(support));
}

ClassicalSymbol xi_power(int d, cplx s, const CMatrix& m) {
  if (m.rows() != m.cols()) throw ConfigurationError("xi_power: coefficient must be square");
  const int n = static_cast<int>(m.rows());
  auto c = component_from_jet(
      s, [m, s](const JetPoint& p) { return m * xi_abs_pow(p, s); },
      [m, s](std::span<const double>, std::span<const double> xi) {
        return CMatrix(m * std::pow(norm2(xi), 0.5 * s));
      });
  return ClassicalSymbol(d, MatrixAlgebraSpec(n), s, {c});
}

ClassicalSymbol field_xi_power(const Field& a, cplx s) {
  auto c = component_from_jet(
      s, [a, s](const JetPoint& p) { return a.jet(p) * xi_abs_pow(p, s); },
      [a, s](std::span<const double> x, std::span<const double> xi) {
        return CMatrix(a(x) * std::pow(norm2(xi), 0.5 * s));
      });
  return ClassicalSymbol(a.d(), MatrixAlgebraSpec(a.n()), s, {c}, a.support());
}

ClassicalSymbol bessel(int d, double s, int N) {
  if (N < 1) throw ConfigurationError("bessel: N must be at least 1");
  std::vector<HomogeneousComponent> comps;
  double binom = 1.0;  // C(s/2, k)
  for (int j = 0; j < N; ++j) {
    const double deg = s - j;
    if (j % 2 == 1) {
      comps.push_back(zero_component(d, deg));
      continue;
    }
    const int k = j / 2;
    if (k > 0) binom *= (0.5 * s - (k - 1)) / k;
    const double c = binom;
    comps.push_back(component_from_jet(
        deg, [c, deg](const JetPoint& p) { return c * xi_abs_pow(p, deg); },
        [c, deg](std::span<const double>, std::span<const double> xi) {
          return CMatrix(CMatrix::Constant(1, 1, c * std::pow(norm2(xi), 0.5 * deg)));
        }));
  }
  return ClassicalSymbol(d, MatrixAlgebraSpec(1), s, std::move(comps));
}

ClassicalSymbol multiplication(const Field& f) {
  auto c = component_from_jet(
      0.0, [f](const JetPoint& p) { return f.jet(p); },
      [f](std::span<const double> x, std::span<const double>) { return f(x); });
  return ClassicalSymbol(f.d(), MatrixAlgebraSpec(f.n()), 0.0, {c}, f.support());
}

ClassicalSymbol riesz(int d, int j) {
  if (j < 0 || j >= d) throw ConfigurationError("riesz: axis out of range");
  auto c = component_from_jet(
      0.0, [j](const JetPoint& p) { return p.xi[j] * xi_abs_pow(p, -1.0); },
      [j](std::span<const double>, std::span<const double> xi) {
        return CMatrix(CMatrix::Constant(1, 1, xi[j] / std::sqrt(norm2(xi))));
      });
  return ClassicalSymbol(d, MatrixAlgebraSpec(1), 0.0, {c});
}

ClassicalSymbol angular_linear(int d, const CMatrix& c0, const std::vector<CMatrix>& cj) {
  if (static_cast<int>(cj.size()) != d) throw ConfigurationError("angular_linear: need d matrices");
  auto c = component_from_jet(
      0.0,
      [c0, cj](const JetPoint& p) {
        const Jet inv = xi_abs_pow(p, -1.0);
        Jet s = p.constant(c0);
        for (std::size_t k = 0; k < cj.size(); ++k) s += cj[k] * (p.xi[k] * inv);
        return s;
      },
      [c0, cj](std::span<const double>, std::span<const double> xi) {
        const double r = std::sqrt(norm2(xi));
        CMatrix s = c0;
        for (std::size_t k = 0; k < cj.size(); ++k) s += cj[k] * (xi[k] / r);
        return s;
      });
  return ClassicalSymbol(d, MatrixAlgebraSpec(static_cast<int>(c0.rows())), 0.0, {c});
}

ClassicalSymbol random_elliptic_2x2(int d, double m, unsigned seed, int N) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto gauss = [&](bool hermitian) {
    CMatrix a(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) a(i, k) = cplx(g(rng), g(rng));
    if (hermitian) a = 0.5 * (a + a.adjoint()).eval();
    return a;
  };
  CMatrix P = gauss(false);
  P = (P * P.adjoint()).eval();
  P += CMatrix::Identity(2, 2);
  P /= P.trace().real() / 2.0;  // mean eigenvalue 1, smallest ≥ some fraction
  const double floor = eigvalsh(P)(0);
  CMatrix Q = gauss(true), R = gauss(true);
  Q *= 0.25 * floor / op_norm(Q);
  R *= 0.25 * floor / op_norm(R);
  const CMatrix S = gauss(false) * 0.3, T = gauss(false) * 0.2;
  std::vector<JetFormula> f;
  f.push_back([P, Q, R, m](const JetPoint& p) {
    const Jet gx = cos(p.x[0] * 0.7 + p.constant(0.3));
    const Jet r = xi_abs_pow(p, m);
    Jet s = P * r;
    s += Q * (gx * r);
    s += R * (p.xi[0] * xi_abs_pow(p, m - 1.0));
    return s;
  });
  f.push_back([S, m](const JetPoint& p) { return S * (sin(p.x[0]) * xi_abs_pow(p, m - 1.0)); });
  for (int j = 2; j < N; ++j) {
    f.push_back([T, m, j](const JetPoint& p) {
      Jet e = exp(p.x[0] * (-0.2 * j));
      if (p.d() > 1) e = e * cos(p.x[1]);
      return T * (e * xi_abs_pow(p, m - j));
    });
  }
  return from_formulas(d, 2, m, std::move(f));
}

}  // namespace families

}  // namespace psilab
