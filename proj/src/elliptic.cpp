#include "psilab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "psilab/errors.hpp"

namespace psilab {

KeyholeSpec::KeyholeSpec(double r) : arc_radius(r) {
  if (!(r > 0.0)) throw ConfigurationError("KeyholeSpec: arc radius must be positive");
}

bool KeyholeSpec::contains(cplx lambda) const {
  if (std::abs(lambda) < arc_radius) return true;
  if (lambda == cplx(0.0)) return true;
  // |arg λ − π| measured on the circle
  const double a = std::abs(std::arg(-lambda));
  return a < half_aperture;
}

std::vector<std::vector<double>> space_samples(int d, const std::optional<Box>& support, int count) {
  const Box box = support ? *support : Box::cube(d, 1.0);
  const int per = std::max(1, static_cast<int>(std::ceil(std::pow(count, 1.0 / d) - 1e-9)));
  std::vector<std::vector<double>> out;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> x(d);
    for (int a = 0; a < d; ++a)
      x[a] = box.lo[a] + (idx[a] + 0.5) * (box.hi[a] - box.lo[a]) / per;
    out.push_back(std::move(x));
    int a = d - 1;
    while (a >= 0 && ++idx[a] == per) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

std::vector<std::vector<double>> sphere_samples(int d, int count) {
  std::vector<std::vector<double>> out;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double t = 2.0 * kPi * k / count;
      out.push_back({std::cos(t), std::sin(t)});
    }
    return out;
  }
  if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      out.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
    }
    return out;
  }
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  for (int k = 0; k < count; ++k) {
    std::vector<double> u(d);
    double s = 0.0;
    for (double& v : u) {
      v = g(rng);
      s += v * v;
    }
    for (double& v : u) v /= std::sqrt(s);
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

CMatrix principal_value(const ClassicalSymbol& sigma, std::span<const double> x,
                        std::span<const double> u) {
  CMatrix v = sigma.principal().value(x, u);
  if (v.rows() == 1 && sigma.n() > 1) v = v(0, 0) * CMatrix::Identity(sigma.n(), sigma.n());
  return v;
}

}  // namespace

EllipticityReport check_ellipticity(const ClassicalSymbol& sigma, int sphere_count, int space_count) {
  EllipticityReport r;
  r.is_elliptic = true;
  r.modulus_bound_C2 = std::numeric_limits<double>::infinity();
  for (const auto& x : space_samples(sigma.d(), sigma.spatial_support(), space_count)) {
    for (const auto& u : sphere_samples(sigma.d(), sphere_count)) {
      const CMatrix v = principal_value(sigma, x, u);
      Eigen::JacobiSVD<CMatrix> svd(v);
      const auto& s = svd.singularValues();
      const double smax = s(0), smin = s(s.size() - 1);
      ++r.samples;
      if (!(smin > 1e-13 * std::max(1.0, smax))) {
        r.is_elliptic = false;
        r.constant_C = std::numeric_limits<double>::infinity();
        r.modulus_bound_C2 = 0.0;
        r.offending_x = x;
        r.offending_u = u;
        return r;
      }
      r.constant_C = std::max(r.constant_C, 1.0 / smin);
      r.modulus_bound_C2 = std::min(r.modulus_bound_C2, smin);
    }
  }
  return r;
}

SpectralBounds principal_spectral_bounds(const ClassicalSymbol& sigma, int sphere_count,
                                         int space_count) {
  SpectralBounds b;
  b.floor = std::numeric_limits<double>::infinity();
  for (const auto& x : space_samples(sigma.d(), sigma.spatial_support(), space_count)) {
    for (const auto& u : sphere_samples(sigma.d(), sphere_count)) {
      Eigen::ComplexEigenSolver<CMatrix> es(principal_value(sigma, x, u), false);
      for (const cplx& e : es.eigenvalues()) {
        b.floor = std::min(b.floor, e.real());
        b.ceiling = std::max(b.ceiling, std::abs(e));
        b.max_arg = std::max(b.max_arg, std::abs(std::arg(e)));
      }
    }
  }
  b.positive = b.floor > 0.0 && b.max_arg < kPi / 4;
  return b;
}

double default_shift(const SpectralBounds& b) { return 0.5 * std::max(b.floor, 0.0); }

ClassicalSymbol shifted(const ClassicalSymbol& sigma, double rho) {
  const int n = sigma.n(), d = sigma.d();
  HomogeneousComponent c;
  c.degree = 0.0;
  c.jet_fn = [n, d, rho](std::span<const double>, std::span<const double>, int order) {
    return Jet::constant(2 * d, order, rho * CMatrix::Identity(n, n));
  };
  ClassicalSymbol constant(d, sigma.algebra(), 0.0, {c});
  return add_symbols(sigma, constant);
}

std::vector<Jet> resolvent_jets(const ClassicalSymbol& sigma, std::span<const double> x,
                                std::span<const double> xi, cplx lambda, int jmax, int J) {
  const int d = sigma.d(), n = sigma.n();
  std::vector<Jet> a;
  for (int l = 0; l <= jmax && l < sigma.truncation(); ++l)
    a.push_back(sigma.component(l).jet(x, xi, J + jmax - l));
  Jet a0 = a[0];
  if (a0.dim() == 1 && n > 1) a0 = a0.broadcast(n);
  a0 -= Jet::constant(2 * d, a0.order(), lambda * CMatrix::Identity(n, n));
  {
    const CMatrix v = a0.value();
    Eigen::JacobiSVD<CMatrix> svd(v);
    const auto& s = svd.singularValues();
    if (!(s(s.size() - 1) > 1e-14 * std::max(1.0, s(0)))) {
      std::ostringstream msg;
      msg << "resolvent: λ = " << lambda << " lies in the spectrum of σ_m at x = (";
      for (double v0 : x) msg << v0 << ' ';
      msg << "), ξ = (";
      for (double v0 : xi) msg << v0 << ' ';
      msg << ')';
      throw SingularResolventError(msg.str());
    }
  }
  std::vector<Jet> b;
  b.push_back(a0.inverse());
  for (int j = 1; j <= jmax; ++j) {
    const int oj = J + jmax - j;
    Jet sum;
    for (int k = 0; k < j; ++k)
      for (int l = 0; k + l <= j && l < static_cast<int>(a.size()); ++l)
        for (const MultiIndex& alpha : indices_of_degree(d, j - k - l)) {
          const Jet lhs = xi_derivative(b[k], d, alpha).truncated(oj);
          const Jet rhs = x_dderivative(a[l], d, alpha).truncated(oj);
          sum += (1.0 / factorial(alpha)) * (lhs * rhs);
        }
    if (sum.empty()) sum = Jet(2 * d, oj, n);
    b.push_back(-1.0 * (sum * b[0].truncated(oj)));
  }
  return b;
}

ClassicalSymbol parametrix(const ClassicalSymbol& sigma, int N, int sphere, int space) {
  if (N < 1) throw ConfigurationError("parametrix: N must be at least 1");
  const EllipticityReport rep = check_ellipticity(sigma, sphere, space);
  if (!rep.is_elliptic) throw EllipticityError("parametrix: symbol is not elliptic", rep);
  auto s = std::make_shared<ClassicalSymbol>(sigma);
  const int n = sigma.n();
  std::vector<HomogeneousComponent> comps;
  for (int j = 0; j < N; ++j) {
    HomogeneousComponent c;
    c.degree = -sigma.order() - static_cast<double>(j);
    c.jet_order = sigma.min_jet_order() - j;
    c.jet_fn = [s, j](std::span<const double> x, std::span<const double> xi, int order) {
      return resolvent_jets(*s, x, xi, 0.0, j, order)[j].truncated(order);
    };
    if (j == 0) {
      c.eval = [s, n](std::span<const double> x, std::span<const double> xi) {
        CMatrix v = s->principal().value(x, xi);
        if (v.rows() == 1 && n > 1) v = v(0, 0) * CMatrix::Identity(n, n);
        return CMatrix(v.inverse());
      };
    }
    comps.push_back(std::move(c));
  }
  return ClassicalSymbol(sigma.d(), sigma.algebra(), -sigma.order(), std::move(comps),
                         sigma.spatial_support());
}

std::vector<ResolventTerm> resolvent_symbols(const ClassicalSymbol& sigma, cplx lambda, int N) {
  if (N < 1) throw ConfigurationError("resolvent_symbols: N must be at least 1");
  const double m = sigma.real_order();
  const SpectralBounds b = principal_spectral_bounds(sigma, 64, 64);
  if (!b.positive) throw DomainError("resolvent_symbols: principal symbol is not positive");
  auto s = std::make_shared<ClassicalSymbol>(sigma);
  std::vector<ResolventTerm> out;
  for (int j = 0; j < N; ++j) {
    out.push_back({-m - j, [s, lambda, j](std::span<const double> x, std::span<const double> xi) {
                     return resolvent_jets(*s, x, xi, lambda, j, 0)[j].value();
                   }});
  }
  return out;
}

}  // namespace psilab
