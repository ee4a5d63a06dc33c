#include "psilab/powers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Eigenvalues>

#include "psilab/elliptic.hpp"
#include "psilab/errors.hpp"
#include "psilab/quadrature.hpp"

namespace psilab {

namespace {

CMatrix full(const CMatrix& v, int n) {
  if (v.rows() == 1 && n > 1) return v(0, 0) * CMatrix::Identity(n, n);
  return v;
}

// Eigenvalue range of the principal part at one point.
void point_spectrum(const CMatrix& a, double& floor, double& ceiling) {
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  floor = std::numeric_limits<double>::infinity();
  ceiling = 0.0;
  for (const cplx& e : es.eigenvalues()) {
    floor = std::min(floor, e.real());
    ceiling = std::max(ceiling, std::abs(e));
  }
}

// Λ multiple for the jet integrals, where no closed-form tail is added.
constexpr double kJetLambdaFactor = 1e8;

}  // namespace

CMatrix matrix_power(const CMatrix& P, cplx z) {
  if (P.rows() != P.cols()) throw DomainError("matrix_power: matrix is not square");
  const double norm = P.cwiseAbs().maxCoeff();
  if ((P - P.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(norm, 1e-300))
    throw DomainError("matrix_power: matrix is not Hermitian");
  const HermitianEigen e = eigh(P);
  const double top = std::abs(e.values(e.values.size() - 1));
  if (!(e.values(0) > 0.0) || e.values(0) < 1e-12 * top)
    throw DomainError("matrix_power: matrix is not positive definite");
  CVector f(e.values.size());
  for (int i = 0; i < e.values.size(); ++i) f(i) = std::exp(z * std::log(e.values(i)));
  return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

ContourRule keyhole_rule(cplx z, double r, double Lambda, int nodes) {
  if (!(r > 0.0) || !(Lambda > r)) throw ConfigurationError("keyhole_rule: need 0 < r < Λ");
  if (nodes < 64) throw ConfigurationError("keyhole_rule: nodes must be at least 64");
  ContourRule rule;
  rule.r = r;
  rule.Lambda = Lambda;
  const double span = std::log(Lambda / r);
  const int panels = std::max(1, static_cast<int>(std::ceil(span)));
  const int per_panel = std::max(8, nodes / panels);
  // Rays: the two sides combine to −(sin πz/π) ∫_r^Λ ρ^z g(−ρ) dρ.
  const cplx ray_factor = -std::sin(kPi * z) / kPi;
  const Rule1D s = composite_gauss_legendre(panels, per_panel, std::log(r), std::log(Lambda));
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double rho = std::exp(s.x[i]);
    rule.lambda.push_back(-rho);
    rule.weight.push_back(ray_factor * std::exp(z * s.x[i]) * rho * s.w[i]);
  }
  // Circle: (1/2π) ∫_{−π}^{π} r^{z+1} e^{i(z+1)θ} g(r e^{iθ}) dθ.
  const Rule1D th = composite_gauss_legendre(4, per_panel, -kPi, kPi);
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < th.x.size(); ++i) {
    rule.lambda.push_back(r * std::exp(I * th.x[i]));
    rule.weight.push_back(std::exp((z + 1.0) * (std::log(r) + I * th.x[i])) * th.w[i] /
                          (2.0 * kPi));
  }
  return rule;
}

CMatrix contour_power(const CMatrix& P, cplx z, int nodes) {
  if (!(z.real() < 0.0)) throw DomainError("contour_power: requires Re z < 0");
  const int n = static_cast<int>(P.rows());
  const RVector ev = eigvalsh(P);
  if (!(ev(0) > 0.0)) throw DomainError("contour_power: matrix is not positive definite");
  const double ceiling = ev(n - 1);
  const double Lambda = 1e6 * ceiling;
  const ContourRule rule = keyhole_rule(z, 0.5 * ev(0), Lambda, nodes);
  CMatrix acc = CMatrix::Zero(n, n);
  const CMatrix I = CMatrix::Identity(n, n);
  for (std::size_t i = 0; i < rule.lambda.size(); ++i) {
    Eigen::PartialPivLU<CMatrix> lu(P - rule.lambda[i] * I);
    acc += rule.weight[i] * lu.inverse();
  }
  // ∫_Λ^∞ ρ^z (P+ρ)^{-1} dρ = Σ_k (−P)^k Λ^{z−k} / (k − z)
  CMatrix term = I, tail = CMatrix::Zero(n, n);
  for (int k = 0; k < 200; ++k) {
    const cplx c = std::exp((z - static_cast<double>(k)) * std::log(Lambda)) /
                   (static_cast<double>(k) - z);
    tail += c * term;
    if (std::abs(c) * std::pow(ceiling, k) < 1e-18 * std::abs(std::exp(z * std::log(Lambda))))
      break;
    term = (-P * term).eval();
  }
  acc += (-std::sin(kPi * z) / kPi) * tail;
  return acc;
}

ClassicalSymbol compose_power(const ClassicalSymbol& sigma, int k, int N) {
  if (k < 1) throw ConfigurationError("compose_power: k must be positive");
  ClassicalSymbol out = sigma.truncated(std::min(N, sigma.truncation()));
  for (int i = 1; i < k; ++i) out = compose_symbols(sigma, out, N);
  return out;
}

namespace {

// Component j of σ^{(z)} for Re z < 0 through the contour integral of b_j.
Jet contour_component_jet(const ClassicalSymbol& sigma, cplx z, int j, int nodes,
                          std::span<const double> x, std::span<const double> xi, int order) {
  const int n = sigma.n();
  double floor, ceiling;
  point_spectrum(full(sigma.principal().value(x, xi), n), floor, ceiling);
  if (!(floor > 0.0)) throw DomainError("power_symbol: principal symbol is not positive");
  const ContourRule rule = keyhole_rule(z, 0.5 * floor, kJetLambdaFactor * ceiling, nodes);
  Jet acc;
  for (std::size_t i = 0; i < rule.lambda.size(); ++i) {
    const std::vector<Jet> b = resolvent_jets(sigma, x, xi, rule.lambda[i], j, order);
    acc += b[j].truncated(order) * rule.weight[i];
  }
  if (j == 0) {
    // closed-form ray tail −(sin πz/π) Σ_k (−a_0)^k Λ^{z−k}/(k − z)
    Jet a0 = sigma.principal().jet(x, xi, order);
    if (a0.dim() == 1 && n > 1) a0 = a0.broadcast(n);
    const double Lambda = rule.Lambda;
    Jet term = Jet::constant(a0.nvars(), order, CMatrix::Identity(n, n));
    Jet tail;
    const cplx lead = std::exp(z * std::log(Lambda));
    for (int k = 0; k < 200; ++k) {
      const cplx c = std::exp((z - static_cast<double>(k)) * std::log(Lambda)) /
                     (static_cast<double>(k) - z);
      tail += term * c;
      if (std::abs(c) * std::pow(2.0 * ceiling, k) < 1e-18 * std::abs(lead)) break;
      term = -1.0 * (a0 * term);
    }
    acc += tail * (-std::sin(kPi * z) / kPi);
  }
  return acc;
}

}  // namespace

PowerSymbol power_symbol(const ClassicalSymbol& sigma, cplx z, int N, int nodes) {
  if (N < 1) throw ConfigurationError("power_symbol: N must be at least 1");
  const double m = sigma.real_order();
  if (!(m > 0.0)) throw DomainError("power_symbol: order must be positive");
  const SpectralBounds bounds = principal_spectral_bounds(sigma, 64, 64);
  if (!bounds.positive) throw DomainError("power_symbol: principal symbol is not positive");
  const int n = sigma.n();
  if (z.real() < 0.0) {
    auto s = std::make_shared<ClassicalSymbol>(sigma);
    std::vector<HomogeneousComponent> comps;
    for (int j = 0; j < N; ++j) {
      HomogeneousComponent c;
      c.degree = m * z - static_cast<double>(j);
      c.jet_order = sigma.min_jet_order() - j;
      c.jet_fn = [s, z, j, nodes](std::span<const double> x, std::span<const double> xi,
                                  int order) {
        return contour_component_jet(*s, z, j, nodes, x, xi, order);
      };
      if (j == 0) {
        c.eval = [s, z, n, nodes](std::span<const double> x, std::span<const double> xi) {
          const CMatrix v = full(s->principal().value(x, xi), n);
          if (hermitian_defect(v) < 1e-13) return matrix_power(0.5 * (v + v.adjoint()), z);
          return contour_component_jet(*s, z, 0, nodes, x, xi, 0).value();
        };
      }
      comps.push_back(std::move(c));
    }
    ClassicalSymbol sym(sigma.d(), sigma.algebra(), m * z, std::move(comps),
                        sigma.spatial_support());
    return {sigma, z, std::move(sym)};
  }
  const int k = static_cast<int>(std::floor(z.real())) + 1;
  const PowerSymbol lower = power_symbol(sigma, z - static_cast<double>(k), N, nodes);
  ClassicalSymbol sym = compose_symbols(compose_power(sigma, k, N), lower.symbol, N);
  return {sigma, z, std::move(sym)};
}

std::function<CMatrix(std::span<const double>, std::span<const double>)>
principal_modulus_power(const ClassicalSymbol& sigma, cplx z) {
  const ClassicalSymbol s = sigma;
  const int n = sigma.n();
  return [s, z, n](std::span<const double> x, std::span<const double> xi) {
    const CMatrix v = full(s.principal().value(x, xi), n);
    const CMatrix g = v.adjoint() * v;
    return matrix_power(0.5 * (g + g.adjoint()), 0.5 * z);
  };
}

}  // namespace psilab
