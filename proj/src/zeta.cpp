#include "psilab/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/SVD>

#include "psilab/elliptic.hpp"
#include "psilab/errors.hpp"
#include "psilab/powers.hpp"
#include "psilab/quadrature.hpp"

namespace psilab {

void ZetaSample::validate() const {
  if (z_values.size() != values.size())
    throw ConfigurationError("ZetaSample: z_values and values differ in length");
  for (const cplx& z : z_values)
    if (!(z.real() > pole + 1e-3))
      throw DomainError("ZetaSample: sample z = " + std::to_string(z.real()) +
                        " is not right of the pole " + std::to_string(pole));
}

void ZetaSample::write_csv(std::ostream& out) const {
  out << "re_z,im_z,re_zeta,im_zeta\n" << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i)
    out << z_values[i].real() << ',' << z_values[i].imag() << ',' << values[i].real() << ','
        << values[i].imag() << '\n';
}

namespace {

Rule sphere_for(int d, const ZetaQuadrature& q) {
  if (d == 3) {
    const int pts = q.sphere_points >= 86 ? 86 : (q.sphere_points >= 50 ? 50 : 26);
    return sphere_rule(3, pts);
  }
  return sphere_rule(d, q.sphere_points);
}

CMatrix full(const CMatrix& v, int n) {
  if (v.rows() == 1 && n > 1) return v(0, 0) * CMatrix::Identity(n, n);
  return v;
}

// ∫_x ∫_S τ(φ* σ_m(x,ω)^{−w} φ) dx dω
cplx angular_space_integral(const ClassicalSymbol& sigma, const Field& phi, cplx w,
                            const ZetaQuadrature& q) {
  if (!phi.support()) throw ConfigurationError("zeta: localizer must have a support box");
  if (phi.d() != sigma.d()) throw ConfigurationError("zeta: localizer dimension mismatch");
  const int n = sigma.n();
  const Rule space = box_rule(*phi.support(), q.space_per_axis);
  const Rule sphere = sphere_for(sigma.d(), q);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const CMatrix f = full(phi(space.nodes[i]), n);
    if (f.cwiseAbs().maxCoeff() == 0.0) continue;
    for (std::size_t k = 0; k < sphere.size(); ++k) {
      const CMatrix s = full(sigma.principal().value(space.nodes[i], sphere.nodes[k]), n);
      const CMatrix p = matrix_power(0.5 * (s + s.adjoint()), -w);
      acc += space.weights[i] * sphere.weights[k] * (f.adjoint() * p * f).trace();
    }
  }
  return acc;
}

}  // namespace

cplx symbolic_zeta(const ClassicalSymbol& sigma, const Field& phi, cplx z, const ZetaQuadrature& q) {
  const double m = sigma.real_order();
  const int d = sigma.d();
  if (!(m > 0.0)) throw DomainError("symbolic_zeta: order must be positive");
  if (!(z.real() > static_cast<double>(d) / m))
    throw DomainError("symbolic_zeta: Re z must exceed the pole d/m");
  // radial factor: ∫_{1/2}^{1} ψ(r) r^{d−1−mz} dr + ∫_1^∞ r^{d−1−mz} dr
  const Rule1D r = gauss_legendre(q.radial_nodes, 0.5, 1.0);
  cplx radial = 1.0 / (m * z - static_cast<double>(d));
  for (std::size_t i = 0; i < r.x.size(); ++i)
    radial += r.w[i] * cutoff::psi(r.x[i]) * std::exp((static_cast<double>(d) - 1.0 - m * z) * std::log(r.x[i]));
  return std::pow(2.0 * kPi, -d) * radial * angular_space_integral(sigma, phi, z, q);
}

cplx residue_at_pole(const ClassicalSymbol& sigma, const Field& phi, const ZetaQuadrature& q) {
  const double m = sigma.real_order();
  if (!(m > 0.0)) throw DomainError("residue_at_pole: order must be positive");
  const EllipticityReport rep = check_ellipticity(sigma, 64, 64);
  if (!rep.is_elliptic) throw EllipticityError("residue_at_pole: symbol is not elliptic", rep);
  const int d = sigma.d();
  return angular_space_integral(sigma, phi, static_cast<double>(d) / m, q) /
         (m * std::pow(2.0 * kPi, d));
}

namespace {

// Weighted trace of M_φ* X M_φ restricted to the diagonal blocks of X.
cplx localized_trace(const GridSpec& g, int n, const std::vector<CMatrix>& diag_blocks,
                     const std::vector<double>& weights, const SymbolFn& phi) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const CMatrix f = full(phi(g.point(j)), n);
    const CMatrix b = f.adjoint() * diag_blocks[j] * f;
    for (int a = 0; a < n; ++a) acc += weights[j * n + a] * b(a, a);
  }
  return acc;
}

}  // namespace

std::vector<cplx> operator_zeta(const DiscretizedOperator& A, const SymbolFn& phi,
                                const std::vector<cplx>& zs) {
  if (hermitian_defect(A.matrix) > 1e-10) throw DomainError("operator_zeta: A is not Hermitian");
  const HermitianEigen e = eigh(A.matrix, true);
  if (!(e.values(0) > 0.0)) throw DomainError("operator_zeta: A is not positive definite");
  const int n = A.algebra.n;
  const std::size_t P = A.grid.size();
  std::vector<cplx> out;
  for (const cplx& z : zs) {
    CVector f(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) f(i) = std::exp(-z * std::log(e.values(i)));
    std::vector<CMatrix> blocks(P);
    for (std::size_t j = 0; j < P; ++j) {
      const auto rows = e.vectors.middleRows(j * n, n);
      blocks[j] = rows * f.asDiagonal() * rows.adjoint();
    }
    out.push_back(localized_trace(A.grid, n, blocks, A.trace_weights, phi));
  }
  return out;
}

cplx operator_zeta(const DiscretizedOperator& A, const SymbolFn& phi, cplx z) {
  return operator_zeta(A, phi, std::vector<cplx>{z}).front();
}

std::vector<cplx> operator_zeta(const MultiplierOperator& A, const SymbolFn& phi,
                                const std::vector<cplx>& zs) {
  const int n = A.n;
  const std::size_t P = A.grid.size();
  std::vector<HermitianEigen> eig(P);
  for (std::size_t k = 0; k < P; ++k) {
    if (hermitian_defect(A.blocks[k]) > 1e-10) throw DomainError("operator_zeta: block is not Hermitian");
    eig[k] = eigh(A.blocks[k], true);
    if (!(eig[k].values(0) > 0.0)) throw DomainError("operator_zeta: A is not positive definite");
  }
  std::vector<double> weights(P * n, 1.0);
  std::vector<cplx> out;
  for (const cplx& z : zs) {
    CMatrix D = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < P; ++k) {
      CVector f(n);
      for (int i = 0; i < n; ++i) f(i) = std::exp(-z * std::log(eig[k].values(i)));
      D += eig[k].vectors * f.asDiagonal() * eig[k].vectors.adjoint();
    }
    D /= static_cast<double>(P);
    std::vector<CMatrix> blocks(P, D);
    out.push_back(localized_trace(A.grid, n, blocks, weights, phi));
  }
  return out;
}

ResidueFit extrapolate_residue(const ZetaSample& s, int degree) {
  s.validate();
  const std::size_t count = s.values.size();
  if (count < 4) throw ConfigurationError("extrapolate_residue: need at least 4 samples");
  for (const cplx& z : s.z_values)
    if (z.real() > s.pole + 0.5 + 1e-12)
      throw DomainError("extrapolate_residue: samples must lie within 0.5 of the pole");
  if (degree < 0) degree = std::min<int>(3, static_cast<int>(count) - 2);
  if (degree + 1 > static_cast<int>(count)) throw ConfigurationError("extrapolate_residue: degree too high");
  CMatrix V(count, degree + 1);
  CVector g(count);
  for (std::size_t i = 0; i < count; ++i) {
    const cplx u = s.z_values[i] - s.pole;
    cplx p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      V(i, k) = p;
      p *= u;
    }
    g(i) = u * s.values[i];
  }
  // column scaling keeps the condition number about the geometry, not the units
  RVector scale(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    scale(k) = V.col(k).norm();
    V.col(k) /= scale(k);
  }
  Eigen::JacobiSVD<CMatrix> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  ResidueFit fit;
  fit.degree = degree;
  fit.condition = sv(0) / sv(sv.size() - 1);
  if (!(fit.condition <= 1e10))
    throw NumericalError("extrapolate_residue: ill-conditioned fit (condition " +
                         std::to_string(fit.condition) + ")");
  CVector c = svd.solve(g);
  const CVector resid = V * c - g;
  double gmax = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) gmax = std::max(gmax, std::abs(g(i)));
  fit.fit_residual = resid.cwiseAbs().maxCoeff() / std::max(gmax, 1e-300);
  fit.residue = c(0) / scale(0);
  return fit;
}

cplx band_extrapolate(const std::vector<double>& K, const std::vector<cplx>& values,
                      const std::vector<cplx>& exponents) {
  const std::size_t levels = K.size();
  if (values.size() != levels || levels != exponents.size() + 1)
    throw ConfigurationError("band_extrapolate: need exactly one more level than exponents");
  CMatrix M(levels, levels);
  CVector v(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    M(i, 0) = 1.0;
    for (std::size_t e = 0; e < exponents.size(); ++e)
      M(i, e + 1) = std::exp(exponents[e] * std::log(K[i]));
    v(i) = values[i];
  }
  return M.fullPivLu().solve(v)(0);
}

}  // namespace psilab
