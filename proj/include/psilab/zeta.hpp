#pragma once

#include <iosfwd>
#include <vector>

#include "psilab/field.hpp"
#include "psilab/quantize.hpp"
#include "psilab/symbols.hpp"

namespace psilab {

struct ZetaSample {
  std::vector<cplx> z_values;
  std::vector<cplx> values;
  double pole = 0.0;

  /// Checks Re z > pole + 1e−3 for all samples and matching lengths.
  void validate() const;
  /// CSV columns re_z, im_z, re_zeta, im_zeta.
  void write_csv(std::ostream& out) const;
};

struct ZetaQuadrature {
  int space_per_axis = 65;
  int sphere_points = 64;  // d = 2 angles; d = 3 uses a Lebedev rule (26, 50 or 86)
  int radial_nodes = 48;   // Gauss–Legendre nodes on the cutoff shell 1/2 ≤ |ξ| ≤ 1
};

/// ζ_{σ,φ}(z) = (2π)^{−d} ∫∫ τ(φ(x)* φ(ξ)σ_m(x,ξ)^{−z} φ(x)) dx dξ for Re z > d/m.
/// The |ξ| ≥ 1 shell contributes 1/(mz − d) per unit sphere measure exactly,
/// the cutoff shell 1/2 ≤ |ξ| ≤ 1 by quadrature.
cplx symbolic_zeta(const ClassicalSymbol& sigma, const Field& phi, cplx z,
                   const ZetaQuadrature& q = {});

/// (1/(m(2π)^d)) ∫_{S^{d−1}} ∫ τ(φ* σ_m^{−d/m} φ) dx ds.
cplx residue_at_pole(const ClassicalSymbol& sigma, const Field& phi, const ZetaQuadrature& q = {});

/// Tr(M_{φ*} A^{−z} M_φ) with the operator's trace weights, for each z.
std::vector<cplx> operator_zeta(const DiscretizedOperator& A, const SymbolFn& phi,
                                const std::vector<cplx>& z);
cplx operator_zeta(const DiscretizedOperator& A, const SymbolFn& phi, cplx z);
/// Same trace for a multiplier given by per-frequency blocks (unit weights).
std::vector<cplx> operator_zeta(const MultiplierOperator& A, const SymbolFn& phi,
                                const std::vector<cplx>& z);

struct ResidueFit {
  cplx residue = 0.0;
  double fit_residual = 0.0;  // max relative misfit of (z − p)ζ(z)
  double condition = 0.0;
  int degree = 0;
};

/// Least-squares fit of g(z) = (z − p)ζ(z) by a polynomial in (z − p);
/// returns g(p). Default degree min(3, samples − 2).
ResidueFit extrapolate_residue(const ZetaSample& samples, int degree = -1);

/// Richardson elimination: given values v_i at band scales K_i obeying
/// v_i = v_∞ + Σ_e c_e K_i^{e}, returns v_∞. Needs one more level than exponents.
cplx band_extrapolate(const std::vector<double>& K, const std::vector<cplx>& values,
                      const std::vector<cplx>& exponents);

}  // namespace psilab
