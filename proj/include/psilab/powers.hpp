#pragma once

#include <functional>
#include <vector>

#include "psilab/symbols.hpp"

namespace psilab {

/// P^z = exp(z log P) by the spectral theorem, P Hermitian positive definite.
CMatrix matrix_power(const CMatrix& P, cplx z);

/// Nodes λ_i and weights w_i with Σ w_i g(λ_i) ≈ (i/2π)∫_Γ λ^z g(λ) dλ over the
/// keyhole contour: rays arg λ = ±π from |λ| = r to Λ and the circle |λ| = r.
/// Rays use composite Gauss–Legendre in log|λ| (panels of unit width), the
/// circle Gauss–Legendre panels in the angle.
struct ContourRule {
  std::vector<cplx> lambda;
  std::vector<cplx> weight;
  double r = 0.0;
  double Lambda = 0.0;
};

ContourRule keyhole_rule(cplx z, double r, double Lambda, int nodes = 512);

/// Dunford integral for Re z < 0. The ray integral past Λ = 1e6·‖P‖ is added
/// in closed form from the Neumann series of (P + ρ)^{-1}.
CMatrix contour_power(const CMatrix& P, cplx z, int nodes = 512);

struct PowerSymbol {
  ClassicalSymbol base;
  cplx exponent;
  ClassicalSymbol symbol;  // components of degree m z − j

  int truncation() const { return symbol.truncation(); }
  const HomogeneousComponent& component(int j) const { return symbol.component(j); }
};

/// Complex power of an elliptic symbol with positive principal part. For
/// Re z < 0 component j is (i/2π)∫_Γ λ^z b_j(λ) dλ over the resolvent
/// components; otherwise σ^k ∘ B^{(z−k)} with k = ⌊Re z⌋ + 1.
PowerSymbol power_symbol(const ClassicalSymbol& sigma, cplx z, int N, int nodes = 384);

/// (x, ξ) ↦ (σ_m*σ_m)^{z/2}.
std::function<CMatrix(std::span<const double>, std::span<const double>)>
principal_modulus_power(const ClassicalSymbol& sigma, cplx z);

/// k-fold composition σ∘…∘σ truncated to N components (k ≥ 1).
ClassicalSymbol compose_power(const ClassicalSymbol& sigma, int k, int N);

}  // namespace psilab
