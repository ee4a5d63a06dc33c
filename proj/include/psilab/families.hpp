#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "psilab/field.hpp"
#include "psilab/symbols.hpp"

namespace psilab {

/// Builds a component from a jet-level formula in (x, ξ). The formula sees
/// variable jets at the expansion point and must return a jet of the same order.
using JetFormula = std::function<Jet(const JetPoint&)>;

HomogeneousComponent component_from_jet(cplx degree, JetFormula f,
                                        HomogeneousComponent::EvalFn eval = nullptr);
HomogeneousComponent zero_component(int d, cplx degree);

namespace families {

/// Symbol with one component per formula, degrees order, order−1, ...
ClassicalSymbol from_formulas(int d, int n, cplx order, std::vector<JetFormula> formulas,
                              std::optional<Box> support = std::nullopt);

/// m·|ξ|^s (n taken from m; 1×1 for a scalar).
ClassicalSymbol xi_power(int d, cplx s, const CMatrix& m = CMatrix::Identity(1, 1));

/// a(x)·|ξ|^s with the support of a.
ClassicalSymbol field_xi_power(const Field& a, cplx s);

/// Classical expansion of (1+|ξ|²)^{s/2}: components C(s/2, k)|ξ|^{s−2k}.
ClassicalSymbol bessel(int d, double s, int N = 4);

/// Order-0 multiplication symbol f(x).
ClassicalSymbol multiplication(const Field& f);

/// ξ_j/|ξ| (the Riesz transform symbol).
ClassicalSymbol riesz(int d, int j);

/// Σ_j ξ_j/|ξ| · c_j + c_0 as an order-0 matrix symbol.
ClassicalSymbol angular_linear(int d, const CMatrix& c0, const std::vector<CMatrix>& cj);

/// A positive, x-dependent 2×2 order-m test symbol with lower-order terms:
/// σ_m = (P + g(x) Q)|ξ|^m + (ξ_1/|ξ|) R |ξ|^m, σ_{m−1} = S(x)|ξ|^{m−1}, with
/// matrices drawn from `seed` and scaled so σ_m stays positive definite.
ClassicalSymbol random_elliptic_2x2(int d, double m, unsigned seed, int N = 4);

}  // namespace families

}  // namespace psilab
