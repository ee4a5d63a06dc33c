#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "psilab/field.hpp"
#include "psilab/jet.hpp"
#include "psilab/linalg.hpp"

namespace psilab {

/// Internal algebra M_n with the standard (un-normalized) matrix trace.
struct MatrixAlgebraSpec {
  enum class TraceConvention { standard };

  int n = 1;
  TraceConvention trace_convention = TraceConvention::standard;

  explicit MatrixAlgebraSpec(int n_ = 1);
  cplx trace(const CMatrix& a) const { return a.trace(); }
  bool operator==(const MatrixAlgebraSpec& o) const { return n == o.n; }
};

/// The fixed smooth cutoff φ(ξ) = ψ(|ξ|), ψ(r) = h(2r−1)/(h(2r−1)+h(2−2r)),
/// h(t) = exp(−1/t) for t > 0. φ = 0 on |ξ| ≤ 1/2 and φ = 1 on |ξ| ≥ 1.
namespace cutoff {
double psi(double r);
double phi(std::span<const double> xi);
}  // namespace cutoff

/// Largest jet order the built-in analytic families advertise.
inline constexpr int kAnalyticJetOrder = 40;

/// A matrix-valued function σ(x, ξ), smooth on ξ ≠ 0 and positively
/// homogeneous of `degree` in ξ. Jets are Taylor jets in (x, ξ) jointly.
struct HomogeneousComponent {
  using JetFn = std::function<Jet(std::span<const double> x, std::span<const double> xi, int order)>;
  using EvalFn = std::function<CMatrix(std::span<const double> x, std::span<const double> xi)>;

  cplx degree = 0.0;
  JetFn jet_fn;
  int jet_order = kAnalyticJetOrder;
  EvalFn eval;  // optional value-only fast path

  CMatrix value(std::span<const double> x, std::span<const double> xi) const;
  Jet jet(std::span<const double> x, std::span<const double> xi, int order) const;
  /// ∂_ξ^α ∂_x^β σ(x, ξ).
  CMatrix partial(std::span<const double> x, std::span<const double> xi,
                  std::span<const int> alpha, std::span<const int> beta) const;
};

/// Component whose jets come from central differences of `f`, with step
/// h = ε^{1/3}(1 + |arg|) per variable. Supports jets up to `max_order`.
HomogeneousComponent finite_difference_component(cplx degree, int d, int n,
                                                 HomogeneousComponent::EvalFn f,
                                                 int max_order = 2);

/// σ ∼ Σ_j φ(ξ) σ_{m−j}(x, ξ), truncated after N components.
class ClassicalSymbol {
 public:
  ClassicalSymbol(int d, MatrixAlgebraSpec algebra, cplx order,
                  std::vector<HomogeneousComponent> components,
                  std::optional<Box> spatial_support = std::nullopt);

  int d() const { return d_; }
  int n() const { return algebra_.n; }
  const MatrixAlgebraSpec& algebra() const { return algebra_; }
  cplx order() const { return order_; }
  /// Real order; throws DomainError when the order is not real.
  double real_order() const;
  int truncation() const { return static_cast<int>(components_.size()); }
  const std::vector<HomogeneousComponent>& components() const { return components_; }
  const HomogeneousComponent& component(int j) const { return components_.at(j); }
  const HomogeneousComponent& principal() const { return components_.at(0); }
  const std::optional<Box>& spatial_support() const { return spatial_support_; }
  int min_jet_order() const;

  ClassicalSymbol truncated(int N) const;
  ClassicalSymbol with_support(std::optional<Box> support) const;

 private:
  int d_;
  MatrixAlgebraSpec algebra_;
  cplx order_;
  std::vector<HomogeneousComponent> components_;
  std::optional<Box> spatial_support_;
};

/// ∂_ξ^α of a jet in the (x, ξ) variables of dimension d.
Jet xi_derivative(const Jet& j, int d, const MultiIndex& alpha);
/// D_x^α = (−i)^{|α|} ∂_x^α of a jet.
Jet x_dderivative(const Jet& j, int d, const MultiIndex& alpha);

/// Σ_j φ(ξ) σ_{m−j}(x, ξ); the zero matrix on |ξ| ≤ 1/2.
CMatrix evaluate_symbol(const ClassicalSymbol& sigma, std::span<const double> x,
                        std::span<const double> xi);

/// Symbol of Op(b)∘Op(a): degree m₁+m₂−j component
/// Σ_{|α|+k+l=j} (1/α!) ∂_ξ^α b_{m₂−k} · D_x^α a_{m₁−l}, D_x = −i∂_x.
ClassicalSymbol compose_symbols(const ClassicalSymbol& b, const ClassicalSymbol& a, int N);

/// Symbol of the L²-adjoint: degree m̄−j component Σ_{|α|+k=j} (1/α!) ∂_ξ^α D_x^α a_{m−k}*.
ClassicalSymbol adjoint_symbol(const ClassicalSymbol& a, int N);

ClassicalSymbol add_symbols(const ClassicalSymbol& a, const ClassicalSymbol& b);
ClassicalSymbol scale_symbol(const ClassicalSymbol& a, cplx s);

/// Largest entrywise difference between the components of degree > Re m − N
/// of two symbols, over the given sample points (ξ taken on the unit sphere).
double component_distance(const ClassicalSymbol& a, const ClassicalSymbol& b, int N,
                          std::span<const std::vector<double>> xs,
                          std::span<const std::vector<double>> us);

/// |ξ·∇_ξ σ − degree σ| / max(|σ|, tiny) at one point (max-entry norms).
double euler_defect(const HomogeneousComponent& c, std::span<const double> x,
                    std::span<const double> xi);

}  // namespace psilab
