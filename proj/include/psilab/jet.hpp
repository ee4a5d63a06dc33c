#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psilab/linalg.hpp"

namespace psilab {

using MultiIndex = std::vector<int>;

/// Graded enumeration of the monomials y^γ, |γ| ≤ order, in `nvars` real
/// variables. Monomials are listed degree by degree in an order that does not
/// depend on `order`, so a lower-order layout is a prefix of a higher one.
class JetLayout {
 public:
  struct Product {
    std::uint32_t a, b, c;
  };
  struct Shift {
    std::uint32_t src, dst;
    double factor;
  };

  static const JetLayout& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  std::size_t size() const { return terms_.size(); }
  const MultiIndex& term(std::size_t t) const { return terms_[t]; }
  /// Position of γ, or -1 when |γ| exceeds the order.
  std::ptrdiff_t index_of(const MultiIndex& gamma) const;
  /// Pairs (a, b) of monomials with |a| + |b| ≤ order and their product c.
  const std::vector<Product>& products() const { return products_; }
  /// ∂/∂y_var maps coefficient src (degree k ≥ 1) to dst (degree k − 1).
  const std::vector<Shift>& derivative(int var) const { return derivative_[var]; }

 private:
  JetLayout(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<MultiIndex> terms_;
  std::vector<std::uint64_t> keys_;  // sorted copy for lookup
  std::vector<std::uint32_t> key_pos_;
  std::vector<Product> products_;
  std::vector<std::vector<Shift>> derivative_;
};

/// Truncated multivariate Taylor polynomial with n×n complex matrix
/// coefficients: f(y0 + h) ≈ Σ_{|γ| ≤ order} c_γ h^γ, with c_γ = ∂^γ f / γ!.
///
/// Products keep the operand order (coefficients need not commute). A jet with
/// n = 1 broadcasts as a multiple of the identity when mixed with n > 1.
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order, int n);

  static Jet constant(int nvars, int order, const CMatrix& value);
  static Jet scalar(int nvars, int order, cplx value);
  /// y_var around `value`, as a scalar jet.
  static Jet variable(int nvars, int order, int var, double value);

  int nvars() const { return layout_->nvars(); }
  int order() const { return layout_->order(); }
  int dim() const { return n_; }
  std::size_t terms() const { return layout_->size(); }
  bool empty() const { return layout_ == nullptr; }

  cplx* block(std::size_t t) { return coeffs_.data() + t * n_ * n_; }
  const cplx* block(std::size_t t) const { return coeffs_.data() + t * n_ * n_; }

  CMatrix coefficient(std::size_t t) const;
  CMatrix value() const { return coefficient(0); }
  /// ∂^γ f at the expansion point, i.e. γ! c_γ.
  CMatrix partial(const MultiIndex& gamma) const;

  Jet truncated(int order) const;
  Jet derivative(int var) const;
  /// Coefficient-wise conjugate transpose (the jet of f* for real variables).
  Jet adjoint() const;
  /// Promote a scalar jet to n×n by multiplying with the identity.
  Jet broadcast(int n) const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(cplx s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(const CMatrix& m, const Jet& a);
  friend Jet operator*(const Jet& a, const CMatrix& m);

  /// Matrix inverse by Neumann expansion around the constant coefficient.
  Jet inverse() const;

  /// g(f) for a scalar jet f, given g^{(k)}(f(y0)) for k = 0..order.
  Jet compose(std::span<const cplx> derivatives) const;

 private:
  const JetLayout* layout_ = nullptr;
  int n_ = 0;
  std::vector<cplx> coeffs_;
};

Jet exp(const Jet& f);
Jet log(const Jet& f);
Jet pow(const Jet& f, cplx s);
Jet sqrt(const Jet& f);
Jet reciprocal(const Jet& f);
Jet sin(const Jet& f);
Jet cos(const Jet& f);

/// Variable jets at a phase-space point: y = (x_1..x_d, ξ_1..ξ_d).
struct JetPoint {
  std::vector<Jet> x;
  std::vector<Jet> xi;
  int order = 0;

  JetPoint(std::span<const double> x, std::span<const double> xi, int order);
  int d() const { return static_cast<int>(x.size()); }
  int nvars() const { return 2 * d(); }
  Jet constant(cplx v) const { return Jet::scalar(nvars(), order, v); }
  Jet constant(const CMatrix& m) const { return Jet::constant(nvars(), order, m); }
  /// |ξ|² as a jet.
  Jet xi_norm2() const;
  Jet x_norm2() const;
};

/// Multi-index helpers over the (x, ξ) variable split.
MultiIndex phase_index(std::span<const int> alpha_xi, std::span<const int> beta_x);
double factorial(const MultiIndex& gamma);
/// All multi-indices of the given length and total degree.
std::vector<MultiIndex> indices_of_degree(int length, int degree);

}  // namespace psilab
