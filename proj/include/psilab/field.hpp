#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "psilab/jet.hpp"

namespace psilab {

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int d() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
  double volume() const;
  double diameter() const;
  static Box cube(int d, double half_width, double center = 0.0);
  /// Smallest box containing both.
  static Box hull(const Box& a, const Box& b);
};

/// Matrix-valued function of x with analytic jets, used for coefficients,
/// localizers and right supports. `support`, when set, contains the closure
/// of {x : f(x) ≠ 0}.
class Field {
 public:
  using JetFn = std::function<Jet(const JetPoint&)>;
  using ValueFn = std::function<CMatrix(std::span<const double>)>;

  Field() = default;
  Field(int d, int n, JetFn jet, ValueFn value, std::optional<Box> support = std::nullopt);

  int d() const { return d_; }
  int n() const { return n_; }
  const std::optional<Box>& support() const { return support_; }

  CMatrix operator()(std::span<const double> x) const { return value_(x); }
  Jet jet(const JetPoint& p) const { return jet_(p); }

  Field operator*(const CMatrix& m) const;
  Field operator*(const Field& g) const;
  Field operator+(const Field& g) const;
  Field operator*(double s) const;
  Field adjoint() const;

 private:
  int d_ = 0;
  int n_ = 1;
  JetFn jet_;
  ValueFn value_;
  std::optional<Box> support_;
};

namespace fields {

Field constant(int d, const CMatrix& m);
Field constant(int d, double v);
/// exp(1 − 1/(1 − |x − c|²/r²)) inside the ball, 0 outside; peak value 1.
Field radial_bump(int d, double radius, std::vector<double> center = {});
/// Product over axes of one-dimensional bumps of half-width `half_width`.
Field tensor_bump(int d, double half_width, std::vector<double> center = {});
/// exp(−|x − c|² / (2 w²)); support left unset.
Field gaussian(int d, double width, std::vector<double> center = {});
/// Π_k cos(2π q_k x_k / L), periodic on a torus of side L.
Field cosine_mode(int d, double L, std::vector<int> q);
/// Linear coordinate x_axis (unbounded, used in calculus checks).
Field coordinate(int d, int axis);

}  // namespace fields

}  // namespace psilab
