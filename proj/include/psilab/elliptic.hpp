#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psilab/errors.hpp"
#include "psilab/symbols.hpp"

namespace psilab {

struct EllipticityReport {
  bool is_elliptic = false;
  double constant_C = 0.0;        // sup ‖σ_m(x,u)^{-1}‖ over samples, |u| = 1
  double modulus_bound_C2 = 0.0;  // inf of the smallest singular value of σ_m(x,u)
  int samples = 0;
  std::vector<double> offending_x;  // set when a singular sample was found
  std::vector<double> offending_u;
};

/// Ellipticity failure, carrying the report.
struct EllipticityError : DomainError {
  EllipticityReport report;
  EllipticityError(const std::string& what, EllipticityReport r)
      : DomainError(what), report(std::move(r)) {}
};

/// Spectral parameter region {|λ| < r} ∪ {|arg λ − π| < π/4}.
struct KeyholeSpec {
  double arc_radius = 0.5;
  double ray_angle = kPi;
  double half_aperture = kPi / 4;

  explicit KeyholeSpec(double r = 0.5);
  bool contains(cplx lambda) const;
};

/// Deterministic sample sets used by the certificates.
std::vector<std::vector<double>> space_samples(int d, const std::optional<Box>& support, int count);
std::vector<std::vector<double>> sphere_samples(int d, int count);

EllipticityReport check_ellipticity(const ClassicalSymbol& sigma, int sphere_samples = 200,
                                    int space_samples = 200);

/// Eigenvalue bounds of σ_m on |ξ| = 1 samples.
struct SpectralBounds {
  double floor = 0.0;    // smallest real part of an eigenvalue
  double ceiling = 0.0;  // largest eigenvalue modulus
  double max_arg = 0.0;  // largest |arg| of an eigenvalue
  bool positive = false; // all eigenvalues in the sector |arg| < π/4 with floor > 0
};

SpectralBounds principal_spectral_bounds(const ClassicalSymbol& sigma, int sphere_samples = 200,
                                         int space_samples = 200);

/// ρ = half the sampled eigenvalue floor.
double default_shift(const SpectralBounds& b);

/// σ + ρ·1 (requires an integer order ≥ 0).
ClassicalSymbol shifted(const ClassicalSymbol& sigma, double rho);

/// Jets of the resolvent components b_0..b_jmax of σ − λ at (x, ξ):
/// b_0 = (σ_m − λ)^{-1}, b_j = −[Σ_{k<j, k+l+|α|=j} (1/α!) ∂_ξ^α b_k D_x^α σ_{m−l}] b_0.
/// b_k is returned at jet order J + jmax − k.
std::vector<Jet> resolvent_jets(const ClassicalSymbol& sigma, std::span<const double> x,
                                std::span<const double> xi, cplx lambda, int jmax, int J);

/// Parametrix of order −m, components from the resolvent recursion at λ = 0.
ClassicalSymbol parametrix(const ClassicalSymbol& sigma, int N, int sphere = 64, int space = 64);

struct ResolventTerm {
  double degree;
  std::function<CMatrix(std::span<const double> x, std::span<const double> xi)> eval;
};

/// Resolvent components σ(B)⁰_{−m−j}(·, ·, λ), j = 0..N−1.
std::vector<ResolventTerm> resolvent_symbols(const ClassicalSymbol& sigma, cplx lambda, int N);

}  // namespace psilab
