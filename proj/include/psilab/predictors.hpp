#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psilab/field.hpp"
#include "psilab/quantize.hpp"
#include "psilab/symbols.hpp"

namespace psilab {

/// Value of a closed-form prediction plus its self-refinement diagnostic.
struct Prediction {
  double value = 0.0;
  double refinement_gap = 0.0;  // relative difference between two quadrature levels
  bool precision_warning = false;
};

struct PredictorQuadrature {
  int space_per_axis = 65;
  int sphere_points = 64;
};

/// τ(|X|^p) = Σ s_i(X)^p.
double trace_abs_power(const CMatrix& x, double p);

/// d^{−m/d}(2π)^{−m} [∫_S ∫ τ(|σ_{−m}(x,s) f(x)|^{d/m}) dx ds]^{m/d}.
Prediction expected_weyl(const ClassicalSymbol& sigma, const Field& f, double m, int d,
                         const PredictorQuadrature& q = {});

/// d^{−m/d}(2π)^{−m} [∫_S ∫ τ(g^{2d/m} |σ_m(x,s)|^{−d/m} p) dx ds]^{m/d}: the limit of
/// t^{m/d} μ(t, M_{pg}|A|^{−1}M_{pg}) for elliptic A of order m.
Prediction expected_weyl_elliptic(const ClassicalSymbol& sigma_A, const Field& g, const CMatrix& p,
                                  const PredictorQuadrature& q = {});

/// d^{−1}(2π)^{−d} ∫_S ∫ τ(σ_{−d}(x,s)) dx ds over the box.
Prediction dixmier_value(const ClassicalSymbol& sigma, const Box& box, const PredictorQuadrature& q = {});

/// A smooth function on S^{d−1}; the gradient is that of its degree-0
/// homogeneous extension, evaluated on the sphere.
struct SphereFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;

  /// s ↦ s_j with gradient e_j − s_j s.
  static SphereFunction riesz(int d, int j);
  /// Gradient by central differences of the homogeneous extension.
  static SphereFunction from_values(std::function<double(std::span<const double>)> v);
};

/// How multiplication by f enters a commutator: pointwise on the grid
/// (collocation) or compressed to the frequency band (galerkin, see
/// galerkin_multiplication_frequency). Galerkin avoids the wrap-around
/// coupling of a discontinuous multiplier across the band edge.
enum class Discretization { collocation, galerkin };
Discretization parse_discretization(const std::string& name);

/// [T_φ, M_f] with T_φ the Fourier multiplier φ(ξ/|ξ|), zero at ξ = 0.
DiscretizedOperator cz_commutator_build(const SphereFunction& phi, const Field& f, const GridSpec& grid,
                                        Discretization mode = Discretization::collocation);

/// (2π)^{−1} d^{−1/d} (∫_S ∫ τ(|Σ_k ∂_kφ(s) D_k f(x)|^d) dx ds)^{1/d}.
Prediction expected_weyl_cz(const SphereFunction& phi, const Field& f, int d,
                            const PredictorQuadrature& q = {});

/// Checks the hypothesis d ≥ 2, α ∈ (−d/2, 0) ∪ (0, 1), or d = 1, α ∈ (0, 1).
void check_fractional_range(double alpha, int d);

/// C_{d,α} (∫_S ∫ τ(|s·∇f(x)|^{d/(1−α)}) dx ds)^{(1−α)/d}, C_{d,α} = |α| d^{(α−1)/d} (2π)^{α−1}.
Prediction expected_weyl_frac(double alpha, const Field& f, int d, const PredictorQuadrature& q = {});

/// [I^α, M_f] with I^α the multiplier |ξ|^α (zero mode 0).
DiscretizedOperator frac_commutator_build(double alpha, const Field& f, const GridSpec& grid,
                                          Discretization mode = Discretization::collocation);

enum class CouplingLaw { rademacher, uniform, deterministic };
CouplingLaw parse_coupling_law(const std::string& name);

/// V(x, ε) = Σ_n V₀(x + n) ε_n over the ℤ^d translates that fit on a torus of
/// integer side L (indices taken mod L).
struct RandomModel {
  Field base_profile;
  CouplingLaw law = CouplingLaw::rademacher;
  int sample_count = 16;
  std::uint64_t seed = 0;

  RandomModel() = default;
  RandomModel(Field v0, CouplingLaw law, int samples, std::uint64_t seed);

  /// Couplings ε_n for one sample; deterministic in (seed, sample).
  std::vector<double> couplings(const GridSpec& grid, std::size_t sample) const;
  /// V(x_j, ε) on the grid points.
  RVector potential(const GridSpec& grid, const std::vector<double>& eps) const;
  /// (γ(k)ε)_n = ε_{n−k}.
  static std::vector<double> shift(const GridSpec& grid, const std::vector<double>& eps,
                                   const std::vector<int>& k);
};

/// Sites of the ℤ^d lattice on the torus: side L must be an integer and
/// Npts/L an integer so that lattice shifts are grid shifts.
int lattice_side(const GridSpec& grid);

struct DosPoint {
  double lambda;
  double mean;    // N̂(λ)
  double stderr_; // standard error across samples
};

struct DosResult {
  std::vector<DosPoint> points;
  int used_samples = 0;
  std::vector<std::string> skipped;  // reasons for skipped samples
};

using OperatorBuilder = std::function<DiscretizedOperator(const RVector& potential)>;

/// Per sample: eigenvalue count below λ divided by L^d; Monte-Carlo mean and
/// standard error over the model's samples.
DosResult dos_estimate(const RandomModel& model, const OperatorBuilder& build,
                       const std::vector<double>& lambdas, const GridSpec& grid);

/// Pinned density-of-states / microlocal constant 1/(d(2π)^d).
double dos_constant(int d);

/// λ^{d/m} · dos_constant(d) · ∫_{|ξ|=1} ∫_{[0,1]^d} τ(σ_m(x,ξ)^{−d/m}) dx dξ.
double dos_prediction(const ClassicalSymbol& sigma, double lambda, const PredictorQuadrature& q = {});

/// λ^{d/m} · dos_constant(d) · ∫∫ τ(φ(x) q_0(x,ξ) σ_m(x,ξ)^{−d/m}) dx dξ.
double microlocal_prediction(const ClassicalSymbol& sigma_A, const ClassicalSymbol& Q, const Field& phi,
                             double lambda, const PredictorQuadrature& q = {});

}  // namespace psilab
