#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "psilab/quantize.hpp"

namespace psilab {

/// t ↦ μ(t) as a right-continuous step function: values sorted descending,
/// each carrying a positive weight.
class SingularValueFunction {
 public:
  SingularValueFunction() = default;
  SingularValueFunction(std::vector<double> values, std::vector<double> weights);
  SingularValueFunction(const RVector& values, double weight_each);

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_weight() const { return total_; }

  /// Value at the first index whose cumulative weight strictly exceeds t; 0 past the end.
  double mu(double t) const;
  /// Total weight of values strictly greater than s (the distribution function).
  double distribution(double s) const;
  /// ∫_0^T μ(t) dt, exact for the step function.
  double integral(double T) const;

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // cumulative_[i] = weight of the first i+1 values
  double total_ = 0.0;
};

/// Singular values of the block matrix, each weighted by the (uniform) trace weight.
SingularValueFunction singular_value_function(const DiscretizedOperator& a);

struct WeylEstimate {
  double limit = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double spread = 0.0;  // interquartile range of t^{m/d} μ(t) over the window
  std::vector<int> grids_used;
};

/// Default window (0.02, 0.15)·total weight.
std::pair<double, double> default_window(const SingularValueFunction& svf);

/// Median and IQR of t^{m/d} μ(t) over 200 log-spaced t in the window.
WeylEstimate weyl_limit(const SingularValueFunction& svf, double m, int d,
                        std::pair<double, double> window);

/// (1/log N) ∫_0^N μ(t) dt.
double dixmier_log_average(const SingularValueFunction& svf, double Nmax);

/// Tr(M_φ Q χ_{[0,λ]}(A)) for each λ, complex (the imaginary part is a
/// diagnostic). A must be flagged Hermitian.
std::vector<cplx> microlocal_counting_curve(const DiscretizedOperator& A, const DiscretizedOperator& Q,
                                            const SymbolFn& phi, const std::vector<double>& lambdas);
double microlocal_counting(const DiscretizedOperator& A, const DiscretizedOperator& Q,
                           const SymbolFn& phi, double lambda);

struct TauberianReport {
  std::vector<double> s_grid;
  std::vector<double> distribution_side;  // s^p · n(s)
  std::vector<double> quantile_side;      // t · μ(t)^p at t = n(s)
  double max_discrepancy = 0.0;
};

/// Compares s^p·n(s) with t·μ(t)^p, t = n(s), over the given s values.
TauberianReport tauberian_duality_check(const SingularValueFunction& svf, double p,
                                        const std::vector<double>& s_grid);

/// CSV rows (t, μ(t)) on `points` log-spaced t in (0, total weight).
void write_svf_csv(std::ostream& out, const SingularValueFunction& svf, int points = 200);

}  // namespace psilab
