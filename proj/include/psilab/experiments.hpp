#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "psilab/config.hpp"
#include "psilab/predictors.hpp"

namespace psilab {

enum class ExperimentKind {
  weyl_bessel,
  weyl_elliptic,
  weyl_commutator_cz,
  weyl_commutator_frac,
  zeta_residue,
  parametrix_check,
  power_group_check,
  microlocal_count,
  dos_random,
};

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);
/// Name of the theorem an experiment tests, from a fixed registry.
const std::string& theorem_anchor(ExperimentKind kind);

using Window = std::pair<double, double>;

/// T = M_χ J^{−m}, χ a radial bump; Weyl limit of t^{m/d} μ(t).
struct WeylBesselParams {
  int d = 1;
  double L = 4.0;
  int npts = 1024;
  double order = 1.0;
  double radius = 1.0;
  double mass = 1.0;  // χ scaled to ∫χ = mass; 0 keeps peak value 1
  Window window{0.02, 0.15};
};

/// T = M_{pg}|A|^{−1}M_{pg}, A the multiplier D·(1+|ξ|²)^{m/2} + C with D
/// positive diagonal and C real antisymmetric, p the projection onto `direction`.
struct WeylEllipticParams {
  int d = 1;
  double L = 4.0;
  int npts = 1024;
  double order = 1.0;
  std::vector<double> principal{1.0, 4.0};
  double coupling = 0.5;
  std::vector<double> direction{1.0, 1.0};
  double radius = 1.0;
  Window window{0.02, 0.15};
};

/// [R_j, M_f] with f = Gaussian(width) × bump(radius).
struct CzParams {
  int d = 2;
  double L = 4.0;
  int npts = 32;
  int axis = 0;
  double width = 0.35;
  double radius = 1.0;
  Discretization discretization = Discretization::galerkin;
  Window window{0.0075, 0.0225};
};

/// [I^α, M_f] with f a radial bump.
struct FracParams {
  int d = 1;
  double L = 4.0;
  int npts = 1024;
  double alpha = 0.5;
  double radius = 1.0;
  Discretization discretization = Discretization::collocation;
  Window window{0.02, 0.15};
};

/// Localized zeta of A = I + P|ξ|² (P positive diagonal) with φ a bump.
struct ZetaParams {
  int d = 2;
  double L = 4.0;
  std::vector<int> levels{32, 64, 128};
  std::vector<double> principal{1.0, 4.0};
  double radius = 1.0;
  std::vector<double> offsets{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
};

/// σ = a(x)|ξ| + b(x), a = 1.5 + amplitude·cos(2πx/L), b = lower·cos(4πx/L).
struct ParametrixParams {
  double L = 2.0 * kPi;
  int npts = 512;
  int components = 3;
  double amplitude = 0.5;
  double lower = 0.3;
  int bands = 4;                  // band ceilings K/2, K/4, … (K the grid band)
  double symbolic_tolerance = 1e-8;
  double decay_factor = 3.0;      // required residual decrease per doubling
};

/// Matrix powers by contour vs spectral theorem, symbol group law, σ^{−1}.
struct PowerGroupParams {
  int matrices = 100;
  int max_dim = 6;
  int d = 2;
  double order = 2.0;
  int components = 3;
  double tolerance = 1e-6;
};

/// A = quantize(1 + |ξ|²), Q = quantize(1 + q(x) ξ_1²/|ξ|²), φ a bump.
struct MicrolocalParams {
  int d = 2;
  double L = 4.0;
  int npts = 32;
  double radius = 1.0;
  double q_amplitude = 0.5;
  int lambda_points = 10;
  double band_fraction = 0.25;  // λ_max = band_fraction·K², K the grid band
};

/// A = (1 + |ξ|²) + M_V, V(x, ε) = Σ_n V₀(x + n) ε_n, V₀ = amplitude·bump(radius).
struct DosParams {
  int d = 1;
  double L = 32.0;
  int npts = 256;
  CouplingLaw law = CouplingLaw::rademacher;
  int samples = 64;
  double amplitude = 2.0;
  double radius = 0.4;
  int lambda_points = 10;
  double band_fraction = 0.25;
  std::vector<int> scaling_samples;  // optional S values for the stderr scaling check
  double scaling_factor = 1.5;
};

using ExperimentParams = std::variant<WeylBesselParams, WeylEllipticParams, CzParams, FracParams, ZetaParams,
                                      ParametrixParams, PowerGroupParams, MicrolocalParams, DosParams>;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::weyl_bessel;
  std::uint64_t seed = 1;
  double tolerance = 0.05;
  std::string output_dir = "out";
  ExperimentParams params;
  std::string resolved;  // resolved INI text echoed into the manifest
};

/// Reads and validates an experiment description. Throws ConfigError with
/// the line and field of the problem; unknown fields are rejected.
ExperimentConfig load_experiment_config(const Config& config);

/// Default tolerance of each experiment.
double default_tolerance(ExperimentKind kind);

/// One pass/fail test inside an experiment.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool at_most = true;  // pass when value ≤ threshold, else value ≥ threshold
  bool pass = false;
};

/// Plot-ready data series.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// RFC 4180 CSV with 17 significant digits.
  void write_csv(std::ostream& out) const;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::weyl_bessel;
  double predicted = 0.0;
  double measured = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<Check> checks;
  Table series;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;
};

/// Runs the pipeline of the configured experiment. Throws on execution errors.
ExperimentResult execute(const ExperimentConfig& config);

struct ExitReport {
  int status = 0;  // 0 pass, 2 tolerance failure, 1 execution or configuration error
  std::string message;
  std::vector<ExperimentResult> results;
};

/// Executes and writes results.csv, summary.json and manifest.ini into the
/// output directory.
ExitReport run_experiment(const ExperimentConfig& config);

/// Loads the file, applies overrides ("section.key", value) and runs.
ExitReport run_config_file(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides);

/// Runs the configuration once per value of `parameter` ("section.key"),
/// each into <out>/<key>=<value>, and writes a combined sweep.csv.
ExitReport sweep(const std::string& path, const std::string& parameter, const std::vector<std::string>& values,
                 const std::vector<std::pair<std::string, std::string>>& overrides);

/// Serialized summary (the content of summary.json).
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace psilab
