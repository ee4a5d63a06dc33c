// Acceptance run: one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "property_binaries.hpp"
#include "psilab/config.hpp"
#include "psilab/experiments.hpp"
#include "psilab/families.hpp"
#include "psilab/linalg.hpp"
#include "psilab/predictors.hpp"
#include "psilab/quantize.hpp"
#include "psilab/spectral.hpp"

using namespace psilab;

namespace {

// Pinned tolerances.
constexpr double kBesselTol = 0.05;
constexpr double kBesselSeconds = 120.0;
constexpr double kEllipticTol = 0.07;
constexpr double kZetaTol = 0.03;
constexpr double kZetaSeconds = 300.0;
constexpr double kPowerTol = 1e-6;
constexpr double kParametrixTol = 1e-8;
constexpr double kParametrixDecay = 3.0;
constexpr double kCzTol = 0.10;
constexpr double kCzSeconds = 600.0;
constexpr double kFracTol = 0.10;
constexpr double kDixmierTol = 0.10;
constexpr double kDixmierDrift = 0.03;
constexpr double kMicrolocalTol = 0.05;
constexpr double kDosTol = 0.10;
constexpr double kDosScaling = 1.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ExperimentResult run(const std::string& text, double tolerance) {
  Config c = Config::parse_string(text, "acceptance");
  c.set("experiment.tolerance", fmt("%.17g", tolerance));
  return execute(load_experiment_config(c));
}

const Check* find_check(const ExperimentResult& r, const std::string& name) {
  for (const Check& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

Outcome bessel_weyl() {
  std::vector<double> errors;
  double last_seconds = 0.0;
  for (int n : {1024, 2048, 4096}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult r =
        run("[experiment]\nkind = weyl_bessel\n[grid]\nd = 1\nL = 4\nnpts = " + std::to_string(n) +
                "\n[operator]\norder = 1\nradius = 1\nmass = 1\n",
            kBesselTol);
    last_seconds = seconds_since(t0);
    errors.push_back(r.relative_error);
  }
  const bool monotone = errors[0] > errors[1] && errors[1] > errors[2];
  return {errors[2] <= kBesselTol && monotone && last_seconds <= kBesselSeconds,
          fmt("rel err %.2e/%.2e/%.2e at 1024/2048/4096, %.0f s at 4096", errors[0], errors[1], errors[2],
              last_seconds)};
}

Outcome elliptic_weyl() {
  const ExperimentResult r = run(
      "[experiment]\nkind = weyl_elliptic\n[grid]\nd = 1\nL = 4\nnpts = 4096\n[operator]\norder = 1\n"
      "principal = 1, 4\ncoupling = 0.5\ndirection = 1, 1\n",
      kEllipticTol);
  return {r.pass, fmt("predicted %.6g measured %.6g rel err %.2e", r.predicted, r.measured, r.relative_error)};
}

Outcome zeta_residue() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run(
      "[experiment]\nkind = zeta_residue\n[grid]\nd = 2\nL = 4\nlevels = 32, 64, 128\n[operator]\nprincipal = 1, 4\n",
      kZetaTol);
  const double s = seconds_since(t0);
  return {r.pass && s <= kZetaSeconds,
          fmt("pole %.6g operator %.6g worst pairwise %.2e, %.0f s", r.predicted, r.measured, r.relative_error, s)};
}

Outcome power_laws() {
  const ExperimentResult r =
      run("[experiment]\nkind = power_group_check\nseed = 7\n[analysis]\nmatrices = 100\n", kPowerTol);
  const Check* a = find_check(r, "contour_vs_spectral");
  const Check* b = find_check(r, "symbol_group_law");
  const Check* c = find_check(r, "power_minus_one_vs_parametrix");
  return {r.pass, fmt("contour %.1e, group law %.1e, inverse %.1e", a->value, b->value, c->value)};
}

Outcome parametrix_residual() {
  Config c = Config::parse_string(
      "[experiment]\nkind = parametrix_check\n[grid]\nnpts = 512\n[operator]\ncomponents = 3\n[analysis]\nbands = 4\n",
      "acceptance");
  c.set("analysis.symbolic_tolerance", fmt("%.17g", kParametrixTol));
  c.set("analysis.decay_factor", fmt("%.17g", kParametrixDecay));
  const ExperimentResult r = execute(load_experiment_config(c));
  const Check* s = find_check(r, "symbolic_residual");
  const Check* d = find_check(r, "min_decay_ratio");
  return {r.pass, fmt("symbolic residual %.1e, smallest decay ratio per doubling %.2f", s->value, d->value)};
}

Outcome cz_commutator() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run(
      "[experiment]\nkind = weyl_commutator_cz\n[grid]\nd = 2\nL = 4\nnpts = 64\n[operator]\naxis = 0\n"
      "width = 0.35\nradius = 1\ndiscretization = galerkin\n",
      kCzTol);
  const double s = seconds_since(t0);
  return {r.pass && s <= kCzSeconds,
          fmt("predicted %.6g measured %.6g rel err %.2e, %.0f s", r.predicted, r.measured, r.relative_error, s)};
}

Outcome frac_commutator() {
  const ExperimentResult r = run(
      "[experiment]\nkind = weyl_commutator_frac\n[grid]\nd = 1\nL = 4\nnpts = 4096\n[operator]\nalpha = 0.5\n",
      kFracTol);
  return {r.pass, fmt("predicted %.6g measured %.6g rel err %.2e", r.predicted, r.measured, r.relative_error)};
}

// M_g J^{-2} M_g on the torus of area 4π, g a positive periodic coefficient.
Outcome dixmier() {
  const double L = 2.0 * std::sqrt(kPi);
  const GridSpec grid(2, L, 64);
  const Field g = fields::constant(2, 1.0) + fields::cosine_mode(2, L, {1, 1}) * 0.3;
  const SymbolFn gf = [g](std::span<const double> x) { return g(x); };
  const DiscretizedOperator M = multiplication_op(gf, 1, grid);
  const DiscretizedOperator J = fourier_multiplier(multipliers::bessel(-2.0), 1, grid, -2.0);
  const SingularValueFunction svf = singular_value_function(product(product(M, J), M));
  const Box torus = Box::cube(2, 0.5 * L);
  const double predicted = dixmier_value(families::field_xi_power(g * g, -2.0).with_support(torus), torus).value;
  const double total = svf.total_weight();
  const double a = dixmier_log_average(svf, 0.2 * total);
  const double b = dixmier_log_average(svf, 0.3 * total);
  const double c = dixmier_log_average(svf, 0.4 * total);
  const double err = std::abs(b - predicted) / predicted;
  const double drift = (std::max({a, b, c}) - std::min({a, b, c})) / b;
  return {err <= kDixmierTol && drift <= kDixmierDrift,
          fmt("predicted %.6g measured %.6g rel err %.2e, drift %.2e", predicted, b, err, drift)};
}

Outcome microlocal() {
  const ExperimentResult r = run(
      "[experiment]\nkind = microlocal_count\n[grid]\nd = 2\nL = 4\nnpts = 32\n[operator]\nq_amplitude = 0.5\n",
      kMicrolocalTol);
  const Check* o = find_check(r, "lattice_oracle_gap");
  return {r.pass,
          fmt("predicted %.6g measured %.6g rel err %.2e, lattice oracle gap %.1e", r.predicted, r.measured,
              r.relative_error, o->value)};
}

Outcome dos() {
  Config c = Config::parse_string(
      "[experiment]\nkind = dos_random\nseed = 2024\n[grid]\nd = 1\nL = 32\nnpts = 256\n[model]\nlaw = rademacher\n"
      "samples = 64\n[analysis]\nscaling_samples = 16, 64, 256\n",
      "acceptance");
  c.set("experiment.tolerance", fmt("%.17g", kDosTol));
  c.set("analysis.scaling_factor", fmt("%.17g", kDosScaling));
  const ExperimentResult r = execute(load_experiment_config(c));
  const Check* s = find_check(r, "stderr_scaling_factor");
  return {r.pass, fmt("predicted %.6g measured %.6g rel err %.2e, stderr scaling off by factor %.3f", r.predicted,
                      r.measured, r.relative_error, s ? s->value : NAN)};
}

Outcome property_suites() {
  const std::vector<std::string> binaries = {PSILAB_PROPERTY_BINARIES};
  int failed = 0;
  for (const std::string& b : binaries) {
    const std::string cmd = b + " --test-case='property*,tauberian*' --minimal > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) ++failed;
  }
  return {failed == 0, fmt("%.0f of %.0f property suites failed", failed, static_cast<double>(binaries.size()))};
}

}  // namespace

int main(int, char** argv) {
  configure_blas(argv);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Bessel potential Weyl limit, d=1", bessel_weyl},
      {"Elliptic 2x2 Weyl limit with rank one projection, d=1", elliptic_weyl},
      {"Zeta residues, d=2", zeta_residue},
      {"Complex power laws", power_laws},
      {"Parametrix residual", parametrix_residual},
      {"Riesz commutator Weyl limit, d=2", cz_commutator},
      {"Fractional commutator Weyl limit, d=1", frac_commutator},
      {"Dixmier log average, d=2", dixmier},
      {"Microlocal counting, d=2", microlocal},
      {"Density of states, random potential, d=1", dos},
      {"Property suites", property_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
