#include "psilab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "psilab/elliptic.hpp"
#include "psilab/families.hpp"
#include "psilab/powers.hpp"
#include "psilab/quadrature.hpp"
#include "psilab/spectral.hpp"
#include "psilab/zeta.hpp"

namespace psilab {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::weyl_bessel, "weyl_bessel"},
      {ExperimentKind::weyl_elliptic, "weyl_elliptic"},
      {ExperimentKind::weyl_commutator_cz, "weyl_commutator_cz"},
      {ExperimentKind::weyl_commutator_frac, "weyl_commutator_frac"},
      {ExperimentKind::zeta_residue, "zeta_residue"},
      {ExperimentKind::parametrix_check, "parametrix_check"},
      {ExperimentKind::power_group_check, "power_group_check"},
      {ExperimentKind::microlocal_count, "microlocal_count"},
      {ExperimentKind::dos_random, "dos_random"},
  };
  return names;
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  std::string known;
  for (const auto& [k, n] : kind_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigurationError("unknown experiment '" + name + "' (" + known + ")");
}

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, n] : kind_names())
    if (k == kind) return n;
  return "unknown";
}

const std::string& theorem_anchor(ExperimentKind kind) {
  static const std::map<ExperimentKind, std::string> anchors = {
      {ExperimentKind::weyl_bessel, "Weyl law for operators compactly supported from the right"},
      {ExperimentKind::weyl_elliptic, "Weyl law for elliptic operators cut down by a tau-finite projection"},
      {ExperimentKind::weyl_commutator_cz, "Weyl asymptotics of Calderon-Zygmund commutators"},
      {ExperimentKind::weyl_commutator_frac, "Weyl asymptotics of fractional integral commutators"},
      {ExperimentKind::zeta_residue, "Right-most simple pole of the localized zeta function"},
      {ExperimentKind::parametrix_check, "Parametrix of an elliptic classical symbol"},
      {ExperimentKind::power_group_check, "Complex powers and the symbolic group law"},
      {ExperimentKind::microlocal_count, "Microlocal Weyl law"},
      {ExperimentKind::dos_random, "Density of states of ergodic random operators"},
  };
  return anchors.at(kind);
}

double default_tolerance(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::weyl_bessel: return 0.05;
    case ExperimentKind::weyl_elliptic: return 0.07;
    case ExperimentKind::weyl_commutator_cz: return 0.10;
    case ExperimentKind::weyl_commutator_frac: return 0.10;
    case ExperimentKind::zeta_residue: return 0.03;
    case ExperimentKind::parametrix_check: return 1e-8;
    case ExperimentKind::power_group_check: return 1e-6;
    case ExperimentKind::microlocal_count: return 0.05;
    case ExperimentKind::dos_random: return 0.10;
  }
  return 0.05;
}

// ---------------------------------------------------------------- config

namespace {

int read_positive_int(const Config& c, const std::string& field, long fallback, long lo = 1,
                      long hi = 1L << 30) {
  const long v = c.get_int(field, fallback);
  if (v < lo || v > hi)
    c.reject(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
  return static_cast<int>(v);
}

double read_positive(const Config& c, const std::string& field, double fallback) {
  const double v = c.get_double(field, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) c.reject(field, "must be a positive real");
  return v;
}

void read_grid(const Config& c, int& d, double& L, int& npts, int d_lo, int d_hi) {
  d = read_positive_int(c, "grid.d", d, d_lo, d_hi);
  L = read_positive(c, "grid.L", L);
  npts = read_positive_int(c, "grid.npts", npts, 2, 1 << 14);
  if ((npts & (npts - 1)) != 0) c.reject("grid.npts", "must be a power of two");
  const double side = std::pow(static_cast<double>(npts), d);
  if (side > 16384.0) c.reject("grid.npts", "dense side Npts^d exceeds 16384");
}

Window read_window(const Config& c, Window fallback) {
  const std::vector<double> w = c.get_doubles("analysis.window", {fallback.first, fallback.second});
  if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > w[0]) || w[1] > 0.5)
    c.reject("analysis.window", "expects two fractions 0 < lo < hi ≤ 0.5 of the total weight");
  return {w[0], w[1]};
}

std::vector<double> read_positive_list(const Config& c, const std::string& field, const std::vector<double>& fallback) {
  const std::vector<double> v = c.get_doubles(field, fallback);
  if (v.empty()) c.reject(field, "must not be empty");
  for (double x : v)
    if (!(x > 0.0)) c.reject(field, "entries must be positive");
  return v;
}

ExperimentParams read_params(const Config& c, ExperimentKind kind, std::uint64_t& seed) {
  (void)seed;
  switch (kind) {
    case ExperimentKind::weyl_bessel: {
      WeylBesselParams p;
      read_grid(c, p.d, p.L, p.npts, 1, 3);
      p.order = read_positive(c, "operator.order", p.order);
      p.radius = read_positive(c, "operator.radius", p.radius);
      p.mass = c.get_double("operator.mass", p.mass);
      if (p.mass < 0.0) c.reject("operator.mass", "must be nonnegative");
      p.window = read_window(c, p.window);
      return p;
    }
    case ExperimentKind::weyl_elliptic: {
      WeylEllipticParams p;
      read_grid(c, p.d, p.L, p.npts, 1, 2);
      p.order = read_positive(c, "operator.order", p.order);
      p.principal = read_positive_list(c, "operator.principal", p.principal);
      p.coupling = c.get_double("operator.coupling", p.coupling);
      p.direction = c.get_doubles("operator.direction", p.direction);
      if (p.direction.size() != p.principal.size())
        c.reject("operator.direction", "must have one entry per principal coefficient");
      double norm = 0.0;
      for (double v : p.direction) norm += v * v;
      if (!(norm > 0.0)) c.reject("operator.direction", "must be nonzero");
      p.radius = read_positive(c, "operator.radius", p.radius);
      p.window = read_window(c, p.window);
      return p;
    }
    case ExperimentKind::weyl_commutator_cz: {
      CzParams p;
      read_grid(c, p.d, p.L, p.npts, 2, 3);
      p.axis = read_positive_int(c, "operator.axis", p.axis, 0, p.d - 1);
      p.width = read_positive(c, "operator.width", p.width);
      p.radius = read_positive(c, "operator.radius", p.radius);
      try {
        p.discretization = parse_discretization(c.get_string("operator.discretization", "galerkin"));
      } catch (const ConfigurationError& e) {
        c.reject("operator.discretization", e.what());
      }
      p.window = read_window(c, p.window);
      return p;
    }
    case ExperimentKind::weyl_commutator_frac: {
      FracParams p;
      read_grid(c, p.d, p.L, p.npts, 1, 3);
      p.alpha = c.get_double("operator.alpha", p.alpha);
      try {
        check_fractional_range(p.alpha, p.d);
      } catch (const DomainError& e) {
        c.reject("operator.alpha", e.what());
      }
      p.radius = read_positive(c, "operator.radius", p.radius);
      try {
        p.discretization = parse_discretization(c.get_string("operator.discretization", "collocation"));
      } catch (const ConfigurationError& e) {
        c.reject("operator.discretization", e.what());
      }
      p.window = read_window(c, p.window);
      return p;
    }
    case ExperimentKind::zeta_residue: {
      ZetaParams p;
      p.d = read_positive_int(c, "grid.d", p.d, 1, 3);
      p.L = read_positive(c, "grid.L", p.L);
      const std::vector<long> lv = c.get_ints("grid.levels", {32, 64, 128});
      if (lv.size() != 3) c.reject("grid.levels", "expects three grid sizes");
      p.levels.clear();
      for (long v : lv) {
        if (v < 4 || (v & (v - 1)) != 0) c.reject("grid.levels", "entries must be powers of two ≥ 4");
        p.levels.push_back(static_cast<int>(v));
      }
      p.principal = read_positive_list(c, "operator.principal", p.principal);
      p.radius = read_positive(c, "operator.radius", p.radius);
      p.offsets = read_positive_list(c, "analysis.offsets", p.offsets);
      if (p.offsets.size() < 4) c.reject("analysis.offsets", "needs at least four offsets");
      for (double o : p.offsets)
        if (o > 0.5) c.reject("analysis.offsets", "offsets must not exceed 0.5");
      return p;
    }
    case ExperimentKind::parametrix_check: {
      ParametrixParams p;
      p.L = read_positive(c, "grid.L", p.L);
      p.npts = read_positive_int(c, "grid.npts", p.npts, 16, 4096);
      if ((p.npts & (p.npts - 1)) != 0) c.reject("grid.npts", "must be a power of two");
      p.components = read_positive_int(c, "operator.components", p.components, 1, 6);
      p.amplitude = c.get_double("operator.amplitude", p.amplitude);
      if (!(std::abs(p.amplitude) < 1.5)) c.reject("operator.amplitude", "must satisfy |amplitude| < 1.5");
      p.lower = c.get_double("operator.lower", p.lower);
      p.bands = read_positive_int(c, "analysis.bands", p.bands, 2, 8);
      p.symbolic_tolerance = read_positive(c, "analysis.symbolic_tolerance", p.symbolic_tolerance);
      p.decay_factor = read_positive(c, "analysis.decay_factor", p.decay_factor);
      return p;
    }
    case ExperimentKind::power_group_check: {
      PowerGroupParams p;
      p.matrices = read_positive_int(c, "analysis.matrices", p.matrices, 1, 100000);
      p.max_dim = read_positive_int(c, "analysis.max_dim", p.max_dim, 1, 64);
      p.d = read_positive_int(c, "operator.d", p.d, 1, 3);
      p.order = read_positive(c, "operator.order", p.order);
      p.components = read_positive_int(c, "operator.components", p.components, 1, 5);
      return p;
    }
    case ExperimentKind::microlocal_count: {
      MicrolocalParams p;
      read_grid(c, p.d, p.L, p.npts, 1, 3);
      p.radius = read_positive(c, "operator.radius", p.radius);
      p.q_amplitude = c.get_double("operator.q_amplitude", p.q_amplitude);
      if (!(std::abs(p.q_amplitude) < 1.0)) c.reject("operator.q_amplitude", "must satisfy |q_amplitude| < 1");
      p.lambda_points = read_positive_int(c, "analysis.lambda_points", p.lambda_points, 2, 1000);
      p.band_fraction = read_positive(c, "analysis.band_fraction", p.band_fraction);
      if (p.band_fraction > 1.0) c.reject("analysis.band_fraction", "must not exceed 1");
      return p;
    }
    case ExperimentKind::dos_random: {
      DosParams p;
      read_grid(c, p.d, p.L, p.npts, 1, 3);
      try {
        p.law = parse_coupling_law(c.get_string("model.law", "rademacher"));
      } catch (const ConfigurationError& e) {
        c.reject("model.law", e.what());
      }
      p.samples = static_cast<int>(c.get_int("model.samples", p.samples));
      if (p.samples < 1) c.reject("model.samples", "sample count must be at least 1");
      p.amplitude = c.get_double("model.amplitude", p.amplitude);
      p.radius = read_positive(c, "model.radius", p.radius);
      if (p.radius * 2.0 > p.L) c.reject("model.radius", "profile must fit on the torus");
      p.lambda_points = read_positive_int(c, "analysis.lambda_points", p.lambda_points, 2, 1000);
      p.band_fraction = read_positive(c, "analysis.band_fraction", p.band_fraction);
      if (p.band_fraction > 1.0) c.reject("analysis.band_fraction", "must not exceed 1");
      for (long s : c.get_ints("analysis.scaling_samples", {})) {
        if (s < 2) c.reject("analysis.scaling_samples", "entries must be at least 2");
        p.scaling_samples.push_back(static_cast<int>(s));
      }
      p.scaling_factor = read_positive(c, "analysis.scaling_factor", p.scaling_factor);
      const long side = std::lround(p.L);
      if (std::abs(p.L - side) > 1e-12 || p.npts % side != 0)
        c.reject("grid.L", "torus side must be an integer dividing npts");
      return p;
    }
  }
  throw ConfigurationError("unhandled experiment kind");
}

}  // namespace

ExperimentConfig load_experiment_config(const Config& c) {
  ExperimentConfig cfg;
  const std::string kind = c.get_string("experiment.kind", "");
  if (kind.empty()) c.reject("experiment.kind", "missing experiment kind");
  try {
    cfg.kind = parse_experiment_kind(kind);
  } catch (const ConfigurationError& e) {
    c.reject("experiment.kind", e.what());
  }
  const long seed = c.get_int("experiment.seed", 1);
  if (seed < 0) c.reject("experiment.seed", "must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.tolerance = read_positive(c, "experiment.tolerance", default_tolerance(cfg.kind));
  cfg.output_dir = c.get_string("experiment.output", "out");
  cfg.params = read_params(c, cfg.kind, cfg.seed);
  c.check_all_used();
  cfg.resolved = c.resolved_text();
  return cfg;
}

// ---------------------------------------------------------------- output

void Table::write_csv(std::ostream& out) const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << quote(header[i]);
  out << "\r\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\r\n";
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double relative(double measured, double predicted) {
  if (predicted == 0.0) return std::abs(measured);
  return std::abs(measured - predicted) / std::abs(predicted);
}

Check make_check(std::string name, double value, double threshold, bool at_most = true) {
  Check c{std::move(name), value, threshold, at_most, false};
  c.pass = std::isfinite(value) && (at_most ? value <= threshold : value >= threshold);
  return c;
}

SymbolFn as_symbol_fn(const Field& f) {
  return [f](std::span<const double> x) { return f(x); };
}

// Bump scaled to ∫χ = mass (mass 0: peak value 1).
Field normalized_bump(int d, double radius, double mass) {
  Field chi = fields::radial_bump(d, radius);
  if (mass == 0.0) return chi;
  const Rule r = box_rule(*chi.support(), 257);
  double integral = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) integral += r.weights[i] * chi(r.nodes[i])(0, 0).real();
  return chi * (mass / integral);
}

void svf_series(Table& t, const SingularValueFunction& svf, double m, int d) {
  t.header = {"t", "mu", "scaled"};
  const double total = svf.total_weight();
  const int points = 200;
  for (int i = 0; i < points; ++i) {
    const double s = std::exp(std::log(0.5) + (std::log(0.999 * total) - std::log(0.5)) * i / (points - 1));
    const double mu = svf.mu(s);
    t.rows.push_back({s, mu, std::pow(s, m / d) * mu});
  }
}

void weyl_finish(ExperimentResult& r, const SingularValueFunction& svf, double m, int d, Window w,
                 const Prediction& pred) {
  const double total = svf.total_weight();
  const WeylEstimate est = weyl_limit(svf, m, d, {w.first * total, w.second * total});
  r.predicted = pred.value;
  r.measured = est.limit;
  r.relative_error = relative(est.limit, pred.value);
  r.checks.push_back(make_check("relative_error", r.relative_error, r.tolerance));
  if (pred.precision_warning)
    r.notes.push_back("prediction quadrature levels differ by " + fmt(pred.refinement_gap));
  r.notes.push_back("window spread (IQR) " + fmt(est.spread));
  svf_series(r.series, svf, m, d);
}

// ---------------------------------------------------------------- pipelines

void run_weyl_bessel(const WeylBesselParams& p, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const Field chi = normalized_bump(p.d, p.radius, p.mass);
  check_support(chi.support(), grid);
  const DiscretizedOperator M = multiplication_op(as_symbol_fn(chi), 1, grid);
  const DiscretizedOperator J = fourier_multiplier(multipliers::bessel(-p.order), 1, grid, -p.order);
  const SingularValueFunction svf = singular_value_function(product(M, J));
  const Prediction pred = expected_weyl(families::bessel(p.d, -p.order, 1), chi, p.order, p.d);
  weyl_finish(r, svf, p.order, p.d, p.window, pred);
}

void run_weyl_elliptic(const WeylEllipticParams& p, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const int n = static_cast<int>(p.principal.size());
  CMatrix D = CMatrix::Zero(n, n), C = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = p.principal[i];
  for (int i = 0; i + 1 < n; ++i) {
    C(i, i + 1) = p.coupling;
    C(i + 1, i) = -p.coupling;
  }
  CVector v(n);
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm += p.direction[i] * p.direction[i];
  for (int i = 0; i < n; ++i) v(i) = p.direction[i] / std::sqrt(norm);
  const CMatrix proj = v * v.adjoint();
  // p = v v*: the nonzero singular values of M_{pg}|A|^{-1}M_{pg} are those of
  // M_g (v*|A|^{-1}v) M_g, the compression to the range of p.
  const double m = p.order;
  const SymbolFn k = [D, C, v, m](std::span<const double> xi) {
    double r2 = 0.0;
    for (double a : xi) r2 += a * a;
    const CMatrix B = D * std::pow(1.0 + r2, 0.5 * m) + C;
    const CMatrix H = B.adjoint() * B;
    return CMatrix(v.adjoint() * matrix_power(0.5 * (H + H.adjoint()), -0.5) * v);
  };
  const Field g = fields::radial_bump(p.d, p.radius);
  check_support(g.support(), grid);
  const DiscretizedOperator W = fourier_multiplier(k, 1, grid, -m);
  const DiscretizedOperator G = multiplication_op(as_symbol_fn(g), 1, grid);
  DiscretizedOperator T = product(product(G, W), G);
  const RVector s = singular_values(T.matrix);
  std::vector<double> values(s.data(), s.data() + s.size());
  values.resize(grid.size() * n, 0.0);
  const SingularValueFunction svf(values, std::vector<double>(values.size(), 1.0));
  const Prediction pred = expected_weyl_elliptic(families::xi_power(p.d, m, D), g, proj);
  weyl_finish(r, svf, m, p.d, p.window, pred);
}

void run_cz(const CzParams& p, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const Field f = fields::gaussian(p.d, p.width) * fields::radial_bump(p.d, p.radius);
  const SphereFunction phi = SphereFunction::riesz(p.d, p.axis);
  const SingularValueFunction svf = singular_value_function(cz_commutator_build(phi, f, grid, p.discretization));
  const Prediction pred = expected_weyl_cz(phi, f, p.d);
  weyl_finish(r, svf, 1.0, p.d, p.window, pred);
}

void run_frac(const FracParams& p, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const Field f = fields::radial_bump(p.d, p.radius);
  const SingularValueFunction svf =
      singular_value_function(frac_commutator_build(p.alpha, f, grid, p.discretization));
  const Prediction pred = expected_weyl_frac(p.alpha, f, p.d);
  weyl_finish(r, svf, 1.0 - p.alpha, p.d, p.window, pred);
}

void run_zeta(const ZetaParams& p, ExperimentResult& r) {
  const int n = static_cast<int>(p.principal.size());
  CMatrix P = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, i) = p.principal[i];
  const double m = 2.0, pole = p.d / m;
  const ClassicalSymbol sigma =
      add_symbols(families::xi_power(p.d, m, P), families::xi_power(p.d, 0.0, CMatrix::Identity(n, n)));
  const Field phi = fields::radial_bump(p.d, p.radius);
  const SymbolFn phi_fn = as_symbol_fn(phi);
  const SymbolFn a_fn = [P, n](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return CMatrix(CMatrix::Identity(n, n) + P * r2);
  };
  std::vector<cplx> zs;
  for (double o : p.offsets) zs.push_back(pole + o);

  std::vector<double> K;
  std::vector<std::vector<cplx>> band;
  for (int npts : p.levels) {
    const GridSpec grid(p.d, p.L, npts);
    check_support(phi.support(), grid);
    band.push_back(operator_zeta(multiplier_blocks(a_fn, n, grid, m), phi_fn, zs));
    K.push_back(kPi * npts / p.L);
  }
  ZetaSample op{zs, {}, pole}, sym{zs, {}, pole};
  for (std::size_t i = 0; i < zs.size(); ++i) {
    std::vector<cplx> levels;
    for (const auto& b : band) levels.push_back(b[i]);
    op.values.push_back(band_extrapolate(K, levels, {double(p.d) - m * zs[i], double(p.d) - 1.0 - m * zs[i]}));
    sym.values.push_back(symbolic_zeta(sigma, phi, zs[i]));
  }
  const ResidueFit fop = extrapolate_residue(op);
  const ResidueFit fsym = extrapolate_residue(sym);
  const cplx exact = residue_at_pole(sigma, phi);
  r.predicted = exact.real();
  r.measured = fop.residue.real();
  const double e1 = relative(fop.residue.real(), exact.real());
  const double e2 = relative(fsym.residue.real(), exact.real());
  const double e3 = relative(fop.residue.real(), fsym.residue.real());
  r.relative_error = std::max({e1, e2, e3});
  r.checks.push_back(make_check("operator_vs_pole", e1, r.tolerance));
  r.checks.push_back(make_check("symbolic_vs_pole", e2, r.tolerance));
  r.checks.push_back(make_check("operator_vs_symbolic", e3, r.tolerance));
  r.notes.push_back("symbolic residue " + fmt(fsym.residue.real()));
  r.notes.push_back("fit residuals " + fmt(fop.fit_residual) + ", " + fmt(fsym.fit_residual));
  r.series.header = {"re_z", "operator_zeta", "symbolic_zeta"};
  for (std::size_t i = 0; i < zs.size(); ++i)
    r.series.rows.push_back({zs[i].real(), op.values[i].real(), sym.values[i].real()});
}

ClassicalSymbol parametrix_test_symbol(const ParametrixParams& p) {
  const Field a = fields::constant(1, 1.5) + fields::cosine_mode(1, p.L, {1}) * p.amplitude;
  const Field b = fields::cosine_mode(1, p.L, {2}) * p.lower;
  return add_symbols(families::field_xi_power(a, 1.0), families::field_xi_power(b, 0.0));
}

void run_parametrix(const ParametrixParams& p, ExperimentResult& r) {
  const ClassicalSymbol sigma = parametrix_test_symbol(p);
  const int J = p.components;
  const ClassicalSymbol par = parametrix(sigma, J);
  const ClassicalSymbol comp = compose_symbols(par, sigma, J);
  const std::vector<std::vector<double>> xs = space_samples(1, Box::cube(1, 0.5 * p.L), 16);
  const std::vector<std::vector<double>> us = sphere_samples(1, 2);
  double symbolic = 0.0;
  for (int j = 0; j < J; ++j) {
    for (const auto& x : xs)
      for (const auto& u : us) {
        CMatrix v = comp.component(j).value(x, u);
        if (j == 0) v -= CMatrix::Identity(v.rows(), v.cols());
        symbolic = std::max(symbolic, v.cwiseAbs().maxCoeff());
      }
  }
  r.checks.push_back(make_check("symbolic_residual", symbolic, p.symbolic_tolerance));

  const GridSpec grid(1, p.L, p.npts);
  DiscretizedOperator R = product(quantize(par, grid), quantize(sigma, grid));
  R.matrix -= CMatrix::Identity(R.side(), R.side());
  const CMatrix F = to_frequency_basis(R);
  const double K = kPi * p.npts / p.L;
  std::vector<double> ceilings, norms;
  for (int i = p.bands; i >= 1; --i) {
    const double Kc = K / std::pow(2.0, i);
    std::vector<Eigen::Index> idx;
    for (std::size_t f = 0; f < grid.size(); ++f) {
      const double xi = std::abs(grid.frequency(f)[0]);
      if (xi >= 0.5 * Kc && xi <= Kc) idx.push_back(static_cast<Eigen::Index>(f));
    }
    CMatrix S(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) S(a, b) = F(idx[a], idx[b]);
    ceilings.push_back(Kc);
    norms.push_back(op_norm(S));
  }
  double min_ratio = INFINITY;
  r.series.header = {"band_ceiling", "residual_norm", "decay_ratio"};
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const double ratio = i == 0 ? NAN : norms[i - 1] / norms[i];
    if (i > 0) min_ratio = std::min(min_ratio, ratio);
    r.series.rows.push_back({ceilings[i], norms[i], ratio});
  }
  r.checks.push_back(make_check("min_decay_ratio", min_ratio, p.decay_factor, false));
  r.predicted = std::pow(2.0, J);
  r.measured = min_ratio;
  r.relative_error = relative(min_ratio, r.predicted);
  r.notes.push_back("symbolic residual " + fmt(symbolic));
}

void run_power_group(const PowerGroupParams& p, std::uint64_t seed, ExperimentResult& r) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_matrix = 0.0;
  r.series.header = {"test", "index", "residual"};
  for (int t = 0; t < p.matrices; ++t) {
    const int n = 1 + static_cast<int>(unif(rng) * p.max_dim) % p.max_dim;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
    const CMatrix P = a * a.adjoint() / n + 0.05 * CMatrix::Identity(n, n);
    const cplx z(-1.5 + 1.4 * unif(rng), -1.0 + 2.0 * unif(rng));
    const CMatrix ref = matrix_power(P, z);
    const double e = (contour_power(P, z) - ref).norm() / ref.norm();
    worst_matrix = std::max(worst_matrix, e);
    r.series.rows.push_back({0.0, static_cast<double>(t), e});
  }
  r.checks.push_back(make_check("contour_vs_spectral", worst_matrix, r.tolerance));

  const int N = p.components;
  const ClassicalSymbol sigma = families::random_elliptic_2x2(p.d, p.order, static_cast<unsigned>(seed), N + 1);
  const std::vector<std::vector<double>> xs = space_samples(p.d, std::nullopt, 6);
  const std::vector<std::vector<double>> us = sphere_samples(p.d, 6);
  const std::vector<std::pair<cplx, cplx>> pairs = {
      {cplx(-0.5), cplx(-0.5)}, {cplx(-1.3), cplx(0.8)}, {cplx(2.0), cplx(-2.0)}};
  double worst_group = 0.0;
  int index = 0;
  for (const auto& [z1, z2] : pairs) {
    const ClassicalSymbol a = power_symbol(sigma, z1, N).symbol;
    const ClassicalSymbol b = power_symbol(sigma, z2, N).symbol;
    const ClassicalSymbol ab = power_symbol(sigma, z1 + z2, N).symbol;
    const double e = component_distance(compose_symbols(a, b, N), ab, N, xs, us);
    worst_group = std::max(worst_group, e);
    r.series.rows.push_back({1.0, static_cast<double>(index++), e});
  }
  r.checks.push_back(make_check("symbol_group_law", worst_group, r.tolerance));

  const double e_inv =
      component_distance(power_symbol(sigma, -1.0, N).symbol, parametrix(sigma, N), N, xs, us);
  r.series.rows.push_back({2.0, 0.0, e_inv});
  r.checks.push_back(make_check("power_minus_one_vs_parametrix", e_inv, r.tolerance));
  r.predicted = 0.0;
  r.measured = std::max({worst_matrix, worst_group, e_inv});
  r.relative_error = r.measured;
  r.notes.push_back("series test codes: 0 matrix power, 1 group law, 2 inverse power");
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return v;
}

void run_microlocal(const MicrolocalParams& p, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const Field phi = fields::radial_bump(p.d, p.radius);
  check_support(phi.support(), grid);
  const double L = p.L;
  const Field q = fields::cosine_mode(p.d, L, std::vector<int>(p.d, 1)) * p.q_amplitude;
  const ClassicalSymbol Qsym = families::from_formulas(
      p.d, 1, 0.0, {[q](const JetPoint& pt) {
        return pt.constant(1.0) + q.jet(pt) * pt.xi[0] * pt.xi[0] * reciprocal(pt.xi_norm2());
      }});
  const SymbolFn a_fn = [](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return CMatrix(CMatrix::Constant(1, 1, 1.0 + r2));
  };
  DiscretizedOperator A = fourier_multiplier(a_fn, 1, grid, 2.0);
  A.mark_hermitian();
  const DiscretizedOperator Q = quantize(Qsym, grid);
  const double K = kPi * p.npts / p.L;
  const double lmax = p.band_fraction * K * K;
  const std::vector<double> lambdas = log_spaced(0.1 * lmax, lmax, p.lambda_points);
  const std::vector<cplx> counts = microlocal_counting_curve(A, Q, as_symbol_fn(phi), lambdas);

  // lattice oracle: Q e_k = q(·, ξ_k) e_k, so the trace is a lattice sum
  std::vector<double> mean_phi_q(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::vector<double> xi = grid.frequency(k);
    double s = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const std::vector<double> x = grid.point(j);
      s += phi(x)(0, 0).real() * evaluate_symbol(Qsym, x, xi)(0, 0).real();
    }
    mean_phi_q[k] = s / static_cast<double>(grid.size());
  }
  const ClassicalSymbol Asym = families::xi_power(p.d, 2.0);
  const double constant = microlocal_prediction(Asym, Qsym, phi, 1.0);
  double oracle_gap = 0.0, mean = 0.0, worst = 0.0;
  r.series.header = {"lambda", "measured", "lattice_oracle", "predicted"};
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    double oracle = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const std::vector<double> xi = grid.frequency(k);
      double r2 = 0.0;
      for (double v : xi) r2 += v * v;
      if (1.0 + r2 <= lambdas[i]) oracle += mean_phi_q[k];
    }
    const double measured = counts[i].real();
    oracle_gap = std::max(oracle_gap, std::abs(measured - oracle) / std::max(1.0, std::abs(oracle)));
    const double scaled = measured / std::pow(lambdas[i], p.d / 2.0);
    mean += scaled / lambdas.size();
    worst = std::max(worst, relative(scaled, constant));
    r.series.rows.push_back({lambdas[i], measured, oracle, constant * std::pow(lambdas[i], p.d / 2.0)});
  }
  r.predicted = constant;
  r.measured = mean;
  r.relative_error = relative(mean, constant);
  r.checks.push_back(make_check("relative_error", r.relative_error, r.tolerance));
  r.checks.push_back(make_check("lattice_oracle_gap", oracle_gap, 1e-8));
  r.notes.push_back("largest pointwise deviation over the decade " + fmt(worst));
}

DosResult dos_run(const DosParams& p, const GridSpec& grid, int samples, std::uint64_t seed,
                  const std::vector<double>& lambdas) {
  const Field v0 = fields::radial_bump(p.d, p.radius) * p.amplitude;
  const RandomModel model(v0, p.law, samples, seed);
  const SymbolFn a_fn = [](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return CMatrix(CMatrix::Constant(1, 1, 1.0 + r2));
  };
  const DiscretizedOperator free_op = fourier_multiplier(a_fn, 1, grid, 2.0);
  const OperatorBuilder build = [&free_op](const RVector& v) {
    DiscretizedOperator op = free_op;
    for (Eigen::Index i = 0; i < v.size(); ++i) op.matrix(i, i) += v(i);
    op.mark_hermitian();
    return op;
  };
  return dos_estimate(model, build, lambdas, grid);
}

void run_dos(const DosParams& p, std::uint64_t seed, ExperimentResult& r) {
  const GridSpec grid(p.d, p.L, p.npts);
  const double K = kPi * p.npts / p.L;
  const double lmax = p.band_fraction * K * K;
  const std::vector<double> lambdas = log_spaced(0.1 * lmax, lmax, p.lambda_points);
  const DosResult res = dos_run(p, grid, p.samples, seed, lambdas);
  for (const std::string& s : res.skipped) r.notes.push_back("skipped " + s);
  const ClassicalSymbol sigma = families::xi_power(p.d, 2.0);
  const double constant = dos_prediction(sigma, 1.0);
  double mean = 0.0;
  r.series.header = {"lambda", "mean", "stderr", "predicted"};
  for (const DosPoint& pt : res.points) {
    mean += pt.mean / std::pow(pt.lambda, p.d / 2.0) / res.points.size();
    r.series.rows.push_back({pt.lambda, pt.mean, pt.stderr_, constant * std::pow(pt.lambda, p.d / 2.0)});
  }
  r.predicted = constant;
  r.measured = mean;
  r.relative_error = relative(mean, constant);
  r.checks.push_back(make_check("relative_error", r.relative_error, r.tolerance));
  if (p.scaling_samples.size() >= 2) {
    std::vector<double> se;
    for (int S : p.scaling_samples) {
      const DosResult d = dos_run(p, grid, S, seed, lambdas);
      double s = 0.0;
      for (const DosPoint& pt : d.points) s += pt.stderr_ / d.points.size();
      se.push_back(s);
    }
    double worst = 1.0;
    for (std::size_t i = 0; i + 1 < se.size(); ++i) {
      const double expected = std::sqrt(static_cast<double>(p.scaling_samples[i + 1]) / p.scaling_samples[i]);
      const double ratio = (se[i] / se[i + 1]) / expected;
      worst = std::max({worst, ratio, 1.0 / ratio});
      r.notes.push_back("stderr S=" + std::to_string(p.scaling_samples[i]) + ": " + fmt(se[i]));
    }
    r.notes.push_back("stderr S=" + std::to_string(p.scaling_samples.back()) + ": " + fmt(se.back()));
    r.checks.push_back(make_check("stderr_scaling_factor", worst, p.scaling_factor));
  }
}

}  // namespace

ExperimentResult execute(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.kind = config.kind;
  r.tolerance = config.tolerance;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, WeylBesselParams>) run_weyl_bessel(p, r);
        else if constexpr (std::is_same_v<P, WeylEllipticParams>) run_weyl_elliptic(p, r);
        else if constexpr (std::is_same_v<P, CzParams>) run_cz(p, r);
        else if constexpr (std::is_same_v<P, FracParams>) run_frac(p, r);
        else if constexpr (std::is_same_v<P, ZetaParams>) run_zeta(p, r);
        else if constexpr (std::is_same_v<P, ParametrixParams>) run_parametrix(p, r);
        else if constexpr (std::is_same_v<P, PowerGroupParams>) run_power_group(p, config.seed, r);
        else if constexpr (std::is_same_v<P, MicrolocalParams>) run_microlocal(p, r);
        else run_dos(p, config.seed, r);
      },
      config.params);
  r.pass = !r.checks.empty();
  for (const Check& c : r.checks) r.pass = r.pass && c.pass;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& r) {
  nlohmann::ordered_json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  j["experiment"] = to_string(r.kind);
  j["anchor"] = theorem_anchor(r.kind);
  j["predicted"] = num(r.predicted);
  j["measured"] = num(r.measured);
  j["relative_error"] = num(r.relative_error);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["seed"] = config.seed;
  j["wall_time_s"] = r.wall_seconds;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const Check& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"value", num(c.value)},
                      {"threshold", c.threshold},
                      {"relation", c.at_most ? "<=" : ">="},
                      {"pass", c.pass}});
  j["checks"] = checks;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& r) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  r.series.write_csv(csv);
  write_text(dir / "results.csv", csv.str());
  write_text(dir / "summary.json", summary_json(config, r));
  write_text(dir / "manifest.ini", config.resolved);
}

void write_error(const std::string& output_dir, const std::string& kind, const std::string& message) {
  if (output_dir.empty()) return;
  try {
    std::filesystem::create_directories(output_dir);
    nlohmann::ordered_json j;
    j["experiment"] = kind;
    j["pass"] = false;
    j["error"] = message;
    write_text(std::filesystem::path(output_dir) / "summary.json", j.dump(2) + "\n");
  } catch (const std::exception&) {
    // the error is still reported through the exit status
  }
}

}  // namespace

ExitReport run_experiment(const ExperimentConfig& config) {
  ExitReport report;
  try {
    ExperimentResult r = execute(config);
    write_outputs(config, r);
    report.status = r.pass ? 0 : 2;
    std::ostringstream msg;
    msg.precision(6);
    msg << to_string(r.kind) << ": predicted " << r.predicted << ", measured " << r.measured << ", relative error "
        << r.relative_error << (r.pass ? " (pass)" : " (FAIL)");
    report.message = msg.str();
    report.results.push_back(std::move(r));
  } catch (const std::exception& e) {
    report.status = 1;
    report.message = to_string(config.kind) + ": " + e.what();
    write_error(config.output_dir, to_string(config.kind), e.what());
  }
  return report;
}

namespace {

Config load_with_overrides(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  Config c = Config::parse_file(path);
  for (const auto& [field, value] : overrides) c.set(field, value);
  return c;
}

}  // namespace

ExitReport run_config_file(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  try {
    const Config c = load_with_overrides(path, overrides);
    return run_experiment(load_experiment_config(c));
  } catch (const std::exception& e) {
    ExitReport report;
    report.status = 1;
    report.message = e.what();
    return report;
  }
}

ExitReport sweep(const std::string& path, const std::string& parameter, const std::vector<std::string>& values,
                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExitReport report;
  try {
    if (values.empty()) throw ConfigurationError("sweep: no values given for '" + parameter + "'");
    const Config base = load_with_overrides(path, overrides);
    Table table;
    table.header = {"value_index", "predicted", "measured", "relative_error", "pass"};
    std::string base_dir;
    std::vector<ExperimentConfig> configs;
    for (const std::string& v : values) {
      Config c = base;
      c.set(parameter, v);
      configs.push_back(load_experiment_config(c));
    }
    base_dir = configs.front().output_dir;
    std::ostringstream msg;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      ExperimentConfig cfg = configs[i];
      cfg.output_dir = (std::filesystem::path(base_dir) / (parameter + "=" + values[i])).string();
      ExitReport one = run_experiment(cfg);
      msg << (i ? "\n" : "") << parameter << "=" << values[i] << ": " << one.message;
      report.status = std::max(report.status == 1 ? 1 : report.status, one.status == 1 ? 1 : std::max(report.status, one.status));
      if (one.status == 1) report.status = 1;
      for (ExperimentResult& r : one.results) {
        table.rows.push_back({static_cast<double>(i), r.predicted, r.measured, r.relative_error, r.pass ? 1.0 : 0.0});
        report.results.push_back(std::move(r));
      }
    }
    std::filesystem::create_directories(base_dir);
    std::ostringstream csv;
    csv << "# " << parameter << " values: ";
    for (std::size_t i = 0; i < values.size(); ++i) csv << (i ? ";" : "") << values[i];
    csv << "\r\n";
    table.write_csv(csv);
    write_text(std::filesystem::path(base_dir) / "sweep.csv", csv.str());
    report.message = msg.str();
  } catch (const std::exception& e) {
    report.status = 1;
    report.message = e.what();
  }
  return report;
}

}  // namespace psilab
