#include "doctest.h"

#include "psilab/errors.hpp"
#include "psilab/families.hpp"
#include "psilab/predictors.hpp"
#include "psilab/quantize.hpp"
#include "psilab/spectral.hpp"
#include "support.hpp"

using namespace psilab;
using psilab::testing::max_abs;

namespace {

Field unit_mass_bump(int d, double radius) {
  const Field b = fields::radial_bump(d, radius);
  return b * (1.0 / testing::integrate(b, *b.support()));
}

SymbolFn xi_squared_plus_one() {
  return [](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return CMatrix::Constant(1, 1, 1.0 + r2).eval();
  };
}

}  // namespace

TEST_CASE("trace_abs_power") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 3.0;
  a(1, 0) = cplx(0, 4.0);
  CHECK(trace_abs_power(a, 2.0) == doctest::Approx(25.0));
  CHECK(trace_abs_power(a, 1.0) == doctest::Approx(7.0));
}

TEST_CASE("expected_weyl examples") {
  const ClassicalSymbol s = families::xi_power(1, -1.0);
  const Field f = unit_mass_bump(1, 1.0);
  const Prediction p = expected_weyl(s, f, 1.0, 1);
  CHECK(p.value == doctest::Approx(1.0 / kPi).epsilon(1e-6));
  CHECK_FALSE(p.precision_warning);
  CHECK(expected_weyl(s, f * 0.0, 1.0, 1).value == 0.0);
  const ClassicalSymbol s3 = families::xi_power(1, -1.0, CMatrix::Constant(1, 1, 3.0));
  CHECK(expected_weyl(s3, f, 1.0, 1).value == doctest::Approx(3.0 / kPi).epsilon(1e-6));
}

TEST_CASE("property: scaling covariance of expected_weyl") {
  for (const auto& [d, m] : std::vector<std::pair<int, double>>{{1, 1.0}, {2, 1.0}, {2, 2.0}}) {
    const ClassicalSymbol s = families::xi_power(d, -m);
    const double r = 0.5;
    const double big = expected_weyl(s, fields::radial_bump(d, 1.0), m, d).value;
    const double small = expected_weyl(s, fields::radial_bump(d, r), m, d).value;
    CHECK(small / big == doctest::Approx(std::pow(r, m)).epsilon(1e-6));
  }
}

TEST_CASE("expected_weyl_elliptic reduces to expected_weyl for scalar symbols") {
  const Field g = fields::radial_bump(1, 1.0);
  const Prediction a = expected_weyl_elliptic(families::xi_power(1, 1.0), g, CMatrix::Identity(1, 1));
  const Prediction b = expected_weyl(families::xi_power(1, -1.0), g * g, 1.0, 1);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
}

TEST_CASE("dixmier_value of |xi|^-d on a box") {
  const Box box = Box::cube(2, 0.5);
  const double v = dixmier_value(families::xi_power(2, -2.0), box).value;
  CHECK(v == doctest::Approx(2 * kPi / (2.0 * 4.0 * kPi * kPi)).epsilon(1e-10));
  CHECK_THROWS_AS(dixmier_value(families::xi_power(2, -1.0), box), DomainError);
}

TEST_CASE("CZ commutator operator examples") {
  const GridSpec g(2, 4.0, 8);
  SUBCASE("constant f gives zero") {
    const DiscretizedOperator c = cz_commutator_build(SphereFunction::riesz(2, 1), fields::constant(2, 1.7), g);
    CHECK(max_abs(c.matrix) < 1e-12);
  }
  SUBCASE("constant sphere function leaves the zero mode defect") {
    SphereFunction one{[](std::span<const double>) { return 1.0; },
                       [](std::span<const double> s) { return std::vector<double>(s.size(), 0.0); }};
    const DiscretizedOperator c = cz_commutator_build(one, fields::radial_bump(2, 1.0), g);
    const RVector sv = singular_values(c.matrix);
    CHECK(sv(2) < 1e-12 * std::max(1.0, sv(0)));
  }
  SUBCASE("Galerkin and collocation agree for a band limited multiplier") {
    const Field f = fields::cosine_mode(2, 4.0, {1, 0});
    const auto phi = SphereFunction::riesz(2, 0);
    const DiscretizedOperator a = cz_commutator_build(phi, f, g, Discretization::collocation);
    const DiscretizedOperator b = cz_commutator_build(phi, f, g, Discretization::galerkin);
    // the multiplier couples ξ to ξ ± 2π/L; only wrap-around pairs differ
    const CMatrix fa = to_frequency_basis(a), fb = to_frequency_basis(b);
    for (std::size_t k = 0; k < g.size(); ++k)
      for (std::size_t l = 0; l < g.size(); ++l) {
        const int dk = g.frequency_label(k)[0] - g.frequency_label(l)[0];
        if (std::abs(dk) <= 1) CHECK(std::abs(fa(k, l) - fb(k, l)) < 1e-12);
      }
  }
}

TEST_CASE("sphere function gradients") {
  const SphereFunction r = SphereFunction::riesz(3, 1);
  const SphereFunction fd = SphereFunction::from_values(r.value);
  const std::vector<double> s{0.6, 0.0, 0.8};
  const auto a = r.gradient(s), b = fd.gradient(s);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
  CHECK(a[0] == doctest::Approx(0.0));
  CHECK(a[1] == doctest::Approx(1.0));
}

TEST_CASE("expected_weyl_cz examples") {
  const SphereFunction phi = SphereFunction::riesz(2, 0);
  CHECK(expected_weyl_cz(phi, fields::constant(2, 2.0) * fields::radial_bump(2, 1.0) * 0.0, 2).value == 0.0);

  const Field f = fields::gaussian(2, 0.35) * fields::radial_bump(2, 1.0);
  const Prediction p = expected_weyl_cz(phi, f, 2);
  CHECK(p.refinement_gap <= 0.005);
  // integrand |D_j f − Σ_k s_j s_k D_k f| from an independent quadrature
  const Rule box = box_rule(*f.support(), 161);
  const Rule sph = sphere_rule(2, 128);
  double integral = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const JetPoint pt(box.nodes[i], std::vector<double>{1.0, 0.0}, 1);
    const Jet j = f.jet(pt);
    const double g0 = j.partial({1, 0, 0, 0})(0, 0).real(), g1 = j.partial({0, 1, 0, 0})(0, 0).real();
    for (std::size_t a = 0; a < sph.size(); ++a) {
      const auto& s = sph.nodes[a];
      const double v = g0 - s[0] * (s[0] * g0 + s[1] * g1);
      integral += box.weights[i] * sph.weights[a] * v * v;
    }
  }
  const double expect = std::sqrt(integral) / (2.0 * kPi * std::sqrt(2.0));
  CHECK(p.value == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("fractional commutator hypotheses and predictions") {
  CHECK_THROWS_AS(check_fractional_range(-1.5, 2), DomainError);
  CHECK_THROWS_AS(check_fractional_range(-3.0, 2), DomainError);
  CHECK_THROWS_AS(check_fractional_range(-0.5, 1), DomainError);
  CHECK_THROWS_AS(check_fractional_range(1.0, 1), DomainError);
  CHECK_THROWS_AS(check_fractional_range(0.0, 2), DomainError);
  CHECK_NOTHROW(check_fractional_range(-0.5, 2));
  CHECK_NOTHROW(check_fractional_range(0.5, 1));

  const GridSpec g(1, 4.0, 32);
  CHECK(max_abs(frac_commutator_build(0.5, fields::constant(1, 3.0), g).matrix) < 1e-12);
  CHECK(expected_weyl_frac(0.5, fields::radial_bump(1, 1.0) * 0.0, 1).value == 0.0);

  const Field f = fields::radial_bump(1, 1.0);
  const Prediction p = expected_weyl_frac(0.5, f, 1);
  CHECK(p.refinement_gap <= 0.005);
  // C_{1,1/2} = (1/2)(2π)^{-1/2}; exponent d/(1−α) = 2 and the sphere S⁰ = {±1}
  const Rule box = box_rule(*f.support(), 2049);
  double integral = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const JetPoint pt(box.nodes[i], std::vector<double>{1.0}, 1);
    const double df = f.jet(pt).partial({1, 0})(0, 0).real();
    integral += 2.0 * box.weights[i] * df * df;
  }
  CHECK(p.value == doctest::Approx(0.5 / std::sqrt(2.0 * kPi) * std::sqrt(integral)).epsilon(1e-6));
}

TEST_CASE("coupling laws and the random model") {
  CHECK(parse_coupling_law("rademacher") == CouplingLaw::rademacher);
  CHECK_THROWS_AS(parse_coupling_law("cauchy"), ConfigurationError);
  const GridSpec g(1, 8.0, 64);
  CHECK(lattice_side(g) == 8);
  CHECK_THROWS_AS(lattice_side(GridSpec(1, 7.5, 64)), ConfigurationError);
  CHECK_THROWS_AS(RandomModel(fields::radial_bump(1, 0.4), CouplingLaw::rademacher, 0, 1), ConfigurationError);

  const RandomModel model(fields::radial_bump(1, 0.4), CouplingLaw::rademacher, 4, 77);
  const auto e0 = model.couplings(g, 0);
  CHECK(e0 == model.couplings(g, 0));
  CHECK(e0 != model.couplings(g, 1));
  for (double e : e0) CHECK(std::abs(e) == 1.0);
  const RandomModel zero(fields::radial_bump(1, 0.4), CouplingLaw::deterministic, 2, 77);
  for (double e : zero.couplings(g, 0)) CHECK(e == 0.0);
}

TEST_CASE("property: random potential is equivariant under lattice shifts") {
  for (const GridSpec& g : {GridSpec(1, 8.0, 64), GridSpec(2, 4.0, 16)}) {
    const RandomModel model(fields::radial_bump(g.d, 0.45), CouplingLaw::uniform, 3, 5);
    const auto eps = model.couplings(g, 2);
    const int side = lattice_side(g), per = g.Npts / side;
    for (const std::vector<int>& k : g.d == 1 ? std::vector<std::vector<int>>{{1}, {3}}
                                              : std::vector<std::vector<int>>{{1, 0}, {2, 3}}) {
      const RVector v = model.potential(g, eps);
      const RVector w = model.potential(g, RandomModel::shift(g, eps, k));
      for (std::size_t j = 0; j < g.size(); ++j) {
        // w(x) = v(x + k)
        std::vector<int> lab(g.d);
        std::size_t rest = j, src = 0;
        for (int a = g.d - 1; a >= 0; --a) {
          lab[a] = static_cast<int>(rest % g.Npts);
          rest /= g.Npts;
        }
        for (int a = 0; a < g.d; ++a) src = src * g.Npts + (lab[a] + k[a] * per) % g.Npts;
        CHECK(std::abs(w(j) - v(src)) < 1e-14);
      }
    }
  }
}

TEST_CASE("density of states normalization is pinned by the lattice count") {
  CHECK(dos_constant(1) == doctest::Approx(1.0 / (2.0 * kPi)));
  CHECK(dos_constant(2) == doctest::Approx(1.0 / (8.0 * kPi * kPi)));
  // d=1, m=2: λ^{1/2}/π, which is the two sided lattice count #{k : ξ_k² ≤ λ}/L
  CHECK(dos_prediction(families::xi_power(1, 2.0), 100.0) == doctest::Approx(10.0 / kPi).epsilon(1e-12));
  const double L = 2000.0, lambda = 100.0;
  const double kmax = std::sqrt(lambda) * L / (2.0 * kPi);
  const double count = 2.0 * std::floor(kmax) + 1.0;
  CHECK(count / L == doctest::Approx(std::sqrt(lambda) / kPi).epsilon(1e-3));
  // free operator in d=2: λ·Vol(S¹)/(2(2π)²) = λ/(4π)
  CHECK(dos_prediction(families::xi_power(2, 2.0), 3.0) == doctest::Approx(3.0 / (4.0 * kPi)).epsilon(1e-10));
  CHECK(dos_prediction(families::xi_power(1, 2.0), 0.0) == 0.0);
}

TEST_CASE("dos_estimate examples") {
  const GridSpec g(1, 8.0, 64);
  DiscretizedOperator free_op = fourier_multiplier(xi_squared_plus_one(), 1, g, 2.0);
  const OperatorBuilder build = [&free_op](const RVector& v) {
    DiscretizedOperator op = free_op;
    for (Eigen::Index i = 0; i < v.size(); ++i) op.matrix(i, i) += v(i);
    op.mark_hermitian();
    return op;
  };
  const RandomModel det(fields::radial_bump(1, 0.4), CouplingLaw::deterministic, 3, 1);
  const std::vector<double> lambdas{0.5, 10.0, 100.0};
  const DosResult r = dos_estimate(det, build, lambdas, g);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    int count = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (xi_squared_plus_one()(g.frequency(k))(0, 0).real() <= lambdas[i]) ++count;
    CHECK(r.points[i].mean == doctest::Approx(count / g.L));
    CHECK(r.points[i].stderr_ == doctest::Approx(0.0));
  }
  CHECK(r.points[0].mean == 0.0);
}

TEST_CASE("microlocal prediction reduces to the density of states for Q = 1") {
  const Field phi = fields::radial_bump(2, 1.0);
  const ClassicalSymbol a = families::xi_power(2, 2.0);
  const ClassicalSymbol one = families::xi_power(2, 0.0);
  const double mass = testing::integrate(phi, *phi.support());
  CHECK(microlocal_prediction(a, one, phi, 5.0) == doctest::Approx(5.0 * mass / (4.0 * kPi)).epsilon(1e-6));
}
