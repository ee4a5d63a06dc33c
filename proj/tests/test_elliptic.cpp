#include "doctest.h"

#include "psilab/errors.hpp"
#include "psilab/elliptic.hpp"
#include "psilab/families.hpp"
#include "support.hpp"

using namespace psilab;
using psilab::testing::max_abs;

TEST_CASE("ellipticity certificates") {
  SUBCASE("scalar power") {
    const EllipticityReport r = check_ellipticity(families::xi_power(2, 2.0), 50, 20);
    CHECK(r.is_elliptic);
    CHECK(r.constant_C == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.modulus_bound_C2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("diagonal matrix") {
    CMatrix D = CMatrix::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = 2.0;
    const EllipticityReport r = check_ellipticity(families::xi_power(1, 1.0, D), 50, 20);
    CHECK(r.is_elliptic);
    CHECK(r.constant_C == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.modulus_bound_C2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("first coordinate of xi is not elliptic") {
    const ClassicalSymbol s = families::from_formulas(2, 1, 1.0, {[](const JetPoint& p) { return p.xi[0]; }});
    const EllipticityReport r = check_ellipticity(s, 64, 10);
    CHECK_FALSE(r.is_elliptic);
    REQUIRE(r.offending_u.size() == 2);
    CHECK(std::abs(r.offending_u[0]) < 1e-12);
  }
}

TEST_CASE("keyhole region") {
  const KeyholeSpec k(0.5);
  CHECK(k.contains(cplx(0.2, 0.1)));
  CHECK(k.contains(cplx(-10.0, 1.0)));
  CHECK_FALSE(k.contains(cplx(10.0, 0.0)));
  CHECK_FALSE(k.contains(cplx(-1.0, 3.0)));
}

TEST_CASE("parametrix examples") {
  SUBCASE("x independent power") {
    const ClassicalSymbol b = parametrix(families::xi_power(2, 2.0), 3);
    const std::vector<double> x{0.4, 0.1}, xi{1.5, -0.5};
    const double r2 = 1.5 * 1.5 + 0.25;
    CHECK(std::abs(b.component(0).value(x, xi)(0, 0) - 1.0 / r2) < 1e-14);
    CHECK(max_abs(b.component(1).value(x, xi)) < 1e-14);
    CHECK(max_abs(b.component(2).value(x, xi)) < 1e-14);
    const ClassicalSymbol c = compose_symbols(b, families::xi_power(2, 2.0), 3);
    CHECK(max_abs(c.component(1).value(x, xi)) == 0.0);
    CHECK(max_abs(c.component(2).value(x, xi)) == 0.0);
  }
  SUBCASE("a(x)|xi| recursion step") {
    const Field a = fields::constant(1, 1.5) + fields::cosine_mode(1, 6.0, {1}) * 0.5;
    const ClassicalSymbol b = parametrix(families::field_xi_power(a, 1.0), 2);
    for (double xv : {0.4, -1.2})
      for (double xiv : {1.7, -2.0}) {
        const std::vector<double> x{xv}, xi{xiv};
        const double av = 1.5 + 0.5 * std::cos(2 * kPi * xv / 6.0);
        const double da = -0.5 * (2 * kPi / 6.0) * std::sin(2 * kPi * xv / 6.0);
        const double sgn = xiv > 0 ? 1.0 : -1.0;
        // −a⁻¹|ξ|⁻¹ · ∂_ξ(a⁻¹|ξ|⁻¹) · D_x(a|ξ|) with D_x = −i∂_x
        const cplx expect = -(1.0 / (av * std::abs(xiv))) * (-sgn / (av * xiv * xiv)) * cplx(0.0, -da * std::abs(xiv));
        CHECK(std::abs(b.component(1).value(x, xi)(0, 0) - expect) < 1e-12);
      }
  }
  SUBCASE("random 2x2 residual") {
    const ClassicalSymbol s = families::random_elliptic_2x2(2, 1.0, 17, 3);
    const ClassicalSymbol c = compose_symbols(parametrix(s, 3), s, 3);
    for (const auto& x : space_samples(2, std::nullopt, 8))
      for (const auto& u : sphere_samples(2, 8)) {
        CHECK(max_abs(c.component(0).value(x, u) - CMatrix::Identity(2, 2)) < 1e-10);
        CHECK(max_abs(c.component(1).value(x, u)) < 1e-8);
        CHECK(max_abs(c.component(2).value(x, u)) < 1e-8);
      }
  }
}

TEST_CASE("property: parametrix is two sided") {
  for (unsigned seed : {31u, 32u}) {
    const ClassicalSymbol s = families::random_elliptic_2x2(1, 2.0, seed, 4);
    const ClassicalSymbol c = compose_symbols(s, parametrix(s, 4), 4);
    for (const auto& x : space_samples(1, std::nullopt, 8))
      for (const auto& u : sphere_samples(1, 2))
        for (int j = 1; j < 4; ++j) CHECK(max_abs(c.component(j).value(x, u)) < 1e-6);
  }
}

TEST_CASE("resolvent symbol examples") {
  const std::vector<double> x{0.0, 0.0}, xi{1.0, 0.0};
  const auto terms = resolvent_symbols(families::xi_power(2, 2.0), -1.0, 3);
  CHECK(std::abs(terms[0].eval(x, xi)(0, 0) - 0.5) < 1e-15);
  CHECK(max_abs(terms[1].eval(x, xi)) == 0.0);
  CHECK(max_abs(terms[2].eval(x, xi)) == 0.0);
  CHECK_THROWS_AS(resolvent_symbols(families::xi_power(2, 2.0), 1.0, 1)[0].eval(x, xi), SingularResolventError);
}

TEST_CASE("property: joint homogeneity of resolvent terms") {
  const ClassicalSymbol s = families::random_elliptic_2x2(2, 2.0, 41, 3);
  const double m = 2.0, t = 2.0;
  for (cplx lambda : {cplx(-1.0, 0.0), cplx(-3.0, 0.5), cplx(0.1, 0.2)}) {
    const auto base = resolvent_symbols(s, lambda, 3);
    const auto scaled = resolvent_symbols(s, lambda * std::pow(t, m), 3);
    for (const auto& x : space_samples(2, std::nullopt, 4))
      for (const auto& u : sphere_samples(2, 5)) {
        const std::vector<double> tu{t * u[0], t * u[1]};
        for (int j = 0; j < 3; ++j) {
          const CMatrix a = scaled[j].eval(x, tu);
          const CMatrix b = base[j].eval(x, u) * std::pow(t, -m - j);
          CHECK(max_abs(a - b) <= 1e-8 * std::max(1.0, max_abs(b)));
        }
      }
  }
}

// Joint homogeneity in (ξ, λ^{1/m}) forces the bound C(|ξ|^m + |λ|)^{-1}; a product of
// separate decay factors cannot hold as ξ and λ grow together.
TEST_CASE("property: resolvent norm decay") {
  const ClassicalSymbol s = families::random_elliptic_2x2(2, 2.0, 42, 2);
  const double C = check_ellipticity(s, 100, 50).constant_C;
  double worst = 0.0;
  for (double lam : {0.0, 0.5, 3.0, 20.0, 200.0}) {
    const auto terms = resolvent_symbols(s, -lam, 1);
    for (const auto& x : space_samples(2, std::nullopt, 6))
      for (const auto& u : sphere_samples(2, 12))
        for (double r : {1.0, 2.0, 7.0, 30.0}) {
          const std::vector<double> xi{r * u[0], r * u[1]};
          const double n = op_norm(terms[0].eval(x, xi));
          worst = std::max(worst, n * (r * r + lam));
        }
  }
  CHECK(worst <= 10.0 * C);
}

TEST_CASE("spectral bounds and shift") {
  const ClassicalSymbol s = families::random_elliptic_2x2(2, 2.0, 43, 2);
  const SpectralBounds b = principal_spectral_bounds(s, 64, 32);
  CHECK(b.positive);
  CHECK(b.floor > 0.0);
  CHECK(default_shift(b) == doctest::Approx(0.5 * b.floor));
  const ClassicalSymbol sh = shifted(s, 0.25);
  const std::vector<double> x{0.1, 0.3}, xi{0.0, 3.0};
  CHECK(max_abs(evaluate_symbol(sh, x, xi) - evaluate_symbol(s, x, xi) - 0.25 * CMatrix::Identity(2, 2)) < 1e-12);
}
