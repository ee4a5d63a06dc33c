#include "doctest.h"

#include <random>

#include "psilab/errors.hpp"
#include "psilab/elliptic.hpp"
#include "psilab/families.hpp"
#include "psilab/powers.hpp"
#include "support.hpp"

using namespace psilab;
using psilab::testing::max_abs;

namespace {

CMatrix diag2(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("matrix_power examples") {
  CHECK(std::abs(matrix_power(CMatrix::Constant(1, 1, 4.0), 0.5)(0, 0) - 2.0) < 1e-14);
  CHECK(max_abs(matrix_power(diag2(1, 4), -0.5) - diag2(1, 0.5)) < 1e-14);
  CHECK(max_abs(matrix_power(CMatrix::Identity(3, 3), cplx(0.7, -2.0)) - CMatrix::Identity(3, 3)) < 1e-14);
  CHECK_THROWS_AS(matrix_power(diag2(1, -1), 0.5), DomainError);
}

TEST_CASE("contour_power examples") {
  CHECK(std::abs(contour_power(CMatrix::Constant(1, 1, 1.0), -1.0)(0, 0) - 1.0) < 1e-6);
  CHECK(max_abs(contour_power(diag2(1, 4), -0.5) - diag2(1, 0.5)) < 1e-6);
  std::mt19937_64 rng(5);
  const CMatrix P = testing::random_spd(rng, 4, 50.0);
  const CMatrix prod = contour_power(P, -0.3) * contour_power(P, -0.7);
  CHECK((prod - P.inverse()).norm() / P.inverse().norm() < 1e-6);
  CHECK_THROWS_AS(contour_power(P, 0.5), DomainError);
}

TEST_CASE("property: contour power agrees with the spectral power") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(u(rng) * 6) % 6;
    const CMatrix P = testing::random_spd(rng, n, 1e4);
    const cplx z(-2.0 + 1.95 * u(rng), -1.0 + 2.0 * u(rng));
    const CMatrix ref = matrix_power(P, z);
    worst = std::max(worst, (contour_power(P, z) - ref).norm() / ref.norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("keyhole rule weights integrate lambda^z against 1/(lambda - mu)") {
  // (i/2π)∮ λ^z (λ − μ)^{-1}... reproduces μ^z for μ > 0 outside the keyhole
  const cplx z(-0.6, 0.3);
  const double mu = 3.0;
  const ContourRule rule = keyhole_rule(z, 0.5, 1e10, 512);
  cplx s = 0.0;
  for (std::size_t i = 0; i < rule.lambda.size(); ++i) s += rule.weight[i] / (mu - rule.lambda[i]);
  CHECK(std::abs(s - std::pow(cplx(mu), z)) < 1e-5);
}

TEST_CASE("power_symbol of a pure power") {
  const double m = 2.0;
  const ClassicalSymbol s = families::xi_power(2, m);
  for (cplx z : {cplx(-0.5), cplx(-1.3, 0.4), cplx(0.7)}) {
    const PowerSymbol p = power_symbol(s, z, 3);
    for (const auto& u : sphere_samples(2, 5)) {
      const std::vector<double> x{0.2, -0.4}, xi{2.0 * u[0], 2.0 * u[1]};
      CHECK(std::abs(p.component(0).value(x, xi)(0, 0) - std::pow(cplx(2.0), m * z)) < 1e-8);
      for (int j = 1; j < 3; ++j) CHECK(max_abs(p.component(j).value(x, xi)) < 1e-8);
    }
  }
}

TEST_CASE("property: symbol group law") {
  const int N = 3;
  const ClassicalSymbol s = families::random_elliptic_2x2(2, 2.0, 3, N + 1);
  const auto xs = space_samples(2, std::nullopt, 4);
  const auto us = sphere_samples(2, 6);
  for (const auto& [z, w] : std::vector<std::pair<cplx, cplx>>{{-0.5, -0.5}, {-1.3, 0.8}, {2.0, -2.0}}) {
    const ClassicalSymbol a = power_symbol(s, z, N).symbol;
    const ClassicalSymbol b = power_symbol(s, w, N).symbol;
    const ClassicalSymbol ab = power_symbol(s, z + w, N).symbol;
    CHECK(component_distance(compose_symbols(a, b, N), ab, N, xs, us) <= 1e-6);
  }
}

TEST_CASE("property: integer powers match composition and parametrix") {
  const int N = 3;
  const ClassicalSymbol s = families::random_elliptic_2x2(1, 1.0, 8, N);
  const auto xs = space_samples(1, std::nullopt, 8);
  const auto us = sphere_samples(1, 2);
  CHECK(component_distance(power_symbol(s, 2.0, N).symbol, compose_power(s, 2, N), N, xs, us) <= 1e-6);
  CHECK(component_distance(power_symbol(s, -1.0, N).symbol, parametrix(s, N), N, xs, us) <= 1e-6);
  CHECK(component_distance(power_symbol(s, 1.0, N).symbol, s, N, xs, us) <= 1e-6);
}

TEST_CASE("principal modulus power") {
  const std::vector<double> x{0.3}, xi{2.0};
  SUBCASE("unitary principal part") {
    CMatrix U(2, 2);
    U << 0.0, cplx(0, 1), 1.0, 0.0;
    const auto f = principal_modulus_power(families::xi_power(1, 1.5, U), cplx(0.4, 0.2));
    const cplx expect = std::pow(cplx(2.0), 1.5 * cplx(0.4, 0.2));
    CHECK(max_abs(f(x, xi) - expect * CMatrix::Identity(2, 2)) < 1e-12);
  }
  SUBCASE("Hermitian positive") {
    CMatrix P(2, 2);
    P << 2.0, cplx(0.5, 0.5), cplx(0.5, -0.5), 3.0;
    const auto f = principal_modulus_power(families::xi_power(1, 1.0, P), -0.7);
    CHECK(max_abs(f(x, xi) - matrix_power(2.0 * P, -0.7)) < 1e-12);
  }
  SUBCASE("z = 2 is the squared modulus") {
    const ClassicalSymbol s = families::random_elliptic_2x2(1, 1.0, 4);
    const CMatrix a = s.principal().value(x, xi);
    CHECK(max_abs(principal_modulus_power(s, 2.0)(x, xi) - a.adjoint() * a) < 1e-12);
  }
}
