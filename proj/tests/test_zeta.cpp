#include "doctest.h"

#include "psilab/errors.hpp"
#include "psilab/families.hpp"
#include "psilab/quantize.hpp"
#include "psilab/zeta.hpp"
#include "support.hpp"

using namespace psilab;

namespace {

// Bump on R^d scaled so that ∫|φ|² = 1.
Field unit_l2_bump(int d, double radius) {
  const Field b = fields::radial_bump(d, radius);
  const double n2 = testing::integrate(b * b, *b.support());
  return b * (1.0 / std::sqrt(n2));
}

std::vector<cplx> offsets(double pole) {
  std::vector<cplx> z;
  for (int i = 1; i <= 8; ++i) z.push_back(pole + 0.05 * i);
  return z;
}

ZetaSample symbolic_samples(const ClassicalSymbol& s, const Field& phi, double pole) {
  ZetaSample out{offsets(pole), {}, pole};
  for (cplx z : out.z_values) out.values.push_back(symbolic_zeta(s, phi, z));
  return out;
}

SymbolFn as_fn(const Field& f) {
  return [f](std::span<const double> x) { return f(x); };
}

}  // namespace

TEST_CASE("residue at pole closed forms") {
  const Field phi = unit_l2_bump(2, 1.0);
  CHECK(residue_at_pole(families::xi_power(2, 2.0), phi).real() ==
        doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-6));
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 16.0;
  const Field phi2 = phi * CMatrix::Identity(2, 2);
  CHECK(residue_at_pole(families::xi_power(2, 2.0, D), phi2).real() ==
        doctest::Approx(17.0 / (64.0 * kPi)).epsilon(1e-6));
  CHECK(std::abs(residue_at_pole(families::xi_power(2, 2.0), phi * 0.0)) == 0.0);
}

TEST_CASE("symbolic zeta examples") {
  const Field phi = unit_l2_bump(2, 1.0);
  const ClassicalSymbol s = families::xi_power(2, 2.0);
  SUBCASE("pole behaviour") {
    const ResidueFit fit = extrapolate_residue(symbolic_samples(s, phi, 1.0));
    CHECK(fit.residue.real() == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-3));
  }
  SUBCASE("zero localizer") { CHECK(std::abs(symbolic_zeta(s, phi * 0.0, 1.3)) == 0.0); }
  SUBCASE("constant factor") {
    const double c = 2.5;
    const ClassicalSymbol sc = families::xi_power(2, 2.0, CMatrix::Constant(1, 1, c));
    for (cplx z : {cplx(1.2), cplx(1.5, 0.3)})
      CHECK(std::abs(symbolic_zeta(sc, phi, z) - std::pow(cplx(c), -z) * symbolic_zeta(s, phi, z)) <
            1e-12 * std::abs(symbolic_zeta(s, phi, z)));
  }
  SUBCASE("rejects z left of the pole") { CHECK_THROWS_AS(symbolic_zeta(s, phi, 0.9), DomainError); }
}

TEST_CASE("property: symbolic residue consistency and positivity") {
  const Field phi = unit_l2_bump(2, 1.0);
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 4.0;
  const ClassicalSymbol scalar = families::xi_power(2, 2.0);
  const ClassicalSymbol mat = add_symbols(families::xi_power(2, 2.0, D), families::xi_power(2, 0.0, CMatrix::Identity(2, 2)));
  const Field phi2 = phi * CMatrix::Identity(2, 2);
  for (const auto& [s, f] : std::vector<std::pair<ClassicalSymbol, Field>>{{scalar, phi}, {mat, phi2}}) {
    const ZetaSample sample = symbolic_samples(s, f, 1.0);
    for (cplx v : sample.values) {
      CHECK(v.real() > 0.0);
      CHECK(std::abs(v.imag()) <= 1e-10 * std::abs(v));
    }
    const cplx exact = residue_at_pole(s, f);
    CHECK(std::abs(extrapolate_residue(sample).residue - exact) <= 0.01 * std::abs(exact));
  }
}

TEST_CASE("extrapolate_residue on exact poles") {
  const double p = 1.0;
  ZetaSample pure{offsets(p), {}, p}, shifted{offsets(p), {}, p};
  for (cplx z : pure.z_values) {
    pure.values.push_back(1.0 / (z - p));
    shifted.values.push_back(1.0 / (z - p) + 7.0);
  }
  const ResidueFit a = extrapolate_residue(pure);
  CHECK(std::abs(a.residue - 1.0) < 1e-12);
  CHECK(a.fit_residual <= 1e-12);
  CHECK(std::abs(extrapolate_residue(shifted).residue - 1.0) < 1e-10);

  ZetaSample bad{{cplx(0.9)}, {cplx(1.0)}, p};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("band_extrapolate removes power corrections") {
  const std::vector<double> K{10.0, 20.0, 40.0};
  std::vector<cplx> v;
  for (double k : K) v.push_back(3.0 + 2.0 * std::pow(k, -0.5) - 0.7 * std::pow(k, -1.5));
  CHECK(std::abs(band_extrapolate(K, v, {cplx(-0.5), cplx(-1.5)}) - 3.0) < 1e-12);
}

TEST_CASE("operator zeta examples") {
  const GridSpec grid(1, 8.0, 64);
  const Field phi = fields::radial_bump(1, 1.0);
  SUBCASE("identity operator gives the localizer weight") {
    DiscretizedOperator I(grid, MatrixAlgebraSpec(1), CMatrix::Identity(64, 64));
    I.mark_hermitian();
    double w = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) w += std::norm(phi(grid.point(j))(0, 0));
    for (cplx z : {cplx(0.5), cplx(2.0, 1.0)}) CHECK(std::abs(operator_zeta(I, as_fn(phi), z) - w) < 1e-12 * w);
  }
  SUBCASE("zero localizer") {
    const DiscretizedOperator A = fourier_multiplier(multipliers::bessel(1.0), 1, grid, 1.0);
    CHECK(std::abs(operator_zeta(A, as_fn(phi * 0.0), 1.5)) == 0.0);
  }
  SUBCASE("dense and block paths agree with the lattice sum") {
    const SymbolFn a = multipliers::bessel(1.0);
    DiscretizedOperator A = fourier_multiplier(a, 1, grid, 1.0);
    A.mark_hermitian();
    double mean_phi2 = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) mean_phi2 += std::norm(phi(grid.point(j))(0, 0)) / grid.size();
    const std::vector<cplx> zs{1.3, cplx(1.6, 0.2)};
    const auto dense = operator_zeta(A, as_fn(phi), zs);
    const auto blocks = operator_zeta(multiplier_blocks(a, 1, grid, 1.0), as_fn(phi), zs);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      cplx lattice = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k)
        lattice += std::pow(cplx(a(grid.frequency(k))(0, 0).real()), -zs[i]) * mean_phi2;
      CHECK(std::abs(dense[i] - lattice) < 1e-10 * std::abs(lattice));
      CHECK(std::abs(blocks[i] - lattice) < 1e-10 * std::abs(lattice));
    }
  }
}

TEST_CASE("lattice zeta residue d=1 on a long torus") {
  const double L = 16.0;
  const Field phi = fields::radial_bump(1, 1.0);
  const ClassicalSymbol sigma = families::bessel(1, 1.0, 4);
  const std::vector<int> levels{4096, 8192, 16384};
  const std::vector<cplx> zs = offsets(1.0);
  std::vector<double> K;
  std::vector<std::vector<cplx>> band;
  for (int n : levels) {
    const GridSpec grid(1, L, n);
    band.push_back(operator_zeta(multiplier_blocks(multipliers::bessel(1.0), 1, grid, 1.0), as_fn(phi), zs));
    K.push_back(kPi * n / L);
  }
  ZetaSample sample{zs, {}, 1.0};
  for (std::size_t i = 0; i < zs.size(); ++i)
    sample.values.push_back(
        band_extrapolate(K, {band[0][i], band[1][i], band[2][i]}, {1.0 - zs[i], -zs[i]}));
  const cplx exact = residue_at_pole(sigma, phi);
  CHECK(std::abs(extrapolate_residue(sample).residue - exact) <= 0.02 * std::abs(exact));
}

TEST_CASE("lattice zeta residue d=2 matches the pole") {
  const double L = 4.0;
  const Field phi = fields::radial_bump(2, 1.0);
  const SymbolFn a = [](std::span<const double> xi) {
    return CMatrix::Constant(1, 1, 1.0 + xi[0] * xi[0] + xi[1] * xi[1]).eval();
  };
  const ClassicalSymbol sigma = add_symbols(families::xi_power(2, 2.0), families::xi_power(2, 0.0));
  const std::vector<cplx> zs = offsets(1.0);
  std::vector<double> K;
  std::vector<std::vector<cplx>> band;
  for (int n : {32, 64, 128}) {
    const GridSpec grid(2, L, n);
    band.push_back(operator_zeta(multiplier_blocks(a, 1, grid, 2.0), as_fn(phi), zs));
    K.push_back(kPi * n / L);
  }
  ZetaSample sample{zs, {}, 1.0};
  for (std::size_t i = 0; i < zs.size(); ++i)
    sample.values.push_back(
        band_extrapolate(K, {band[0][i], band[1][i], band[2][i]}, {2.0 - 2.0 * zs[i], 1.0 - 2.0 * zs[i]}));
  const cplx exact = residue_at_pole(sigma, phi);
  CHECK(std::abs(extrapolate_residue(sample).residue - exact) <= 0.02 * std::abs(exact));
}
