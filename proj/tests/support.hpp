#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "psilab/field.hpp"
#include "psilab/linalg.hpp"
#include "psilab/quadrature.hpp"

namespace psilab::testing {

/// Max-entry distance of two matrices.
inline double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Hand-rolled generator for complex Gaussian matrices.
inline CMatrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline CMatrix random_unitary(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// SPD matrix with eigenvalues log-uniform in [1, cond].
inline CMatrix random_spd(std::mt19937_64& rng, int n, double cond) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CMatrix U = random_unitary(rng, n);
  RVector ev(n);
  for (int i = 0; i < n; ++i) ev(i) = std::pow(cond, u(rng));
  return U * ev.cast<cplx>().asDiagonal() * U.adjoint();
}

inline double integrate(const Field& f, const Box& box, int per_axis = 257) {
  const Rule r = box_rule(box, per_axis);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i])(0, 0).real();
  return s;
}

}  // namespace psilab::testing
