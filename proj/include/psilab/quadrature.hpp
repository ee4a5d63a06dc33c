#pragma once

#include <vector>

#include "psilab/field.hpp"

namespace psilab {

/// Nodes and weights of a quadrature rule in some R^k.
struct Rule {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss–Legendre rule on [a, b] (Golub–Welsch).
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss–Legendre: `panels` equal panels of `per_panel` nodes.
Rule1D composite_gauss_legendre(int panels, int per_panel, double a, double b);

/// Surface measure of the unit sphere S^{d−1} (2 for d = 1).
double sphere_measure(int d);

/// Quadrature on S^{d−1} with weights summing to its measure. d = 1: the two
/// points ±1. d = 2: `points` equally spaced angles. d = 3: Lebedev rules with
/// points ∈ {26, 50, 86}.
Rule sphere_rule(int d, int points);

/// Tensor trapezoid rule on a box with `per_axis` nodes per axis including the
/// end points. Exact to all orders for smooth integrands vanishing with all
/// derivatives at the boundary.
Rule box_rule(const Box& box, int per_axis);

}  // namespace psilab
