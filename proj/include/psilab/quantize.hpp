#pragma once

#include <functional>
#include <string>
#include <vector>

#include "psilab/symbols.hpp"

namespace psilab {

/// Periodic grid on [−L/2, L/2)^d with Npts points per axis. Points are
/// x_l = −L/2 + l·L/Npts; frequencies ξ_k = 2πk/L, k ∈ {−Npts/2, …, Npts/2−1}.
/// Multi-indices are flattened row-major (axis 0 slowest).
struct GridSpec {
  int d = 1;
  double L = 1.0;
  int Npts = 2;

  GridSpec() = default;
  GridSpec(int d, double L, int Npts);

  std::size_t size() const;  // Npts^d
  double spacing() const { return L / Npts; }
  double dxi() const;
  std::vector<double> point(std::size_t index) const;
  std::vector<double> frequency(std::size_t index) const;
  /// Integer frequency labels k of a flattened frequency index.
  std::vector<int> frequency_label(std::size_t index) const;
  bool operator==(const GridSpec& o) const { return d == o.d && L == o.L && Npts == o.Npts; }
};

/// Dense block matrix of side Npts^d·n with per-index trace weights. Index
/// (space s, internal a) maps to s·n + a.
struct DiscretizedOperator {
  GridSpec grid;
  MatrixAlgebraSpec algebra;
  CMatrix matrix;
  std::vector<double> trace_weights;
  double order_hint = 0.0;
  bool hermitian = false;
  bool space_diagonal = false;  // block diagonal in the space index

  DiscretizedOperator() = default;
  DiscretizedOperator(GridSpec g, MatrixAlgebraSpec a, CMatrix m, double order = 0.0);

  Eigen::Index side() const { return matrix.rows(); }
  double total_weight() const;
  /// Sets the Hermitian flag after checking ‖A − A*‖ ≤ 1e−10‖A‖.
  DiscretizedOperator& mark_hermitian();
};

/// Matrix-valued Fourier multiplier stored as one n×n block per frequency
/// (flattened frequency index order). Structural counterpart of a dense
/// multiplier for grids where the dense matrix does not fit.
struct MultiplierOperator {
  GridSpec grid;
  int n = 1;
  std::vector<CMatrix> blocks;
  double order_hint = 0.0;

  DiscretizedOperator to_dense() const;
  /// (1/Npts^d) Σ_k blocks[k]: the common diagonal block of the dense matrix.
  CMatrix diagonal_block() const;
};

using SymbolFn = std::function<CMatrix(std::span<const double>)>;

/// Kohn–Nirenberg quantization A_{jl} = Npts^{−d} Σ_k σ(x_j, ξ_k) e^{iξ_k·(x_j − x_l)}.
DiscretizedOperator quantize(const ClassicalSymbol& sigma, const GridSpec& grid);

/// Checks that a support box lies in [−L/4, L/4]^d (margin L/4 to the torus edge).
void check_support(const std::optional<Box>& support, const GridSpec& grid);

MultiplierOperator multiplier_blocks(const SymbolFn& phi, int n, const GridSpec& grid,
                                     double order_hint = 0.0);
DiscretizedOperator fourier_multiplier(const SymbolFn& phi, int n, const GridSpec& grid,
                                       double order_hint = 0.0);
DiscretizedOperator multiplication_op(const SymbolFn& f, int n, const GridSpec& grid);

namespace multipliers {
/// (1 + |ξ|²)^{s/2}
SymbolFn bessel(double s);
/// |ξ|^s with the zero mode set to 0.
SymbolFn riesz_potential(double s);
/// ξ_j/|ξ| with the zero mode set to 0.
SymbolFn riesz_transform(int j);
}  // namespace multipliers

DiscretizedOperator product(const DiscretizedOperator& a, const DiscretizedOperator& b);
DiscretizedOperator sum(const DiscretizedOperator& a, const DiscretizedOperator& b, cplx cb = 1.0);
DiscretizedOperator adjoint(const DiscretizedOperator& a);
DiscretizedOperator commutator(const DiscretizedOperator& a, const DiscretizedOperator& b);

/// Binary format: 8-byte little-endian header length, UTF-8 JSON header,
/// then the matrix as row-major complex128.
void save_operator(const std::string& path, const DiscretizedOperator& op);
DiscretizedOperator load_operator(const std::string& path);

/// Discrete Fourier basis change: F A F^{-1} with F the unitary DFT on the
/// space index (internal index untouched). Rows and columns follow the
/// flattened frequency index order.
CMatrix to_frequency_basis(const DiscretizedOperator& a);

/// Inverse of to_frequency_basis: F^{-1} C F for a matrix given in the frequency basis.
CMatrix from_frequency_basis(const GridSpec& grid, int n, const CMatrix& c);

/// Multiplication by f compressed to the frequency band, in the frequency
/// basis: block (k, l) is the torus Fourier coefficient f̂(ξ_k − ξ_l), taken
/// from a doubled grid so that no difference aliases. Unlike the pointwise
/// multiplication_op it has no wrap-around coupling across the band edge.
CMatrix galerkin_multiplication_frequency(const SymbolFn& f, int n, const GridSpec& grid);

/// The same operator in the space basis.
DiscretizedOperator galerkin_multiplication_op(const SymbolFn& f, int n, const GridSpec& grid);

}  // namespace psilab
