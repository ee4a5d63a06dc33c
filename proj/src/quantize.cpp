#include "psilab/quantize.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>

#include "json.hpp"

#include "psilab/errors.hpp"
#include "psilab/parallel.hpp"

namespace psilab {

GridSpec::GridSpec(int d_, double L_, int Npts_) : d(d_), L(L_), Npts(Npts_) {
  if (d < 1) throw ConfigurationError("GridSpec: d must be positive");
  if (!(L > 0.0)) throw ConfigurationError("GridSpec: L must be positive");
  if (Npts < 2 || (Npts & (Npts - 1)) != 0)
    throw ConfigurationError("GridSpec: Npts must be a power of two, got " + std::to_string(Npts));
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(Npts);
  return s;
}

double GridSpec::dxi() const { return 2.0 * kPi / L; }

std::vector<double> GridSpec::point(std::size_t index) const {
  std::vector<double> x(d);
  for (int a = d - 1; a >= 0; --a) {
    x[a] = -0.5 * L + static_cast<double>(index % Npts) * spacing();
    index /= Npts;
  }
  return x;
}

std::vector<int> GridSpec::frequency_label(std::size_t index) const {
  std::vector<int> k(d);
  for (int a = d - 1; a >= 0; --a) {
    k[a] = static_cast<int>(index % Npts) - Npts / 2;
    index /= Npts;
  }
  return k;
}

std::vector<double> GridSpec::frequency(std::size_t index) const {
  const std::vector<int> k = frequency_label(index);
  std::vector<double> xi(d);
  for (int a = 0; a < d; ++a) xi[a] = dxi() * k[a];
  return xi;
}

DiscretizedOperator::DiscretizedOperator(GridSpec g, MatrixAlgebraSpec a, CMatrix m, double order)
    : grid(g), algebra(a), matrix(std::move(m)), order_hint(order) {
  const Eigen::Index expect = static_cast<Eigen::Index>(grid.size()) * algebra.n;
  if (matrix.rows() != expect || matrix.cols() != expect)
    throw ConfigurationError("DiscretizedOperator: matrix side must be Npts^d·n = " +
                             std::to_string(expect));
  trace_weights.assign(expect, 1.0);
}

double DiscretizedOperator::total_weight() const {
  double s = 0.0;
  for (double w : trace_weights) s += w;
  return s;
}

DiscretizedOperator& DiscretizedOperator::mark_hermitian() {
  const double scale = matrix.cwiseAbs().maxCoeff();
  double defect = 0.0;
  const Eigen::Index n = matrix.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      defect = std::max(defect, std::abs(matrix(i, j) - std::conj(matrix(j, i))));
  if (defect > 1e-10 * std::max(scale, 1e-300))
    throw DomainError("DiscretizedOperator: matrix is not Hermitian (defect " +
                      std::to_string(defect / std::max(scale, 1e-300)) + ")");
  hermitian = true;
  return *this;
}

namespace {

// FFT index of a flattened frequency index: k ↦ k mod Npts per axis.
std::size_t fft_index(const GridSpec& g, std::size_t f) {
  const std::vector<int> k = g.frequency_label(f);
  std::size_t idx = 0;
  for (int a = 0; a < g.d; ++a) idx = idx * g.Npts + static_cast<std::size_t>((k[a] + g.Npts) % g.Npts);
  return idx;
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlan {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  std::size_t size = 0;

  FftPlan(const GridSpec& g, int sign) : size(g.size()) {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    in = fftw_alloc_complex(size);
    out = fftw_alloc_complex(size);
    std::vector<int> dims(g.d, g.Npts);
    plan = fftw_plan_dft(g.d, dims.data(), in, out, sign, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  cplx* input() { return reinterpret_cast<cplx*>(in); }
  const cplx* output() const { return reinterpret_cast<const cplx*>(out); }
  void run() { fftw_execute(plan); }
};

// Offset between grid points j and l as a flattened index of (j − l) mod Npts.
std::size_t difference_index(const GridSpec& g, std::size_t j, std::size_t l) {
  std::size_t idx = 0, mul = 1;
  for (int a = 0; a < g.d; ++a) {
    const std::size_t ja = j % g.Npts, la = l % g.Npts;
    j /= g.Npts;
    l /= g.Npts;
    idx += ((ja + g.Npts - la) % g.Npts) * mul;
    mul *= g.Npts;
  }
  return idx;
}

CMatrix full_block(const CMatrix& v, int n) {
  if (v.rows() == 1 && n > 1) return v(0, 0) * CMatrix::Identity(n, n);
  if (v.rows() != n || v.cols() != n)
    throw ConfigurationError("operator assembly: block has wrong shape");
  return v;
}

}  // namespace

void check_support(const std::optional<Box>& support, const GridSpec& grid) {
  if (!support) return;
  if (support->d() != grid.d) throw GeometryError("support dimension differs from the grid");
  const double edge = 0.25 * grid.L;
  for (int a = 0; a < grid.d; ++a) {
    if (support->lo[a] < -edge - 1e-12 || support->hi[a] > edge + 1e-12) {
      throw GeometryError("support [" + std::to_string(support->lo[a]) + ", " +
                          std::to_string(support->hi[a]) + "] on axis " + std::to_string(a) +
                          " violates the L/4 margin of a torus of side " +
                          std::to_string(grid.L));
    }
  }
}

DiscretizedOperator quantize(const ClassicalSymbol& sigma, const GridSpec& grid) {
  if (sigma.d() != grid.d) throw ConfigurationError("quantize: dimension mismatch");
  check_support(sigma.spatial_support(), grid);
  const int n = sigma.n();
  const std::size_t P = grid.size();
  const double norm = 1.0 / static_cast<double>(P);
  CMatrix A(P * n, P * n);
  std::vector<std::size_t> fidx(P);
  std::vector<double> parity(P);
  std::vector<std::vector<double>> xi(P);
  for (std::size_t f = 0; f < P; ++f) {
    fidx[f] = fft_index(grid, f);
    int ks = 0;
    for (int k : grid.frequency_label(f)) ks += k;
    parity[f] = (ks % 2 == 0) ? 1.0 : -1.0;  // e^{iπ Σk} from x_l = −L/2 + l h
    xi[f] = grid.frequency(f);
  }
  const int nw = std::min<int>(workers(), static_cast<int>(P));
  std::vector<std::unique_ptr<FftPlan>> plans;
  for (int w = 0; w < nw; ++w) plans.push_back(std::make_unique<FftPlan>(grid, FFTW_FORWARD));
  std::vector<std::vector<CMatrix>> vals(nw, std::vector<CMatrix>(P));
  // rows are processed in chunks, one chunk per worker
  const std::size_t chunk = (P + nw - 1) / nw;
  parallel_for(static_cast<std::size_t>(nw), [&](std::size_t w) {
    FftPlan& plan = *plans[w];
    std::vector<CMatrix>& v = vals[w];
    for (std::size_t j = w * chunk; j < std::min(P, (w + 1) * chunk); ++j) {
      const std::vector<double> x = grid.point(j);
      for (std::size_t f = 0; f < P; ++f) {
        double phase = 0.0;
        for (int a = 0; a < grid.d; ++a) phase += xi[f][a] * x[a];
        v[f] = full_block(evaluate_symbol(sigma, x, xi[f]), n) *
               (std::polar(1.0, phase) * parity[f]);
      }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          cplx* in = plan.input();
          for (std::size_t f = 0; f < P; ++f) in[fidx[f]] = v[f](a, b);
          plan.run();
          const cplx* out = plan.output();
          for (std::size_t l = 0; l < P; ++l) A(j * n + a, l * n + b) = out[l] * norm;
        }
    }
  });
  DiscretizedOperator op(grid, sigma.algebra(), std::move(A),
                         std::abs(sigma.order().imag()) < 1e-14 ? sigma.order().real() : 0.0);
  return op;
}

MultiplierOperator multiplier_blocks(const SymbolFn& phi, int n, const GridSpec& grid,
                                     double order_hint) {
  MultiplierOperator m;
  m.grid = grid;
  m.n = n;
  m.order_hint = order_hint;
  m.blocks.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t f) {
    const std::vector<double> xi = grid.frequency(f);
    m.blocks[f] = full_block(phi(xi), n);
  });
  return m;
}

CMatrix MultiplierOperator::diagonal_block() const {
  CMatrix s = CMatrix::Zero(n, n);
  for (const CMatrix& b : blocks) s += b;
  return s / static_cast<double>(blocks.size());
}

DiscretizedOperator MultiplierOperator::to_dense() const {
  const std::size_t P = grid.size();
  // kernel c(Δ) = Npts^{-d} Σ_k φ(ξ_k) e^{2πi k·Δ/Npts}
  std::vector<CMatrix> kernel(P, CMatrix::Zero(n, n));
  {
    FftPlan plan(grid, FFTW_BACKWARD);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx* in = plan.input();
        for (std::size_t f = 0; f < P; ++f) in[fft_index(grid, f)] = blocks[f](a, b);
        plan.run();
        for (std::size_t l = 0; l < P; ++l) kernel[l](a, b) = plan.output()[l] / static_cast<double>(P);
      }
  }
  CMatrix A(P * n, P * n);
  parallel_for(P, [&](std::size_t l) {
    for (std::size_t j = 0; j < P; ++j) A.block(j * n, l * n, n, n) = kernel[difference_index(grid, j, l)];
  });
  DiscretizedOperator op(grid, MatrixAlgebraSpec(n), std::move(A), order_hint);
  return op;
}

DiscretizedOperator fourier_multiplier(const SymbolFn& phi, int n, const GridSpec& grid,
                                       double order_hint) {
  return multiplier_blocks(phi, n, grid, order_hint).to_dense();
}

DiscretizedOperator multiplication_op(const SymbolFn& f, int n, const GridSpec& grid) {
  const std::size_t P = grid.size();
  CMatrix A = CMatrix::Zero(P * n, P * n);
  for (std::size_t j = 0; j < P; ++j) A.block(j * n, j * n, n, n) = full_block(f(grid.point(j)), n);
  DiscretizedOperator op(grid, MatrixAlgebraSpec(n), std::move(A), 0.0);
  op.space_diagonal = true;
  return op;
}

namespace multipliers {

namespace {
double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s;
}
}  // namespace

SymbolFn bessel(double s) {
  return [s](std::span<const double> xi) {
    return CMatrix(CMatrix::Constant(1, 1, std::pow(1.0 + norm2(xi), 0.5 * s)));
  };
}

SymbolFn riesz_potential(double s) {
  return [s](std::span<const double> xi) {
    const double r2 = norm2(xi);
    return CMatrix(CMatrix::Constant(1, 1, r2 == 0.0 ? 0.0 : std::pow(r2, 0.5 * s)));
  };
}

SymbolFn riesz_transform(int j) {
  return [j](std::span<const double> xi) {
    const double r2 = norm2(xi);
    return CMatrix(CMatrix::Constant(1, 1, r2 == 0.0 ? 0.0 : xi[j] / std::sqrt(r2)));
  };
}

}  // namespace multipliers

namespace {

void check_compatible(const DiscretizedOperator& a, const DiscretizedOperator& b) {
  if (!(a.grid == b.grid) || !(a.algebra == b.algebra))
    throw ConfigurationError("operators live on different grids or algebras");
}

}  // namespace

DiscretizedOperator product(const DiscretizedOperator& a, const DiscretizedOperator& b) {
  check_compatible(a, b);
  const int n = a.algebra.n;
  const Eigen::Index side = a.side();
  DiscretizedOperator out = a;
  out.hermitian = false;
  out.order_hint = a.order_hint + b.order_hint;
  if (a.space_diagonal && b.space_diagonal) {
    out.matrix.setZero();
    for (Eigen::Index j = 0; j < side; j += n)
      out.matrix.block(j, j, n, n) = a.matrix.block(j, j, n, n) * b.matrix.block(j, j, n, n);
    out.space_diagonal = true;
    return out;
  }
  out.space_diagonal = false;
  if (a.space_diagonal) {
    out.matrix = b.matrix;
    for (Eigen::Index j = 0; j < side; j += n)
      out.matrix.middleRows(j, n) = a.matrix.block(j, j, n, n) * b.matrix.middleRows(j, n);
    return out;
  }
  if (b.space_diagonal) {
    out.matrix = a.matrix;
    for (Eigen::Index j = 0; j < side; j += n)
      out.matrix.middleCols(j, n) = a.matrix.middleCols(j, n) * b.matrix.block(j, j, n, n);
    return out;
  }
  out.matrix.noalias() = a.matrix * b.matrix;
  return out;
}

DiscretizedOperator sum(const DiscretizedOperator& a, const DiscretizedOperator& b, cplx cb) {
  check_compatible(a, b);
  DiscretizedOperator out = a;
  out.matrix += cb * b.matrix;
  out.hermitian = false;
  out.space_diagonal = a.space_diagonal && b.space_diagonal;
  out.order_hint = std::max(a.order_hint, b.order_hint);
  return out;
}

DiscretizedOperator adjoint(const DiscretizedOperator& a) {
  DiscretizedOperator out = a;
  out.matrix = a.matrix.adjoint();
  return out;
}

DiscretizedOperator commutator(const DiscretizedOperator& a, const DiscretizedOperator& b) {
  check_compatible(a, b);
  const int n = a.algebra.n;
  if (n == 1 && (a.space_diagonal || b.space_diagonal)) {
    // [A, M_f]_{jl} = A_{jl}(f_l − f_j) and [M_f, B]_{jl} = (f_j − f_l) B_{jl}
    const bool left_diag = a.space_diagonal;
    const CMatrix& dense = left_diag ? b.matrix : a.matrix;
    const CVector f = left_diag ? CVector(a.matrix.diagonal()) : CVector(b.matrix.diagonal());
    DiscretizedOperator out = left_diag ? b : a;
    out.hermitian = false;
    out.space_diagonal = false;
    out.order_hint = a.order_hint + b.order_hint - 1.0;
    const Eigen::Index side = a.side();
    for (Eigen::Index l = 0; l < side; ++l)
      for (Eigen::Index j = 0; j < side; ++j)
        out.matrix(j, l) = left_diag ? (f(j) - f(l)) * dense(j, l) : dense(j, l) * (f(l) - f(j));
    if (a.space_diagonal && b.space_diagonal) out.matrix.setZero();
    return out;
  }
  DiscretizedOperator ab = product(a, b), ba = product(b, a);
  DiscretizedOperator out = sum(ab, ba, -1.0);
  out.order_hint = a.order_hint + b.order_hint - 1.0;
  return out;
}

void save_operator(const std::string& path, const DiscretizedOperator& op) {
  nlohmann::json h;
  h["d"] = op.grid.d;
  h["L"] = op.grid.L;
  h["Npts"] = op.grid.Npts;
  h["n"] = op.algebra.n;
  h["trace_convention"] = "standard";
  h["order_hint"] = op.order_hint;
  h["hermitian"] = op.hermitian;
  h["space_diagonal"] = op.space_diagonal;
  h["side"] = op.side();
  h["trace_weights"] = op.trace_weights;
  const std::string header = h.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("save_operator: cannot open " + path);
  std::uint64_t len = header.size();
  unsigned char lenbytes[8];
  for (int i = 0; i < 8; ++i) lenbytes[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(lenbytes), 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const Eigen::Index side = op.side();
  std::vector<double> row(2 * side);
  for (Eigen::Index i = 0; i < side; ++i) {
    for (Eigen::Index j = 0; j < side; ++j) {
      row[2 * j] = op.matrix(i, j).real();
      row[2 * j + 1] = op.matrix(i, j).imag();
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw ConfigurationError("save_operator: write failed for " + path);
}

DiscretizedOperator load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("load_operator: cannot open " + path);
  unsigned char lenbytes[8];
  in.read(reinterpret_cast<char*>(lenbytes), 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lenbytes[i]) << (8 * i);
  if (!in || len > (1u << 30)) throw ConfigurationError("load_operator: bad header length");
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  const nlohmann::json h = nlohmann::json::parse(header);
  GridSpec g(h.at("d").get<int>(), h.at("L").get<double>(), h.at("Npts").get<int>());
  const int n = h.at("n").get<int>();
  const Eigen::Index side = static_cast<Eigen::Index>(g.size()) * n;
  if (h.at("side").get<Eigen::Index>() != side)
    throw ConfigurationError("load_operator: side inconsistent with grid");
  CMatrix A(side, side);
  std::vector<double> row(2 * side);
  for (Eigen::Index i = 0; i < side; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    for (Eigen::Index j = 0; j < side; ++j) A(i, j) = cplx(row[2 * j], row[2 * j + 1]);
  }
  if (!in) throw ConfigurationError("load_operator: truncated matrix data in " + path);
  DiscretizedOperator op(g, MatrixAlgebraSpec(n), std::move(A), h.at("order_hint").get<double>());
  op.trace_weights = h.at("trace_weights").get<std::vector<double>>();
  op.hermitian = h.at("hermitian").get<bool>();
  op.space_diagonal = h.value("space_diagonal", false);
  return op;
}

namespace {

// Sign (−1)^{Σk} of the frequency index f: e^{−iξ·x_l} = (−1)^{Σk} e^{−2πi k·l/Npts}.
double frequency_sign(const GridSpec& g, std::size_t f) {
  int s = 0;
  for (int k : g.frequency_label(f)) s += k;
  return (s % 2 == 0) ? 1.0 : -1.0;
}

// Applies the unitary DFT (forward) or its inverse to the space index of
// every column of m, in place. Row index s·n + a, frequency index f·n + a.
void transform_columns(CMatrix& m, const GridSpec& g, int n, bool forward) {
  const std::size_t P = g.size();
  std::vector<std::size_t> fft(P);
  std::vector<double> sign(P);
  for (std::size_t f = 0; f < P; ++f) {
    fft[f] = fft_index(g, f);
    sign[f] = frequency_sign(g, f);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(P));
  std::vector<int> dims(g.d, g.Npts);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    std::vector<cplx> a(P), b(P);
    plan = fftw_plan_dft(g.d, dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                         reinterpret_cast<fftw_complex*>(b.data()), forward ? FFTW_FORWARD : FFTW_BACKWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  parallel_for(cols * n, [&](std::size_t task) {
    const Eigen::Index c = static_cast<Eigen::Index>(task / n);
    const int a = static_cast<int>(task % n);
    std::vector<cplx> in(P), out(P);
    if (forward) {
      for (std::size_t s = 0; s < P; ++s) in[s] = m(s * n + a, c);
      fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
      for (std::size_t f = 0; f < P; ++f) m(f * n + a, c) = scale * sign[f] * out[fft[f]];
    } else {
      for (std::size_t f = 0; f < P; ++f) in[fft[f]] = sign[f] * m(f * n + a, c);
      fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
      for (std::size_t s = 0; s < P; ++s) m(s * n + a, c) = scale * out[s];
    }
  });
  std::lock_guard<std::mutex> lock(fftw_mutex());
  fftw_destroy_plan(plan);
}

// F X F* (forward) or F* X F (inverse) using two column passes.
CMatrix conjugate_by_dft(CMatrix x, const GridSpec& g, int n, bool forward) {
  transform_columns(x, g, n, forward);
  x.adjointInPlace();
  transform_columns(x, g, n, forward);
  x.adjointInPlace();
  return x;
}

}  // namespace

CMatrix to_frequency_basis(const DiscretizedOperator& a) {
  return conjugate_by_dft(a.matrix, a.grid, a.algebra.n, true);
}

CMatrix from_frequency_basis(const GridSpec& grid, int n, const CMatrix& c) {
  const Eigen::Index side = static_cast<Eigen::Index>(grid.size()) * n;
  if (c.rows() != side || c.cols() != side)
    throw ConfigurationError("from_frequency_basis: matrix side must be Npts^d·n");
  return conjugate_by_dft(c, grid, n, false);
}

CMatrix galerkin_multiplication_frequency(const SymbolFn& f, int n, const GridSpec& grid) {
  // oversampled so that the discrete coefficients match the continuous ones to quadrature accuracy
  int per_axis = 2 * grid.Npts;
  while (std::pow(2.0 * per_axis, grid.d) <= 1048576.0) per_axis *= 2;
  const GridSpec fine(grid.d, grid.L, per_axis);
  const std::size_t Q = fine.size();
  // f̂(η) for η labels in [−per_axis/2, per_axis/2)^d, one n×n block each
  std::vector<CMatrix> coeff(Q, CMatrix::Zero(n, n));
  {
    FftPlan plan(fine, FFTW_FORWARD);
    std::vector<CMatrix> values(Q);
    for (std::size_t s = 0; s < Q; ++s) {
      values[s] = f(fine.point(s));
      if (values[s].rows() == 1 && n > 1) values[s] = values[s](0, 0) * CMatrix::Identity(n, n);
      if (values[s].rows() != n || values[s].cols() != n)
        throw ConfigurationError("galerkin_multiplication: function block shape does not match n");
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        for (std::size_t s = 0; s < Q; ++s) plan.input()[s] = values[s](a, b);
        plan.run();
        for (std::size_t e = 0; e < Q; ++e)
          coeff[e](a, b) = frequency_sign(fine, e) * plan.output()[fft_index(fine, e)] / static_cast<double>(Q);
      }
  }
  const std::size_t P = grid.size();
  CMatrix out(P * n, P * n);
  parallel_for(P, [&](std::size_t k) {
    const std::vector<int> kk = grid.frequency_label(k);
    for (std::size_t l = 0; l < P; ++l) {
      const std::vector<int> ll = grid.frequency_label(l);
      std::size_t idx = 0;
      for (int a = 0; a < grid.d; ++a)
        idx = idx * fine.Npts + static_cast<std::size_t>(kk[a] - ll[a] + fine.Npts / 2);
      out.block(k * n, l * n, n, n) = coeff[idx];
    }
  });
  return out;
}

DiscretizedOperator galerkin_multiplication_op(const SymbolFn& f, int n, const GridSpec& grid) {
  DiscretizedOperator op(grid, MatrixAlgebraSpec(n),
                         from_frequency_basis(grid, n, galerkin_multiplication_frequency(f, n, grid)), 0.0);
  return op;
}

}  // namespace psilab
