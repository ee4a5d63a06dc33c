#include "psilab/linalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <strings.h>
#include <string>

#include <unistd.h>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "psilab/errors.hpp"

extern "C" {
char* openblas_get_corename(void);
void openblas_set_num_threads(int n);
void dgemm_(const char* ta, const char* tb, const int* m, const int* n, const int* k, const double* alpha,
            const double* a, const int* lda, const double* b, const int* ldb, const double* beta, double* c,
            const int* ldc);
}

namespace psilab {

namespace {

// Above this side, general (non-normal) singular values go through A A*.
constexpr Eigen::Index kGramThreshold = 1536;

bool is_effectively_real(const CMatrix& a) {
  const double re = a.real().cwiseAbs().maxCoeff();
  const double im = a.imag().cwiseAbs().maxCoeff();
  return im <= 1e-13 * std::max(re, 1e-300);
}

bool is_effectively_imaginary(const CMatrix& a) {
  const double re = a.real().cwiseAbs().maxCoeff();
  const double im = a.imag().cwiseAbs().maxCoeff();
  return im > 0.0 && re <= 1e-13 * im;
}

RVector real_symmetric_eigen(RMatrix& a, bool vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("dsyevd failed, info = " + std::to_string(info));
  return w;
}

RVector complex_hermitian_eigen(CMatrix& a, bool vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("zheevd failed, info = " + std::to_string(info));
  return w;
}

RVector svd_values(CMatrix a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  RVector s(std::min(m, n));
  lapack_int info = 0;
  if (is_effectively_real(a)) {
    RMatrix r = a.real();
    info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, r.data(), m, s.data(), nullptr, 1,
                          nullptr, 1);
  } else {
    info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1,
                          nullptr, 1);
  }
  if (info != 0) {
    throw NumericalError("gesdd failed, info = " + std::to_string(info) +
                         ", max |entry| = " + std::to_string(a.cwiseAbs().maxCoeff()));
  }
  return s;
}

RVector descending_abs(const RVector& w) {
  RVector out = w.cwiseAbs();
  std::sort(out.data(), out.data() + out.size(), std::greater<>());
  return out;
}

}  // namespace

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

double hermitian_defect(const CMatrix& a) {
  const double na = a.norm();
  if (na == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / na;
}

HermitianEigen eigh(const CMatrix& a, bool want_vectors) {
  if (a.rows() != a.cols()) throw ConfigurationError("eigh: matrix is not square");
  HermitianEigen out;
  if (a.size() == 0) return out;
  if (is_effectively_real(a)) {
    RMatrix r = a.real();
    out.values = real_symmetric_eigen(r, want_vectors);
    if (want_vectors) out.vectors = r.cast<cplx>();
  } else {
    CMatrix c = a;
    out.values = complex_hermitian_eigen(c, want_vectors);
    if (want_vectors) out.vectors = std::move(c);
  }
  return out;
}

RVector eigvalsh(const CMatrix& a) { return eigh(a, false).values; }

RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  if (a.rows() == a.cols()) {
    const double defect = hermitian_defect(a);
    if (defect <= 1e-12) return descending_abs(eigvalsh(a));
    const bool large_real = a.rows() > kGramThreshold && is_effectively_real(a);
    if (!large_real && (a + a.adjoint()).norm() <= 1e-12 * a.norm()) {
      // anti-Hermitian: -iA is Hermitian with the same singular values
      CMatrix h = cplx(0.0, -1.0) * a;
      return descending_abs(eigvalsh(h));
    }
  }
  if (std::min(a.rows(), a.cols()) <= kGramThreshold) return svd_values(a);

  CMatrix gram;
  if (is_effectively_real(a) || is_effectively_imaginary(a)) {
    RMatrix r = is_effectively_real(a) ? RMatrix(a.real()) : RMatrix(a.imag());
    RMatrix g = RMatrix::Zero(r.rows(), r.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(r);
    g = g.selfadjointView<Eigen::Lower>();
    RVector w = real_symmetric_eigen(g, false);
    RVector s = w.cwiseMax(0.0).cwiseSqrt();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
  }
  gram = CMatrix::Zero(a.rows(), a.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  gram = gram.selfadjointView<Eigen::Lower>();
  RVector w = complex_hermitian_eigen(gram, false);
  RVector s = w.cwiseMax(0.0).cwiseSqrt();
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  return s;
}

CMatrix hermitian_function(const CMatrix& a, const std::function<cplx(double)>& f) {
  const HermitianEigen e = eigh(a, true);
  CVector fv(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

CMatrix modulus(const CMatrix& a) {
  const CMatrix g = a.adjoint() * a;
  return hermitian_function(0.5 * (g + g.adjoint()),
                            [](double v) { return cplx(std::sqrt(std::max(v, 0.0)), 0.0); });
}

void configure_blas(char** argv) {
  openblas_set_num_threads(1);
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  const char* core = openblas_get_corename();
  if (core == nullptr || strcasecmp(core, "cooperlake") != 0) return;
  setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
  execv("/proc/self/exe", argv);
  // exec failed: keep running, blas_self_check reports the problem
}

bool blas_self_check() {
  const int n = 256;
  RMatrix a(n, n), b(n, n), c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = std::sin(1.0 + i + 3.0 * j);
      b(i, j) = std::cos(2.0 * i - j);
    }
  const double one = 1.0, zero = 0.0;
  dgemm_("N", "N", &n, &n, &n, &one, a.data(), &n, b.data(), &n, &zero, c.data(), &n);
  RMatrix ref = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) ref(i, j) += a(i, k) * b(k, j);
  return (c - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff();
}

}  // namespace psilab
