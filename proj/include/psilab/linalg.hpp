#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace psilab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Spectral norm (largest singular value).
double op_norm(const CMatrix& a);

/// ‖A − A*‖_F / ‖A‖_F, zero for the zero matrix.
double hermitian_defect(const CMatrix& a);

struct HermitianEigen {
  RVector values;  // ascending
  CMatrix vectors; // columns, empty when not requested
};

/// Eigen-decomposition of a Hermitian matrix. Matrices whose imaginary part
/// is below round-off are routed through the real symmetric solver.
HermitianEigen eigh(const CMatrix& a, bool want_vectors = true);

/// Eigenvalues only, ascending.
RVector eigvalsh(const CMatrix& a);

/// Singular values in descending order. Hermitian and anti-Hermitian inputs
/// use eigenvalue moduli; large general inputs go through the Gram matrix.
RVector singular_values(const CMatrix& a);

/// f(A) for Hermitian A through the spectral theorem.
CMatrix hermitian_function(const CMatrix& a, const std::function<cplx(double)>& f);

/// (A*A)^{1/2}
CMatrix modulus(const CMatrix& a);

/// Call first thing in main. Pins OpenBLAS to one thread so results do not
/// depend on the thread count (parallelism comes from parallel_for). OpenBLAS
/// also selects its kernels when it loads, and the Cooperlake DGEMM kernel
/// returns wrong products on some virtualized CPUs: when that kernel was
/// selected and OPENBLAS_CORETYPE is unset, the program re-executes itself
/// with OPENBLAS_CORETYPE=SkylakeX.
void configure_blas(char** argv);

/// Compares a BLAS matrix product against a reference loop; true when they agree.
bool blas_self_check();

}  // namespace psilab
