#pragma once

#include <stdexcept>
#include <string>

namespace psilab {

/// Invalid shapes or inconsistent parameters handed to a constructor.
struct ConfigurationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Coefficient support does not fit the torus with the required margin.
struct GeometryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (non-Hermitian,
/// non-positive, exponent out of range, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A spectral parameter hit the spectrum of a principal symbol.
struct SingularResolventError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Jets of a component were requested beyond the order it supports.
struct JetOrderError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A LAPACK routine or an extrapolation fit failed.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

}  // namespace psilab
