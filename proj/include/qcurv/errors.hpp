#pragma once

#include <stdexcept>
#include <string>

namespace qcurv {

/// Input outside the regime where a formula or integral is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration (bad parameters, schema violations).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its accuracy or stability target.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature results moved by more than the allowed amount under refinement.
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The discrete quadratic form is not positive definite: the quotient is
/// unbounded below in the continuum limit.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace qcurv
