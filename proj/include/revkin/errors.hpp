#pragma once

#include <stdexcept>
#include <string>

namespace revkin {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value or object violates a documented invariant (bad field, bad file,
/// bad grid, ...). Maps to CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// (k2+k3+k4)^2 <= 4*k2*k4: the tissue system matrix has a repeated or
/// complex eigenvalue pair and the closed-form solution does not apply.
class DegenerateParams : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not meet the requested tolerance within its
/// evaluation budget.
class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// A blood-fraction mixing model was requested without whole-blood samples.
class MissingWholeBlood : public Error {
public:
    using Error::Error;
};

/// The ODE integrator produced a non-finite state value.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// A linear system's condition estimate exceeded the configured limit.
class IllConditioned : public Error {
public:
    using Error::Error;
};

/// Fewer measurement time points than the identifiability bound requires.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

/// The random-configuration sampler exceeded its rejection budget.
class ExhaustedRedraws : public Error {
public:
    using Error::Error;
};

/// A nonlinear solve failed from every start point.
class NoSolution : public Error {
public:
    using Error::Error;
};

/// Sample geometry makes a nonlinear system singular.
class RankDeficient : public Error {
public:
    using Error::Error;
};

}  // namespace revkin
