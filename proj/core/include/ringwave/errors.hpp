#pragma once

#include <stdexcept>
#include <string>

namespace ringwave {

/// Invalid model or option combination (bad family/role, bad group label, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Newton or continuation failed to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Harmonic truncation could not meet the requested tail tolerance.
class TruncationError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Time integration gave up (step-size underflow or step budget).
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A symmetry construction produced an inconsistent projector.
class SymmetryError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ringwave
