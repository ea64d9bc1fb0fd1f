#pragma once

#include <stdexcept>
#include <string>

namespace fracrd {

// Two families: input that can never succeed (ValidationError, CLI exit 2) and
// numerical procedures that ran but could not certify a result
// (NumericalError, CLI exit 3).

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientSamples : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergentSeries : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateRoots : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DomainTooSmall : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ContourFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CutoffTooSmall : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StabilityFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BoundaryContamination : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fracrd
