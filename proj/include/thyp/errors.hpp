#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thyp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// symbol

class EvaluationOutsideDomain : public Error {
public:
    using Error::Error;
};

class ComplexSpectrum : public Error {
public:
    ComplexSpectrum(const std::string& what, double imag_ratio)
        : Error(what), imag_ratio(imag_ratio) {}
    double imag_ratio;  ///< max |Im λ| / ‖A‖
};

class Defective : public Error {
public:
    using Error::Error;
};

class IllConditionedProjection : public Error {
public:
    using Error::Error;
};

class EmptyPlan : public Error {
public:
    using Error::Error;
};

// spectral

class NonFiniteField : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A state left the admissible region. `x` is the offending grid point.
class StateOutsideDomain : public Error {
public:
    StateOutsideDomain(const std::string& what, std::vector<double> x = {},
                       std::string constraint = {})
        : Error(what), x(std::move(x)), constraint(std::move(constraint)) {}
    std::vector<double> x;
    std::string constraint;
};

/// Eigendecomposition failure at a specific (x, ξ) while building Op(P).
class SymbolFailure : public Error {
public:
    SymbolFailure(const std::string& what, std::vector<double> x, std::vector<double> xi)
        : Error(what), x(std::move(x)), xi(std::move(xi)) {}
    std::vector<double> x;
    std::vector<double> xi;
};

// solver

class NoConvergence : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

// models

class SingularTimeMatrix : public Error {
public:
    using Error::Error;
};

/// A fluid state violates one of its model's admissibility inequalities.
class AdmissibilityViolation : public StateOutsideDomain {
public:
    AdmissibilityViolation(const std::string& what, std::string constraint,
                           std::vector<double> x = {})
        : StateOutsideDomain(what, std::move(x), std::move(constraint)) {}
};

// cli

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace thyp
