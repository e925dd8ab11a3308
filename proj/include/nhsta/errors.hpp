#pragma once

#include <stdexcept>
#include <string>

namespace nhsta {

// Base of every library failure. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: domain violations, malformed configs, mismatched grids.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Numerical failures.
class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateSpectrumError : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularFrameError : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularMatrixError : public NumericError {
public:
    using NumericError::NumericError;
};

class RefinementError : public NumericError {
public:
    using NumericError::NumericError;
};

class NonHolomorphicFrameError : public NumericError {
public:
    using NumericError::NumericError;
};

class StiffnessError : public NumericError {
public:
    using NumericError::NumericError;
};

class GeneratorError : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateProjectionError : public NumericError {
public:
    using NumericError::NumericError;
};

class NoClearPermutationError : public NumericError {
public:
    using NumericError::NumericError;
};

class InfeasibleError : public NumericError {
public:
    InfeasibleError(const std::string& what, double time, double residual)
        : NumericError(what), time_(time), residual_(residual) {}
    double time() const { return time_; }
    double residual() const { return residual_; }

private:
    double time_;
    double residual_;
};

class NoValidDressingError : public NumericError {
public:
    using NumericError::NumericError;
};

// Dressing that does not return to the identity at t0.
class InvalidStaError : public Error {
public:
    InvalidStaError(const std::string& what, double mu_end_over_pi, int n_crossings)
        : Error(what), mu_end_over_pi_(mu_end_over_pi), n_crossings_(n_crossings) {}
    double mu_end_over_pi() const { return mu_end_over_pi_; }
    int n_crossings() const { return n_crossings_; }

private:
    double mu_end_over_pi_;
    int n_crossings_;
};

}  // namespace nhsta
