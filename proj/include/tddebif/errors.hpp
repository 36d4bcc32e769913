#pragma once

#include <stdexcept>
#include <string>

namespace tddebif {

// Base of every numerical failure; the CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation called on a model whose nonlinearities do not fit its hypotheses.
class RegimeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ContourError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CurveLostError : public NumericalError {
public:
    CurveLostError(const std::string& what, double last_param, double last_gamma, double last_xi)
        : NumericalError(what), last_param(last_param), last_gamma(last_gamma), last_xi(last_xi) {}
    double last_param;
    double last_gamma;
    double last_xi;
};

class StepFailureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class HistoryTooShortError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoOscillationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InconclusiveError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace tddebif
