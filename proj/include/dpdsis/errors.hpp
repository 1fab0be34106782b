#pragma once

#include <stdexcept>
#include <string>

namespace dpdsis {

/// Argument outside the mathematical domain (sigma <= 0, alpha < 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Vectors or matrices whose shapes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid non-numeric argument (d < 1, empty grid, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise unusable input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A covariate without spread; its slope is not identifiable.
class DegenerateCovariateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical diagnostic (quadrature, nested fit) failed to converge.
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad experiment configuration file or value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dpdsis
