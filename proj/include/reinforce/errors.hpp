#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace reinforce {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Scenario file could not be read or is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The requested solve is not available for the classified regime.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Quadrature did not settle when the rule was refined.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double coarse, double fine)
        : Error(what), coarse_(coarse), fine_(fine) {}

    double coarse() const noexcept { return coarse_; }
    double fine() const noexcept { return fine_; }

private:
    double coarse_;
    double fine_;
};

/// Iterative solver hit its iteration cap.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}

    /// Relative residual after each iteration.
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Mesh too coarse for the fiber radius.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// No periodic cell fits inside the cross-section.
class EmptyLayoutError : public Error {
public:
    using Error::Error;
};

/// Scaling family could not be assigned a regime.
class ClassificationError : public Error {
public:
    ClassificationError(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}

    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

} // namespace reinforce
