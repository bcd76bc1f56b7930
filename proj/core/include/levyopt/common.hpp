#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace levyopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Numerical tolerances shared by every stage of the pipeline.
struct Tolerances {
    double psd = 1e-10;          ///< smallest admissible eigenvalue of c (negated)
    double quadrature = 1e-9;    ///< relative target of the adaptive quadrature
    double quadrature_fail = 1e-6;  ///< relative error estimate that is reported as a failure
    double optimizer = 1e-10;    ///< final barrier weight / stationarity target
    double geometry = 1e-9;      ///< membership and kernel computations
    double drift = 1e-7;         ///< q-optimal drift residual
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the operation (e.g. y outside C0).
class DomainError : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// A density with unbounded support carries no tail-decay annotation.
class UnboundedSupportWithoutTailModel : public Error {
public:
    using Error::Error;
};

class NuipViolated : public Error {
public:
    using Error::Error;
};

class C3Violated : public Error {
public:
    using Error::Error;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class InfiniteActivity : public Error {
public:
    using Error::Error;
};

class TailDivergence : public Error {
public:
    using Error::Error;
};

/// Model-file problem; carries the offending line and field.
class ParseError : public Error {
public:
    ParseError(std::string field, std::size_t line, const std::string& message)
        : Error(format(field, line, message)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, std::size_t line, const std::string& message) {
        std::string out = "line " + std::to_string(line);
        if (!field.empty()) out += ", field '" + field + "'";
        return out + ": " + message;
    }

    std::string field_;
    std::size_t line_;
};

}  // namespace levyopt
