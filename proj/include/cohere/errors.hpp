#pragma once

#include <stdexcept>
#include <string>

namespace cohere {

/// Malformed DSL or JSON input. Line and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line = 0, int column = 0);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    int line_;
    int column_;
};

/// Pointwise evaluation left the natural domain of a function (log, sqrt) or
/// produced a non-finite value. `coordinate` is the 0-based field component,
/// or -1 when the failing expression is not a field component.
class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& message, int coordinate = -1);

    int coordinate() const noexcept { return coordinate_; }
    EvalError with_coordinate(int coordinate) const;

private:
    int coordinate_;
};

/// A structural operation was asked to do something its input does not
/// support (incoherent graph for a transform, non-equilibrium fibre base, ...).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force enumeration hit its configured cap.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cohere
