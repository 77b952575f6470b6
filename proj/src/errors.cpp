#include "cohere/errors.hpp"

namespace cohere {

namespace {

std::string located(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + message;
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(located(message, line, column)), message_(message), line_(line), column_(column) {}

EvalError::EvalError(const std::string& message, int coordinate)
    : std::runtime_error(message), coordinate_(coordinate) {}

EvalError EvalError::with_coordinate(int coordinate) const {
    return EvalError("component " + std::to_string(coordinate + 1) + ": " + what(), coordinate);
}

}  // namespace cohere
