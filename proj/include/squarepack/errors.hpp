#pragma once

#include <stdexcept>
#include <string>

namespace squarepack {

// Every error carries a stable machine-readable code; the CLI reports it as JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define SQUAREPACK_ERROR(Name)                                            \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    };

SQUAREPACK_ERROR(OverlapError)
SQUAREPACK_ERROR(BoundaryConflict)
SQUAREPACK_ERROR(DimensionError)
SQUAREPACK_ERROR(RegionOutOfBounds)
SQUAREPACK_ERROR(NonpositiveFugacity)
SQUAREPACK_ERROR(OddLength)
SQUAREPACK_ERROR(TooLarge)
SQUAREPACK_ERROR(BlockConditionViolated)
SQUAREPACK_ERROR(GeometryMismatch)
SQUAREPACK_ERROR(WrapError)
SQUAREPACK_ERROR(ShapeMismatch)
SQUAREPACK_ERROR(InsufficientData)
SQUAREPACK_ERROR(SpecError)
SQUAREPACK_ERROR(IoError)

#undef SQUAREPACK_ERROR

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error("ParseError", "line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ": " + message),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace squarepack
