#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sprw {

/// Row/column index type used throughout the library.
using Index = std::int64_t;

/// Level (wavefront) index.
using Level = std::int64_t;

/// Base class of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::int64_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::int64_t line() const noexcept { return line_; }

private:
    std::int64_t line_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};
class UnsupportedFieldError : public Error {
public:
    using Error::Error;
};
class BoundsError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public Error {
public:
    explicit SingularSystemError(Index row)
        : Error("zero or missing diagonal entry in row " + std::to_string(row)),
          row_(row) {}

    Index row() const noexcept { return row_; }

private:
    Index row_;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};
class NoSuchTermError : public Error {
public:
    using Error::Error;
};

// Raised when evaluation finds a row reading an x value that is not yet
// final. Indicates a bug in schedule maintenance, not bad input.
class ScheduleViolation : public Error {
public:
    using Error::Error;
};

class CodegenError : public Error {
public:
    using Error::Error;
};
class IoError : public Error {
public:
    using Error::Error;
};
class FetchError : public Error {
public:
    using Error::Error;
};

}  // namespace sprw
