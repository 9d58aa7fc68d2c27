#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Formula or set-literal syntax error, with 1-based position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column)
    {
    }

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Structure references a node that does not exist, or is otherwise ill-formed.
class MalformedStructure : public Error {
public:
    using Error::Error;
};

/// A configured resource cap (nodes, classes, bits) would be exceeded.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// Wall-clock budget exhausted.
class Timeout : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace hk
