#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhlse {

/// A parameter lies outside the domain an operation is defined on.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller-supplied callback broke its contract (e.g. a binary oracle
/// returned something other than 0 or 1).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Bayesian update whose normalizer vanished.
class DegenerateUpdate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The fixed-error policy did not reach its target within the horizon cap.
class HorizonExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                             std::to_string(column) + ")"),
          row_(row),
          column_(column) {}

    /// 1-based line number in the file.
    std::size_t row() const noexcept { return row_; }
    /// 1-based field index within the line; 0 when the whole line is at fault.
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace fhlse
