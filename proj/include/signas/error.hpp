#pragma once

#include <stdexcept>
#include <string>

namespace signas {

/// Argument outside an operation's domain (bad gene value, empty space, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed binary or text input: container files, WFDB records, CSV rows.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text parse failure with the offending 1-based line number.
class ParseError : public FormatError {
public:
    ParseError(std::size_t line, const std::string& what)
        : FormatError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnsupportedFormatError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Every architecture was removed by the storage constraint.
class EmptySpaceError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace signas
