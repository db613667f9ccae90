#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mineco {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed layer spec, schedule or config value.
class InvalidSpecError : public Error {
public:
    using Error::Error;
};

/// Operand widths or batch sizes that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A backward pass was attempted with a tape recorded before the last update.
class StaleTapeError : public Error {
public:
    using Error::Error;
};

/// Input for which the operation is undefined (all-zero batch, odd batch split).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain (negative SNR, nonpositive rate).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A NaN showed up in a forward pass; the step is abandoned.
class NanAbortError : public Error {
public:
    using Error::Error;
};

/// Failure while decoding a checkpoint or text file. Carries the byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace mineco
