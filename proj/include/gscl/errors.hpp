#pragma once
#include <stdexcept>
#include <string>

namespace gscl {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument / violated precondition (dimension mismatch, tau<=0, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// Numerically degenerate input (zero-norm vector, non-finite value).
struct NumericError : Error {
    using Error::Error;
};

// File could not be opened / read / written at the OS level.
struct IoError : Error {
    using Error::Error;
};

// File opened fine but does not carry the expected magic bytes.
struct FormatError : Error {
    using Error::Error;
};

// Magic recognized but version unsupported.
struct VersionError : Error {
    using Error::Error;
};

// File ends before the declared payload is complete.
struct TruncationError : Error {
    using Error::Error;
};

// Bad run configuration (unknown key, unparsable value).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gscl
