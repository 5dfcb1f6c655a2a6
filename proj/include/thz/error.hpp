#pragma once

#include <stdexcept>
#include <string>

namespace thz {

// Exit-code-stable error families (see README: 1 io, 2 config, 3 degenerate
// data, 4 checkpoint mismatch, 5 shape mismatch).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DegenerateDataError : Error {
    using Error::Error;
};

struct CheckpointMismatchError : Error {
    using Error::Error;
};

struct ShapeMismatchError : Error {
    using Error::Error;
};

// Cube file parsing failures keep their category machine-readable.
enum class CubeErrorKind { BadMagic, BadHeader, Truncated, NonFinite, NegativeAmplitude };

struct CubeFormatError : IoError {
    CubeErrorKind kind;
    CubeFormatError(CubeErrorKind k, const std::string& msg) : IoError(msg), kind(k) {}
};

}  // namespace thz
