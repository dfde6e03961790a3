#pragma once

#include <stdexcept>
#include <string>

namespace ssr {

enum class ErrorKind {
    InvalidImage,
    InvalidConfig,
    DegenerateImage,
    DegenerateHistogram,
    ShapeMismatch,
    EmptyRegion,
    NoValidCrop,
    NoClutterMass,
    EmptyPopulation,
    Io,
    Format,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace ssr
