#pragma once

#include <stdexcept>
#include <string>

namespace pshrink {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NotPsd,
    NotPd,
    NoConvergence,
    DimensionCutoff,
    DegenerateF,
    RankDegenerate,
    Parse,
    Validation,
    Io,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind() when the
// category matters (tests, CLI error records).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pshrink
