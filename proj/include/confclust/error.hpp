#ifndef CONFCLUST_ERROR_HPP
#define CONFCLUST_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace confclust {

enum class ErrorKind {
    ParseError,
    EmptyInput,
    FormatError,
    DimensionMismatch,
    DuplicateId,
    InvalidInput,
    InvalidParameter,
    MissingLabel,
    EmptyCluster,
    NoEdges,
    ConvergenceError,
    Undefined,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` drives
/// the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures of the numerics rather than of the inputs.
    bool is_numeric() const noexcept {
        return kind_ == ErrorKind::ConvergenceError || kind_ == ErrorKind::NoEdges;
    }

private:
    ErrorKind kind_;
};

} // namespace confclust

#endif
