#include "confclust/error.hpp"

namespace confclust {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::NoEdges: return "NoEdges";
    case ErrorKind::ConvergenceError: return "ConvergenceError";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace confclust
