#include "aqcast/error.hpp"

namespace aqcast {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyRange: return "empty-range";
    case ErrorCode::InvalidSplit: return "invalid-split";
    case ErrorCode::UnrecoverableSeries: return "unrecoverable-series";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::SingularFit: return "singular-fit";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::NoViableModel: return "no-viable-model";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Gap: return "gap";
    case ErrorCode::Duplicate: return "duplicate";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

} // namespace aqcast
