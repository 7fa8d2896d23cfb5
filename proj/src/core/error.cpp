#include "skycast/core/error.hpp"

namespace skycast {

const char* category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::kDomain: return "domain";
        case ErrorCategory::kOutOfRange: return "out-of-range";
        case ErrorCategory::kConfig: return "config";
        case ErrorCategory::kShape: return "shape";
        case ErrorCategory::kLookup: return "lookup";
        case ErrorCategory::kFit: return "fit";
        case ErrorCategory::kDataIntegrity: return "data-integrity";
        case ErrorCategory::kInsufficientHistory: return "insufficient-history";
        case ErrorCategory::kGap: return "gap";
        case ErrorCategory::kInput: return "missing/invalid input";
        case ErrorCategory::kRuntime: return "runtime";
    }
    return "unknown";
}

}  // namespace skycast
