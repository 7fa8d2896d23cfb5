#pragma once

#include <stdexcept>
#include <string>

namespace skycast {

// Error categories map one-to-one onto the CLI exit-code contract.
enum class ErrorCategory {
    kDomain,
    kOutOfRange,
    kConfig,
    kShape,
    kLookup,
    kFit,
    kDataIntegrity,
    kInsufficientHistory,
    kGap,
    kInput,
    kRuntime,
};

const char* category_name(ErrorCategory category);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

#define SKYCAST_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(Category, what) {}      \
    }

SKYCAST_DEFINE_ERROR(DomainError, ErrorCategory::kDomain);
SKYCAST_DEFINE_ERROR(OutOfRangeError, ErrorCategory::kOutOfRange);
SKYCAST_DEFINE_ERROR(ConfigError, ErrorCategory::kConfig);
SKYCAST_DEFINE_ERROR(ShapeError, ErrorCategory::kShape);
SKYCAST_DEFINE_ERROR(LookupError, ErrorCategory::kLookup);
SKYCAST_DEFINE_ERROR(DataIntegrityError, ErrorCategory::kDataIntegrity);
SKYCAST_DEFINE_ERROR(InsufficientHistoryError, ErrorCategory::kInsufficientHistory);
SKYCAST_DEFINE_ERROR(GapError, ErrorCategory::kGap);
SKYCAST_DEFINE_ERROR(InputError, ErrorCategory::kInput);
SKYCAST_DEFINE_ERROR(RuntimeFailure, ErrorCategory::kRuntime);

#undef SKYCAST_DEFINE_ERROR

/// Raised when an estimator fails to converge; carries the optimizer state.
class FitError : public Error {
public:
    FitError(const std::string& what, std::string diagnostics)
        : Error(ErrorCategory::kFit, what), diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

}  // namespace skycast
