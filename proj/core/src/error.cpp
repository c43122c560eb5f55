#include "csfbench/error.hpp"

namespace csfbench {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::degenerate_series: return "degenerate-series";
    case ErrorKind::undefined_effectiveness: return "undefined-effectiveness";
    case ErrorKind::infeasible_calibration: return "infeasible-calibration";
    case ErrorKind::invalid_rule: return "invalid-rule";
    case ErrorKind::training_error: return "training-error";
    case ErrorKind::diverged_training: return "diverged-training";
    case ErrorKind::schema_error: return "schema-error";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

} // namespace csfbench
