#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csfbench {

enum class ErrorKind {
    invalid_input,
    invalid_config,
    degenerate_series,
    undefined_effectiveness,
    infeasible_calibration,
    invalid_rule,
    training_error,
    diverged_training,
    schema_error,
    parse_error,
    io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers branch
/// (the CLI maps every kind to exit code 2).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    /// what() without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace csfbench
