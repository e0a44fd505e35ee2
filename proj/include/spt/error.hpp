#pragma once

#include <stdexcept>
#include <string>

namespace spt {

/// Machine-readable failure categories; the CLI maps them to exit codes.
enum class ErrorCategory {
    argument_range,
    unbound_variable,
    missing_cache,
    invalid_model,
    fit_conditioning,
    degeneracy,
    series_too_short,
    window_selection,
    non_linearity,
    parse,
    validation,
    io,
};

const char* category_name(ErrorCategory c);
int exit_code(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

} // namespace spt
