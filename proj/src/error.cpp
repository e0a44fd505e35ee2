#include "spt/error.hpp"

namespace spt {

const char* category_name(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::argument_range: return "argument_range";
    case ErrorCategory::unbound_variable: return "unbound_variable";
    case ErrorCategory::missing_cache: return "missing_cache";
    case ErrorCategory::invalid_model: return "invalid_model";
    case ErrorCategory::fit_conditioning: return "fit_conditioning";
    case ErrorCategory::degeneracy: return "degeneracy";
    case ErrorCategory::series_too_short: return "series_too_short";
    case ErrorCategory::window_selection: return "window_selection";
    case ErrorCategory::non_linearity: return "non_linearity";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::parse:
    case ErrorCategory::validation: return 2;
    case ErrorCategory::argument_range:
    case ErrorCategory::unbound_variable:
    case ErrorCategory::missing_cache:
    case ErrorCategory::invalid_model: return 3;
    case ErrorCategory::fit_conditioning:
    case ErrorCategory::degeneracy:
    case ErrorCategory::series_too_short:
    case ErrorCategory::window_selection:
    case ErrorCategory::non_linearity: return 4;
    case ErrorCategory::io: return 5;
    }
    return 1;
}

} // namespace spt
