#pragma once

// Config ingestion and subcommand dispatch for the `spt` tool.
//
// Config text is INI-like: `key = value` lines, optional `[section]` headers
// (sections only group keys; names must be unique across sections), `#` or
// `;` comments. Values are numbers, true/false, strings (bare or quoted), or
// bracketed numeric lists and matrices such as [[1, 0], [0, 2]].

#include "spt/symexpr.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spt::cli {

inline constexpr int schema_version = 1;

/// "spt <version> (<git describe>)" from the build.
std::string version_string();

struct RunConfig {
    std::string subcommand;
    nlohmann::json parameters = nlohmann::json::object(); ///< every known key, defaults filled in
    std::uint64_t seed = 1;
    std::optional<std::string> output_path;
};

/// Keys accepted by a subcommand, in report order.
std::vector<std::string> known_keys(std::string_view subcommand);

/// Parses and validates config text for `subcommand`. Errors: parse (with line
/// number), validation (naming the key, with a nearest-key hint for unknown keys).
RunConfig parse_config(std::string_view text, std::string_view subcommand);

/// Validates an already-assembled parameter object and fills defaults.
RunConfig make_config(std::string_view subcommand, nlohmann::json parameters);

/// Levenshtein distance, for key suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct RunOutput {
    nlohmann::json report;       ///< JSON report (symbolic/vmc/spt-orders/rqmc)
    std::string text;            ///< primary text output (symbolic text, spectral CSV)
    std::string series_csv;      ///< optional series export
};

struct RunFlags {
    bool json = false;            ///< symbolic: print JSON instead of text
    bool sum_over_states = false; ///< symbolic
    bool oracle = false;          ///< spectral
    bool timing = false;          ///< add wall time to the report
    bool want_series = false;     ///< fill RunOutput::series_csv
};

/// Dispatches to the owning module.
RunOutput run(const RunConfig& config, const RunFlags& flags = {});

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

nlohmann::json to_json(const GExpression& e);

} // namespace spt::cli
