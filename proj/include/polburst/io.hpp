// io.hpp — command-line front end: JSON scenario configs in, deterministic
// CSV sweep data and JSON manifests out.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "polburst/protocol.hpp"

namespace polburst::io {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

// configuration problem tied to a named field; maps to exit code 2
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct CsvTable {
    std::vector<std::string> header;             // column names with units
    std::vector<std::vector<std::string>> rows;  // preformatted cells

    std::string to_string() const;
};

// canonical number formatting used for every CSV cell (determinism contract)
std::string format_number(double value);

struct VerbResult {
    CsvTable csv;
    nlohmann::ordered_json manifest;
};

// defaults for a verb, before any user overrides
nlohmann::ordered_json default_config(const std::string& verb);

// user config deep-merged over the verb defaults; unknown keys rejected
nlohmann::ordered_json resolve_config(const std::string& verb,
                                      const nlohmann::json& user);

// run one scenario verb; jobs >= 1 selects sweep-point parallelism with
// index-ordered (deterministic) assembly
VerbResult run_verb(const std::string& verb, const nlohmann::json& user_config,
                    int jobs);

std::vector<std::string> known_verbs();

// full CLI: parses argv, runs the verb, writes <out>/<verb>.csv and
// <out>/<verb>.manifest.json; returns the process exit code
// (0 ok, 1 simulation failure, 2 config error)
int run_cli(const std::vector<std::string>& args);

} // namespace polburst::io
