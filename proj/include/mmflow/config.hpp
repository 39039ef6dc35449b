#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmflow/dynamics.hpp"
#include "mmflow/verify.hpp"

namespace mmflow {

struct ParseError {
    std::size_t line = 0;
    std::string message;
};

/// Carries every problem found in a config text, each anchored to a line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ParseError> errors);
    const std::vector<ParseError>& errors() const noexcept { return errors_; }

private:
    std::vector<ParseError> errors_;
};

struct ConfigEntry {
    std::string key;
    std::string value;  // normalized text form
    std::size_t line = 0;
};

struct Sweep {
    std::string param;
    Vector values;
};

/// One `[scenario.<name>]` section. `entries` keep the declarative form
/// (e.g. `W0 = random`), `sim` the materialized configuration.
struct Scenario {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;
    SimConfig sim;
    std::vector<std::string> checks_enabled;
    std::optional<Sweep> sweep;
    ReportStatus expect = ReportStatus::Pass;
    VerifyOptions verify;
    bool snapshots = false;
    std::filesystem::path base_dir = ".";

    const ConfigEntry* entry(std::string_view key) const noexcept;
};

struct ParseOptions {
    /// Relative matrix paths resolve against this directory.
    std::filesystem::path base_dir = ".";
    /// Replaces every scenario's seed (MMFLOW_SEED).
    std::optional<std::uint64_t> seed_override;
};

/// Parse and fully validate. For swept scenarios `sim` holds the first sweep
/// point; every point is validated. Throws ConfigError.
std::vector<Scenario> parse_config(std::string_view text, const ParseOptions& opts = {});
std::vector<Scenario> load_config(const std::filesystem::path& path,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

/// Text that parses back to the same scenario.
std::string render(const Scenario& scenario);
std::string render(const std::vector<Scenario>& scenarios);

/// Numeric keys that may be swept.
bool is_sweepable(std::string_view key) noexcept;

/// Replace (or set) the scenario sweep; validates every point. Throws ConfigError.
Scenario with_sweep(const Scenario& scenario, const Sweep& sweep);

struct RunSpec {
    std::string run_name;
    std::string scenario_name;
    std::optional<std::string> sweep_param;
    double sweep_value = 0.0;
    SimConfig sim;
    VerifyOptions verify;
    ReportStatus expect = ReportStatus::Pass;
    bool snapshots = false;
};

/// One RunSpec per sweep point (or one for an unswept scenario).
std::vector<RunSpec> expand(const Scenario& scenario);
std::vector<RunSpec> expand(const std::vector<Scenario>& scenarios);

/// Reads MMFLOW_SEED; nullopt when unset. Throws ValidationError when malformed.
std::optional<std::uint64_t> seed_from_environment();

}  // namespace mmflow
