#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bistatic/simulation.hpp"

namespace bistatic {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Subcommand { static_bias, static_nees, track, bounds };

/// Everything the command line contributes; optional fields override presets and files.
struct ExperimentSpec {
    Subcommand subcommand = Subcommand::track;
    std::optional<std::filesystem::path> config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> threads;
    /// Use the original campaign sizes (1e6 draws per bearing, 5000 tracking runs).
    bool full_scale = false;
    std::filesystem::path output_dir = "out";
};

/// Environment variable consulted when no --out flag is given.
inline constexpr const char* kOutputDirEnv = "BISTATIC_OUT_DIR";

/// Flat `key = value` text. '#' starts a comment; blank lines are ignored; duplicate keys
/// are an error.
using KeyValues = std::map<std::string, std::string, std::less<>>;

[[nodiscard]] KeyValues parse_key_values(std::string_view text);
[[nodiscard]] KeyValues load_key_values(const std::filesystem::path& path);

/// Preset names accepted by a subcommand ("fig2"; "fig3a".."fig3d"; "fig4").
[[nodiscard]] std::vector<std::string> presets_for(Subcommand sub);

[[nodiscard]] StaticBiasConfig static_bias_preset(std::string_view name);
[[nodiscard]] StaticSweepConfig static_sweep_preset(std::string_view name);
[[nodiscard]] ScenarioConfig track_preset(std::string_view name);

/// Applies keys on top of `base`; unknown keys raise ConfigError.
void apply_keys(StaticBiasConfig& base, const KeyValues& keys);
void apply_keys(StaticSweepConfig& base, const KeyValues& keys);
void apply_keys(ScenarioConfig& base, const KeyValues& keys);

/// Resolves preset, then config file, then CLI overrides.
[[nodiscard]] StaticBiasConfig resolve_static_bias(const ExperimentSpec& spec);
/// Without a preset or config file, all four sweep presets are returned.
[[nodiscard]] std::vector<std::pair<std::string, StaticSweepConfig>> resolve_static_nees(const ExperimentSpec& spec);
[[nodiscard]] ScenarioConfig resolve_track(const ExperimentSpec& spec);

[[nodiscard]] std::string_view sweep_name(SweepParameter p);

}  // namespace bistatic
