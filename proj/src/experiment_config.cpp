#include "bistatic/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>

namespace bistatic {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
    }
    return value;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> items;
    while (!text.empty()) {
        const auto comma = text.find(',');
        items.push_back(trim(text.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return items;
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> values;
    for (auto item : split_list(text)) {
        values.push_back(parse_double(key, item));
    }
    if (values.empty()) {
        throw ConfigError(fmt::format("{}: list is empty", key));
    }
    return values;
}

std::vector<double> degrees_list(std::string_view key, std::string_view text) {
    auto values = parse_list(key, text);
    for (double& v : values) {
        v = deg_to_rad(v);
    }
    return values;
}

// Dispatches each key to a setter; anything unhandled is an error.
class KeyDispatcher {
public:
    explicit KeyDispatcher(const KeyValues& keys) : keys_(keys) {}

    template <typename Fn>
    KeyDispatcher& on(std::string_view key, Fn&& fn) {
        if (const auto it = keys_.find(key); it != keys_.end()) {
            fn(it->second);
            handled_.emplace_back(key);
        }
        return *this;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : keys_) {
            if (std::find(handled_.begin(), handled_.end(), key) == handled_.end()) {
                throw ConfigError(fmt::format("unknown config key '{}'", key));
            }
        }
    }

private:
    const KeyValues& keys_;
    std::vector<std::string> handled_;
};

std::vector<double> degree_grid(std::initializer_list<double> degrees) {
    std::vector<double> out;
    for (double d : degrees) {
        out.push_back(deg_to_rad(d));
    }
    return out;
}

std::string preset_or_throw(const ExperimentSpec& spec) {
    const auto names = presets_for(spec.subcommand);
    if (spec.preset && std::find(names.begin(), names.end(), *spec.preset) == names.end()) {
        throw ConfigError(fmt::format("preset '{}' does not apply to this subcommand", *spec.preset));
    }
    return spec.preset.value_or(names.empty() ? std::string{} : names.front());
}

template <typename Config>
void apply_overrides(Config& cfg, const ExperimentSpec& spec) {
    if (spec.full_scale) {
        if constexpr (std::is_same_v<Config, StaticBiasConfig>) {
            cfg.runs = 1000000;
        } else if constexpr (std::is_same_v<Config, ScenarioConfig>) {
            cfg.runs = 5000;
        }
    }
    if (spec.seed) {
        cfg.seed = *spec.seed;
    }
    if (spec.runs) {
        if (*spec.runs == 0) {
            throw ConfigError("--runs must be positive");
        }
        cfg.runs = *spec.runs;
    }
    if (spec.threads) {
        cfg.threads = std::max<std::size_t>(*spec.threads, 1);
    }
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = trim(view);
        if (view.empty()) {
            continue;
        }
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
        }
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(fmt::format("line {}: empty key", line_no));
        }
        if (!out.emplace(std::string(key), std::string(value)).second) {
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
        }
    }
    return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_key_values(buffer.str());
}

std::vector<std::string> presets_for(Subcommand sub) {
    switch (sub) {
        case Subcommand::static_bias: return {"fig2"};
        case Subcommand::static_nees: return {"fig3a", "fig3b", "fig3c", "fig3d"};
        case Subcommand::track: return {"fig4"};
        case Subcommand::bounds: return {};
    }
    return {};
}

std::string_view sweep_name(SweepParameter p) {
    switch (p) {
        case SweepParameter::b: return "b";
        case SweepParameter::alpha: return "alpha";
        case SweepParameter::sigma_b: return "sigma_b";
        case SweepParameter::sigma_alpha: return "sigma_alpha";
    }
    return "unknown";
}

StaticBiasConfig static_bias_preset(std::string_view name) {
    if (name != "fig2") {
        throw ConfigError(fmt::format("unknown static-bias preset '{}'", name));
    }
    StaticBiasConfig cfg;
    cfg.geometry = {4000.0};
    cfg.noise = {30.0, deg_to_rad(5.0)};
    cfg.b = 8000.0;
    cfg.bearings = degree_grid({0, 15, 30, 45, 60, 75, 90});
    cfg.runs = 100000;
    return cfg;
}

StaticSweepConfig static_sweep_preset(std::string_view name) {
    StaticSweepConfig cfg;
    cfg.geometry = {4000.0};
    cfg.runs = 10000;
    cfg.b = 8000.0;
    cfg.alpha = deg_to_rad(60.0);
    if (name == "fig3a") {
        cfg.swept = SweepParameter::b;
        cfg.noise = {30.0, deg_to_rad(1.0)};
        cfg.perpendicular_bisector = true;
        for (double b = 5000.0; b <= 20000.0; b += 1000.0) {
            cfg.grid.push_back(b);
        }
    } else if (name == "fig3b") {
        cfg.swept = SweepParameter::alpha;
        cfg.noise = {30.0, deg_to_rad(2.0)};
        cfg.grid = degree_grid({0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90});
    } else if (name == "fig3c") {
        cfg.swept = SweepParameter::sigma_b;
        cfg.noise = {30.0, deg_to_rad(1.0)};
        cfg.grid = {1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 150.0, 200.0};
    } else if (name == "fig3d") {
        cfg.swept = SweepParameter::sigma_alpha;
        cfg.noise = {30.0, deg_to_rad(1.0)};
        cfg.grid = degree_grid({0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0});
    } else {
        throw ConfigError(fmt::format("unknown static-nees preset '{}'", name));
    }
    return cfg;
}

ScenarioConfig track_preset(std::string_view name) {
    if (name != "fig4") {
        throw ConfigError(fmt::format("unknown track preset '{}'", name));
    }
    ScenarioConfig cfg;
    cfg.geometry = {4000.0};
    cfg.noise = {10.0, deg_to_rad(2.0)};
    cfg.period = 1.0;
    cfg.scans = 200;
    cfg.runs = 1000;
    cfg.initial_position = {8000.0, 8000.0};
    cfg.initial_speed = 10.0;
    cfg.heading_policy = HeadingPolicy::random_uniform;
    return cfg;
}

void apply_keys(StaticBiasConfig& cfg, const KeyValues& keys) {
    KeyDispatcher(keys)
        .on("baseline", [&](auto v) { cfg.geometry.baseline = parse_double("baseline", v); })
        .on("b", [&](auto v) { cfg.b = parse_double("b", v); })
        .on("sigma_b", [&](auto v) { cfg.noise.sigma_b = parse_double("sigma_b", v); })
        .on("sigma_alpha_deg", [&](auto v) { cfg.noise.sigma_alpha = deg_to_rad(parse_double("sigma_alpha_deg", v)); })
        .on("bearings_deg", [&](auto v) { cfg.bearings = degrees_list("bearings_deg", v); })
        .on("runs", [&](auto v) { cfg.runs = parse_unsigned("runs", v); })
        .on("seed", [&](auto v) { cfg.seed = parse_unsigned("seed", v); })
        .on("hist_bins", [&](auto v) { cfg.histogram_bins = parse_unsigned("hist_bins", v); })
        .on("threads", [&](auto v) { cfg.threads = parse_unsigned("threads", v); })
        .reject_unknown();
}

void apply_keys(StaticSweepConfig& cfg, const KeyValues& keys) {
    std::optional<std::vector<double>> grid;
    std::optional<std::vector<double>> grid_deg;
    const SweepParameter base_sweep = cfg.swept;
    KeyDispatcher(keys)
        .on("baseline", [&](auto v) { cfg.geometry.baseline = parse_double("baseline", v); })
        .on("sweep",
            [&](auto v) {
                for (auto p : {SweepParameter::b, SweepParameter::alpha, SweepParameter::sigma_b,
                               SweepParameter::sigma_alpha}) {
                    if (sweep_name(p) == v) {
                        cfg.swept = p;
                        return;
                    }
                }
                throw ConfigError(fmt::format("sweep: unknown parameter '{}'", v));
            })
        .on("grid", [&](auto v) { grid = parse_list("grid", v); })
        .on("grid_deg", [&](auto v) { grid_deg = degrees_list("grid_deg", v); })
        .on("b", [&](auto v) { cfg.b = parse_double("b", v); })
        .on("alpha_deg", [&](auto v) { cfg.alpha = deg_to_rad(parse_double("alpha_deg", v)); })
        .on("sigma_b", [&](auto v) { cfg.noise.sigma_b = parse_double("sigma_b", v); })
        .on("sigma_alpha_deg", [&](auto v) { cfg.noise.sigma_alpha = deg_to_rad(parse_double("sigma_alpha_deg", v)); })
        .on("perpendicular_bisector",
            [&](auto v) { cfg.perpendicular_bisector = parse_bool("perpendicular_bisector", v); })
        .on("prediction_correlation",
            [&](auto v) {
                const double rho = parse_double("prediction_correlation", v);
                cfg.prediction_shape << 1.0, rho, rho, 1.0;
            })
        .on("runs", [&](auto v) { cfg.runs = parse_unsigned("runs", v); })
        .on("seed", [&](auto v) { cfg.seed = parse_unsigned("seed", v); })
        .on("threads", [&](auto v) { cfg.threads = parse_unsigned("threads", v); })
        .reject_unknown();

    const bool angular = cfg.swept == SweepParameter::alpha || cfg.swept == SweepParameter::sigma_alpha;
    if (grid && grid_deg) {
        throw ConfigError("give either 'grid' or 'grid_deg', not both");
    }
    if (grid) {
        if (angular) {
            throw ConfigError(fmt::format("sweep '{}' is angular; use 'grid_deg'", sweep_name(cfg.swept)));
        }
        cfg.grid = *grid;
    } else if (grid_deg) {
        if (!angular) {
            throw ConfigError(fmt::format("sweep '{}' is not angular; use 'grid'", sweep_name(cfg.swept)));
        }
        cfg.grid = *grid_deg;
    } else if (cfg.swept != base_sweep) {
        throw ConfigError(fmt::format("sweep '{}' needs its own grid", sweep_name(cfg.swept)));
    }
}

void apply_keys(ScenarioConfig& cfg, const KeyValues& keys) {
    KeyDispatcher(keys)
        .on("baseline", [&](auto v) { cfg.geometry.baseline = parse_double("baseline", v); })
        .on("period", [&](auto v) { cfg.period = parse_double("period", v); })
        .on("scans", [&](auto v) { cfg.scans = parse_unsigned("scans", v); })
        .on("runs", [&](auto v) { cfg.runs = parse_unsigned("runs", v); })
        .on("seed", [&](auto v) { cfg.seed = parse_unsigned("seed", v); })
        .on("threads", [&](auto v) { cfg.threads = parse_unsigned("threads", v); })
        .on("sigma_b", [&](auto v) { cfg.noise.sigma_b = parse_double("sigma_b", v); })
        .on("sigma_alpha_deg", [&](auto v) { cfg.noise.sigma_alpha = deg_to_rad(parse_double("sigma_alpha_deg", v)); })
        .on("start_x", [&](auto v) { cfg.initial_position.x = parse_double("start_x", v); })
        .on("start_y", [&](auto v) { cfg.initial_position.y = parse_double("start_y", v); })
        .on("speed", [&](auto v) { cfg.initial_speed = parse_double("speed", v); })
        .on("heading",
            [&](auto v) {
                if (v == "random") {
                    cfg.heading_policy = HeadingPolicy::random_uniform;
                } else if (v == "fixed") {
                    cfg.heading_policy = HeadingPolicy::fixed;
                } else {
                    throw ConfigError(fmt::format("heading: expected 'random' or 'fixed', got '{}'", v));
                }
            })
        .on("heading_deg", [&](auto v) { cfg.fixed_heading = deg_to_rad(parse_double("heading_deg", v)); })
        .on("truth_process_noise", [&](auto v) { cfg.truth_process_noise = parse_bool("truth_process_noise", v); })
        .on("accel_var", [&](auto v) { cfg.accel_var = parse_double("accel_var", v); })
        .on("methods",
            [&](auto v) {
                cfg.methods.clear();
                for (auto name : split_list(v)) {
                    try {
                        cfg.methods.push_back(method_from_string(name));
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError(e.what());
                    }
                }
            })
        .reject_unknown();
}

StaticBiasConfig resolve_static_bias(const ExperimentSpec& spec) {
    StaticBiasConfig cfg = static_bias_preset(preset_or_throw(spec));
    if (spec.config_path) {
        apply_keys(cfg, load_key_values(*spec.config_path));
    }
    apply_overrides(cfg, spec);
    try {
        validate(cfg);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::vector<std::pair<std::string, StaticSweepConfig>> resolve_static_nees(const ExperimentSpec& spec) {
    std::vector<std::string> names;
    if (spec.preset || spec.config_path) {
        names.push_back(preset_or_throw(spec));
    } else {
        names = presets_for(Subcommand::static_nees);
    }
    std::vector<std::pair<std::string, StaticSweepConfig>> out;
    for (const auto& name : names) {
        StaticSweepConfig cfg = static_sweep_preset(name);
        if (spec.config_path) {
            apply_keys(cfg, load_key_values(*spec.config_path));
        }
        apply_overrides(cfg, spec);
        try {
            validate(cfg);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        out.emplace_back(std::string(sweep_name(cfg.swept)), std::move(cfg));
    }
    return out;
}

ScenarioConfig resolve_track(const ExperimentSpec& spec) {
    ScenarioConfig cfg = track_preset(preset_or_throw(spec));
    if (spec.config_path) {
        apply_keys(cfg, load_key_values(*spec.config_path));
    }
    apply_overrides(cfg, spec);
    try {
        validate(cfg);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace bistatic
