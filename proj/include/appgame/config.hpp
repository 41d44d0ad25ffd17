#pragma once

#include <optional>
#include <string>

#include "appgame/analysis.hpp"

namespace appgame {

// One run described by one JSON file; see configs/example.json.
struct RunConfig {
    ModelParams params;
    double x10 = 1.0, x20 = 1.0;
    TerminalMode terminal_mode = TerminalMode::ExhaustWealth;
    double terminal_eps = 1e-6;

    double integrator_rel = 1e-9;
    double integrator_abs = 1e-12;
    double shooting_tol = 1e-8;
    double steady_state_tol = 1e-8;

    int samples = 201;
    std::string output_dir = "out";

    std::optional<std::array<double, 2>> costate_guess;
    std::optional<GameState> steady_guess;

    std::optional<SweepGrid> sweep_grid;

    bool operator==(const RunConfig& other) const;

    SimulationSpec to_spec() const;
    ShootOptions shoot_options() const;
    IntegrateOptions integrate_options() const;
};

// Throws std::invalid_argument with a field-specific message on malformed
// input (bad JSON, unknown keys, out-of-range values).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

} // namespace appgame
