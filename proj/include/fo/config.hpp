#pragma once

// Command configurations for the batch front-end. Every blob is validated
// with unknown keys rejected before any computation starts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fo/equilibrium.hpp"
#include "fo/error.hpp"
#include "fo/experiments.hpp"
#include "fo/gbrt.hpp"
#include "fo/harness.hpp"
#include "fo/json_util.hpp"
#include "fo/regress.hpp"
#include "fo/synth.hpp"

namespace fo::config {

inline json load_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorKind::io, "cannot open config " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline void read_rolling(const json& j, RollingConfig& r, std::string_view what) {
    read_optional(j, "horizons", r.horizons, what);
    read_optional(j, "window_years", r.window_years, what);
    require(!r.horizons.empty(), ErrorKind::config, "horizons must not be empty");
    for (int h : r.horizons)
        require(h >= kMinHorizon && h <= kMaxHorizon, ErrorKind::config,
                "horizon " + std::to_string(h) + " outside [12, 23]");
    require(r.window_years >= 1, ErrorKind::config, "window_years must be >= 1");
}

struct SynthCommand {
    synth::SynthParams synth{};
};

inline SynthCommand synth_command(const json& j) {
    check_keys(j, {"synth"}, "synth config");
    SynthCommand c;
    if (j.contains("synth")) c.synth = synth::synth_params_from_json(j.at("synth"));
    return c;
}

/// Inputs come either from files written by `synth` or from a fresh synthetic panel.
struct DataSource {
    std::optional<std::string> panel_csv;
    std::optional<std::string> analyst_csv;
    synth::SynthParams synth{};
};

inline void read_source(const json& j, DataSource& s, std::string_view what) {
    if (j.contains("panel")) s.panel_csv = j.at("panel").get<std::string>();
    if (j.contains("analyst_forecasts")) s.analyst_csv = j.at("analyst_forecasts").get<std::string>();
    if (j.contains("synth")) s.synth = synth::synth_params_from_json(j.at("synth"));
    require(s.panel_csv.has_value() == s.analyst_csv.has_value(), ErrorKind::config,
            std::string(what) + ": give both panel and analyst_forecasts, or neither");
}

struct ForecastCommand {
    DataSource source;
    std::string forecaster = forecaster::gbrt;
    GbrtHyperParams hyper{};
    RollingConfig rolling{};
    bool analyst_feature = true;
};

inline ForecastCommand forecast_command(const json& j) {
    check_keys(j, {"panel", "analyst_forecasts", "synth", "forecaster", "gbrt", "horizons", "window_years",
                   "analyst_feature"},
               "forecast config");
    ForecastCommand c;
    read_source(j, c.source, "forecast config");
    read_optional(j, "forecaster", c.forecaster, "forecast config");
    require(c.forecaster == forecaster::gbrt || c.forecaster == forecaster::linear, ErrorKind::config,
            "forecaster must be gbrt or linear");
    if (j.contains("gbrt")) c.hyper = gbrt_hyper_from_json(j.at("gbrt"));
    read_rolling(j, c.rolling, "forecast config");
    read_optional(j, "analyst_feature", c.analyst_feature, "forecast config");
    return c;
}

struct OverreactCommand {
    DataSource source;
    std::optional<std::string> forecasts_csv;  ///< extra forecasters to compare
    std::string baseline = forecaster::analyst;
    std::string predictor = "investment";  ///< "investment" or "news"
    FixedEffects fe = FixedEffects::both;
};

inline OverreactCommand overreact_command(const json& j) {
    check_keys(j, {"panel", "analyst_forecasts", "synth", "forecasts", "baseline", "predictor", "fixed_effects"},
               "overreact config");
    OverreactCommand c;
    read_source(j, c.source, "overreact config");
    if (j.contains("forecasts")) c.forecasts_csv = j.at("forecasts").get<std::string>();
    read_optional(j, "baseline", c.baseline, "overreact config");
    read_optional(j, "predictor", c.predictor, "overreact config");
    require(c.predictor == "investment" || c.predictor == "news", ErrorKind::config,
            "predictor must be investment or news");
    if (j.contains("fixed_effects")) c.fe = fixed_effects_from_string(j.at("fixed_effects").get<std::string>());
    return c;
}

struct SweepCommand {
    exp::StandardConfig standard{};
    std::vector<double> lr_grid{0.01, 0.04, 0.1, 0.2};
    std::size_t replications = 20;
    std::uint64_t first_seed = 1;
};

inline SweepCommand sweep_command(const json& j) {
    check_keys(j, {"synth", "gbrt", "horizons", "window_years", "analyst_feature", "lr_grid", "replications",
                   "first_seed"},
               "sweep-lr config");
    SweepCommand c;
    if (j.contains("synth")) c.standard.synth = synth::synth_params_from_json(j.at("synth"));
    if (j.contains("gbrt")) c.standard.hyper = gbrt_hyper_from_json(j.at("gbrt"));
    read_rolling(j, c.standard.rolling, "sweep-lr config");
    read_optional(j, "analyst_feature", c.standard.analyst_feature, "sweep-lr config");
    read_optional(j, "lr_grid", c.lr_grid, "sweep-lr config");
    read_optional(j, "replications", c.replications, "sweep-lr config");
    read_optional(j, "first_seed", c.first_seed, "sweep-lr config");
    require(!c.lr_grid.empty(), ErrorKind::config, "lr_grid must not be empty");
    for (double g : c.lr_grid) require(g > 0 && g <= 1, ErrorKind::config, "lr_grid entries must lie in (0, 1]");
    require(c.replications >= 1, ErrorKind::config, "replications must be >= 1");
    return c;
}

struct DecomposeCommand {
    DataSource source;
    std::optional<std::string> forecasts_csv;
    std::string forecaster = forecaster::analyst;
};

inline DecomposeCommand decompose_command(const json& j) {
    check_keys(j, {"panel", "analyst_forecasts", "synth", "forecasts", "forecaster"}, "decompose config");
    DecomposeCommand c;
    read_source(j, c.source, "decompose config");
    if (j.contains("forecasts")) c.forecasts_csv = j.at("forecasts").get<std::string>();
    read_optional(j, "forecaster", c.forecaster, "decompose config");
    return c;
}

struct EquilibriumCommand {
    eq::EquilibriumParams params{};
    std::vector<double> A_grid = eq::default_A_grid();
    std::vector<double> lambdas{0.0, 0.9};
    double eps_prev = 10.0;
    double xbar_prev = 1000.0;
};

/// Accepts either the parameter blob itself or {"params": {...}, grid fields}.
inline EquilibriumCommand equilibrium_command(const json& j) {
    EquilibriumCommand c;
    if (!j.contains("params")) {
        c.params = eq::equilibrium_params_from_json(j);
        return c;
    }
    check_keys(j, {"params", "A_grid", "lambdas", "eps_prev", "xbar_prev"}, "equilibrium config");
    c.params = eq::equilibrium_params_from_json(j.at("params"));
    read_optional(j, "A_grid", c.A_grid, "equilibrium config");
    read_optional(j, "lambdas", c.lambdas, "equilibrium config");
    read_optional(j, "eps_prev", c.eps_prev, "equilibrium config");
    read_optional(j, "xbar_prev", c.xbar_prev, "equilibrium config");
    require(!c.A_grid.empty() && !c.lambdas.empty(), ErrorKind::config, "A_grid and lambdas must not be empty");
    return c;
}

}  // namespace fo::config
