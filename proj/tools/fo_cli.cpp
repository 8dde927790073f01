// Batch front-end: generate, forecast, test, report, plus the equilibrium sweep.
// Exit codes: 0 success, 2 validation error, 3 numeric error, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "fo/fo.hpp"

namespace fs = std::filesystem;
using namespace fo;

namespace {

struct GlobalOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool verbose = false;
};

json load_config(const GlobalOptions& g) { return g.config.empty() ? json::object() : config::load_json(g.config); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::io, "cannot write " + path.string());
    f << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::io, "cannot write " + path.string());
    fn(f);
}

fs::path out_dir(const GlobalOptions& g) {
    fs::create_directories(g.out);
    return g.out;
}

void log(const GlobalOptions& g, const std::string& msg) {
    if (g.verbose) std::cerr << msg << '\n';
}

struct Loaded {
    PanelDataset panel;
    ForecastPanel analyst;
};

Loaded load_source(config::DataSource src, const GlobalOptions& g) {
    if (g.seed) src.synth.seed = *g.seed;
    Loaded l;
    if (src.panel_csv) {
        std::ifstream p(*src.panel_csv);
        require(static_cast<bool>(p), ErrorKind::io, "cannot open " + *src.panel_csv);
        l.panel = read_panel_csv(p, *src.panel_csv);
        std::ifstream a(*src.analyst_csv);
        require(static_cast<bool>(a), ErrorKind::io, "cannot open " + *src.analyst_csv);
        l.analyst = read_forecast_csv(a);
        log(g, "loaded " + std::to_string(l.panel.observations.size()) + " panel rows");
    } else {
        l.panel = synth::generate_synthetic_panel(src.synth, g.threads);
        l.analyst = synth::generate_analyst_forecasts(l.panel, src.synth.theta, src.synth.delta, src.synth.f_spec);
        log(g, "generated synthetic panel with seed " + std::to_string(src.synth.seed));
    }
    return l;
}

ForecastPanel read_forecasts(const std::string& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorKind::io, "cannot open " + path);
    return read_forecast_csv(f);
}

int cmd_synth(const GlobalOptions& g) {
    auto c = config::synth_command(load_config(g));
    if (g.seed) c.synth.seed = *g.seed;
    const auto panel = synth::generate_synthetic_panel(c.synth, g.threads);
    const auto analyst = synth::generate_analyst_forecasts(panel, c.synth.theta, c.synth.delta, c.synth.f_spec);
    const auto dir = out_dir(g);
    write_with(dir / "panel.csv", [&](auto& os) { write_panel_csv(os, panel); });
    write_with(dir / "analyst_forecasts.csv", [&](auto& os) { write_forecast_csv(os, analyst); });
    write_text(dir / "synth_params.json", synth::to_json(c.synth).dump(2) + "\n");
    const double beta = synth::analytic_overreaction_beta(c.synth.theta, c.synth.delta,
                                                          c.synth.sigma_eps * c.synth.sigma_eps,
                                                          synth::news_variance(c.synth));
    std::cout << "synthetic panel: " << c.synth.n_firms << " firms x " << c.synth.n_years << " years, "
              << panel.observations.size() << " monthly rows\n"
              << "analyst forecasts: " << analyst.records.size() << " records\n"
              << "closed-form overreaction slope on news: " << format_fixed(beta, 6) << '\n'
              << "wrote " << (dir / "panel.csv").string() << ", " << (dir / "analyst_forecasts.csv").string() << '\n';
    return 0;
}

int cmd_forecast(const GlobalOptions& g) {
    auto c = config::forecast_command(load_config(g));
    c.rolling.threads = g.threads;
    const auto data = load_source(c.source, g);
    const auto panel = c.analyst_feature ? with_forecast_feature(data.panel, data.analyst, forecaster::analyst)
                                         : data.panel;
    const auto spec = c.forecaster == forecaster::gbrt ? ForecasterSpec::gbrt(c.hyper) : ForecasterSpec::linear();
    const auto run = run_rolling_forecasts(panel, spec, c.rolling);
    const auto dir = out_dir(g);
    write_with(dir / "forecasts.csv", [&](auto& os) { write_forecast_csv(os, run.forecasts); });
    write_with(dir / "consensus.csv", [&](auto& os) { write_consensus_csv(os, run.forecasts); });
    write_with(dir / "fit_provenance.csv", [&](auto& os) {
        os << "forecast_year,horizon,n_train,latest_label_index,latest_feature_index\n";
        for (const auto& f : run.fits)
            os << f.forecast_year << ',' << f.horizon << ',' << f.n_train << ',' << f.latest_label_index << ','
               << f.latest_feature_index << '\n';
    });
    std::cout << spec.label << ": " << run.fits.size() << " fits, " << run.forecasts.records.size()
              << " forecasts, look-ahead audit passed\n"
              << "target year   MSE\n";
    for (const auto& [y, m] : yearly_mse(run.forecasts, spec.label))
        std::cout << "  " << y << "       " << format_fixed(m, 4) << '\n';
    return 0;
}

int cmd_overreact(const GlobalOptions& g) {
    const auto c = config::overreact_command(load_config(g));
    const auto data = load_source(c.source, g);
    auto fp = data.analyst;
    if (c.forecasts_csv) fp.merge(read_forecasts(*c.forecasts_csv));
    std::map<std::string, FirmYearSeries> errors;
    for (const auto& name : fp.forecasters()) errors[name] = fp.forecast_errors(name);
    const auto predictor = c.predictor == "news" ? synth::news_proxy(data.panel, c.source.synth.delta)
                                                 : data.panel.annual_investment();
    const auto table = compare_forecasters(errors, c.baseline, predictor, c.fe, c.predictor);
    const auto dir = out_dir(g);
    write_with(dir / "overreaction.csv", [&](auto& os) { write_table_csv(os, table); });
    write_text(dir / "overreaction.json", to_json(table).dump(2) + "\n");
    std::cout << "error_{t+1} on " << c.predictor << "_t, fixed effects " << to_string(c.fe)
              << ", firm-clustered standard errors\n"
              << "forecaster          beta        t      N    chi2 vs " << c.baseline << '\n';
    for (const auto& r : table.rows) {
        std::string name = r.forecaster;
        name.resize(std::max<std::size_t>(name.size(), 18), ' ');
        std::cout << "  " << name << format_fixed(r.beta, 4) << "  " << format_fixed(r.t_stat, 2) << "  " << r.n_obs
                  << "  " << format_fixed(r.wald_vs_baseline->chi2, 3) << " [" << format_fixed(r.wald_vs_baseline->p_value, 3)
                  << "]\n";
    }
    return 0;
}

int cmd_sweep_lr(const GlobalOptions& g) {
    auto c = config::sweep_command(load_config(g));
    if (g.seed) c.first_seed = *g.seed;
    const auto reps = exp::standard_monte_carlo(c.standard, c.lr_grid, c.replications, c.first_seed, g.threads);
    const auto sweep = exp::summarize_sweep(reps, c.lr_grid);
    const auto dir = out_dir(g);
    write_with(dir / "learning_rate_sweep.csv", [&](auto& os) { exp::write_sweep_csv(os, sweep); });
    write_text(dir / "sweep_config.json", exp::to_json(c.standard).dump(2) + "\n");
    exp::print_sweep(std::cout, sweep);
    return 0;
}

int cmd_decompose(const GlobalOptions& g) {
    const auto c = config::decompose_command(load_config(g));
    const auto data = load_source(c.source, g);
    auto fp = data.analyst;
    if (c.forecasts_csv) fp.merge(read_forecasts(*c.forecasts_csv));
    require(fp.has_forecaster(c.forecaster), ErrorKind::data, "forecaster " + c.forecaster + " not in the inputs");
    const auto d = decompose_errors(fp.forecast_errors(c.forecaster));
    const auto dir = out_dir(g);
    write_with(dir / "decomposition.csv", [&](auto& os) { write_decomposition_csv(os, d); });
    std::cout << c.forecaster << " errors: " << d.keys.size() << " firm-years, var(total) "
              << format_fixed(stats::variance(d.total), 4) << ", var(market) "
              << format_fixed(stats::variance(d.market_component), 4) << ", var(firm) "
              << format_fixed(stats::variance(d.firm_component), 4) << ", degenerate firms "
              << d.degenerate_firms.size() << '\n';
    return 0;
}

int cmd_equilibrium(const GlobalOptions& g) {
    const auto c = config::equilibrium_command(load_config(g));
    const auto curve = eq::run_numerical_example(c.params, c.A_grid, c.lambdas, c.eps_prev, c.xbar_prev, g.threads);
    const auto dir = out_dir(g);
    write_with(dir / "curve.csv", [&](auto& os) { eq::write_curve_csv(os, curve); });
    std::cout << "lambda     A        xbar          branch\n";
    for (const auto& p : curve)
        std::cout << "  " << format_fixed(p.lambda, 2) << "   " << format_fixed(p.A, 3) << "   "
                  << format_fixed(p.xbar, 4) << "   " << eq::to_string(p.branch) << '\n';
    return 0;
}

int cmd_repro_all(const GlobalOptions& g) {
    auto c = exp::repro_config_from_json(load_config(g));
    if (g.seed) c.synth.seed = *g.seed;
    std::cout << exp::repro_all(c, out_dir(g), g.threads);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forecast overreaction pipeline"};
    app.require_subcommand(1);
    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--threads", g.threads, "worker thread cap")->check(CLI::Range(1u, 256u));
    app.add_flag("-v,--verbose", g.verbose, "progress on stderr");

    std::map<std::string, int (*)(const GlobalOptions&)> commands{
        {"synth", cmd_synth},         {"forecast", cmd_forecast},       {"overreact", cmd_overreact},
        {"sweep-lr", cmd_sweep_lr},   {"decompose", cmd_decompose},     {"equilibrium", cmd_equilibrium},
        {"repro-all", cmd_repro_all},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    try {
        for (const auto& [name, fn] : commands)
            if (app.got_subcommand(name)) return fn(g);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return e.is_validation() ? 2 : 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
