#pragma once

// Seeded Monte-Carlo replications and the synthetic analogues of the result
// tables. Everything here composes the library operations; the CLI and the
// acceptance runner only format what these functions return.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fo/equilibrium.hpp"
#include "fo/error.hpp"
#include "fo/forecast_panel.hpp"
#include "fo/gbrt.hpp"
#include "fo/harness.hpp"
#include "fo/json_util.hpp"
#include "fo/overreact.hpp"
#include "fo/parallel.hpp"
#include "fo/regress.hpp"
#include "fo/stats.hpp"
#include "fo/synth.hpp"

namespace fo::exp {

struct McSummary {
    double mean = 0.0;
    double mc_se = 0.0;
    std::size_t n = 0;
};

/// Mean and Monte-Carlo standard error; the sum runs in replication order.
inline McSummary summarize(const std::vector<double>& v) {
    McSummary s;
    s.n = v.size();
    s.mean = stats::mean(v);
    s.mc_se = v.size() >= 2 ? stats::standard_error(v) : 0.0;
    return s;
}

inline std::vector<double> learning_rate_grid() { return {0.01, 0.03, 0.04, 0.1, 0.15, 0.2, 0.25, 0.3, 0.5}; }

// --- overreaction oracle -------------------------------------------------------------

struct OracleReplication {
    double beta_two_way = 0.0;  ///< firm + year effects, the headline estimator
    double se_two_way = 0.0;
    double beta_year = 0.0;     ///< year effects only
    double beta_pooled = 0.0;   ///< no fixed effects
    double var_proxy = 0.0;
    double obs_per_firm = 0.0;
};

/// Analyst errors regressed on the date-t news proxy x_t - delta x_{t-1} for one seed.
inline OracleReplication oracle_replication(synth::SynthParams p, std::uint64_t seed, double theta) {
    p.seed = seed;
    const auto panel = synth::generate_synthetic_panel(p);
    const auto fp = synth::generate_analyst_forecasts(panel, theta, p.delta, p.f_spec);
    const auto errors = fp.forecast_errors(forecaster::analyst);
    const auto proxy = synth::news_proxy(panel, p.delta);
    const auto keys = paired_keys(errors, proxy);
    OracleReplication r;
    const auto fe = overreaction_test_on(keys, errors, proxy, FixedEffects::both, forecaster::analyst, "news");
    r.beta_two_way = fe.beta;
    r.se_two_way = fe.se;
    r.beta_year = overreaction_test_on(keys, errors, proxy, FixedEffects::year, forecaster::analyst, "news").beta;
    r.beta_pooled = overreaction_test_on(keys, errors, proxy, FixedEffects::none, forecaster::analyst, "news").beta;
    std::vector<double> x;
    for (const auto& k : keys) x.push_back(proxy.at({k.firm_id, k.year - 1}));
    r.var_proxy = stats::variance(x);
    r.obs_per_firm = static_cast<double>(keys.size()) / p.n_firms;
    return r;
}

inline std::vector<OracleReplication> oracle_monte_carlo(const synth::SynthParams& p, double theta, std::size_t reps,
                                                         std::uint64_t first_seed, unsigned threads) {
    return parallel_map(reps, threads, [&](std::size_t i) { return oracle_replication(p, first_seed + i, theta); });
}

/// Expected two-way FE slope with T observations per firm. Demeaning within
/// firm correlates the proxy's firm mean with next year's innovation, which
/// shifts the slope by -var(eps) / (T var(y)).
inline double finite_panel_expected_beta(double theta, double delta, double var_eps, double var_y, double T) {
    return -(theta * delta + 1.0 / T) * var_eps / var_y;
}

/// Paired tech / non-tech analyst slopes on one panel.
struct TechReplication {
    double beta_nontech = 0.0;
    double beta_tech = 0.0;
};

inline TechReplication tech_replication(synth::SynthParams p, std::uint64_t seed) {
    p.seed = seed;
    const auto panel = synth::generate_synthetic_panel(p);
    auto fp = synth::generate_analyst_forecasts(panel, p.theta, p.delta, p.f_spec);
    fp.merge(synth::generate_analyst_forecasts(panel, p.theta_tech, p.delta, p.f_spec, "analyst_tech"));
    const auto proxy = synth::news_proxy(panel, p.delta);
    return {overreaction_test(fp.forecast_errors(forecaster::analyst), proxy).beta,
            overreaction_test(fp.forecast_errors("analyst_tech"), proxy).beta};
}

// --- ML replications ------------------------------------------------------------------

/// The desk-scale configuration used by the Monte-Carlo comparisons.
struct StandardConfig {
    synth::SynthParams synth{};
    RollingConfig rolling = [] {
        RollingConfig c;
        c.horizons = {12, 13, 14};
        return c;
    }();
    GbrtHyperParams hyper{};
    bool analyst_feature = true;
};

inline json to_json(const StandardConfig& c) {
    return json{{"synth", synth::to_json(c.synth)},
                {"horizons", c.rolling.horizons},
                {"window_years", c.rolling.window_years},
                {"gbrt", to_json(c.hyper)},
                {"analyst_feature", c.analyst_feature}};
}

inline std::string gbrt_label(double gamma) { return "gbrt_lr" + format_number(gamma); }

struct SweepCell {
    double gamma = 0.0;
    double beta = 0.0;
    double t_stat = 0.0;
    double revision = 0.0;
    double mse = 0.0;
};

struct StandardReplication {
    double beta_analyst = 0.0;
    double t_analyst = 0.0;
    double mse_analyst = 0.0;
    double revision_analyst = 0.0;
    std::vector<SweepCell> gbrt;  ///< one per requested learning rate
    std::size_t n_obs = 0;
};

/// Panel with the analyst forecast attached as a feature, plus the analyst forecasts themselves.
struct PreparedPanel {
    PanelDataset panel;
    PanelDataset ml_panel;
    ForecastPanel analyst;
};

inline PreparedPanel prepare_panel(const synth::SynthParams& p, bool analyst_feature) {
    PreparedPanel out;
    out.panel = synth::generate_synthetic_panel(p);
    out.analyst = synth::generate_analyst_forecasts(out.panel, p.theta, p.delta, p.f_spec);
    out.ml_panel = analyst_feature ? with_forecast_feature(out.panel, out.analyst, forecaster::analyst) : out.panel;
    return out;
}

inline StandardReplication standard_replication(const StandardConfig& cfg, std::uint64_t seed,
                                                const std::vector<double>& gammas) {
    auto sp = cfg.synth;
    sp.seed = seed;
    const auto prep = prepare_panel(sp, cfg.analyst_feature);
    auto rolling = cfg.rolling;
    rolling.threads = 1;

    ForecastPanel all = run_rolling_forecasts(prep.panel, ForecasterSpec::analyst(prep.analyst), rolling).forecasts;
    for (double g : gammas) {
        auto h = cfg.hyper;
        h.learning_rate = g;
        all.merge(run_rolling_forecasts(prep.ml_panel, ForecasterSpec::gbrt(h, gbrt_label(g)), rolling).forecasts);
    }
    std::map<std::string, FirmYearSeries> errors;
    for (const auto& name : all.forecasters()) errors[name] = all.forecast_errors(name);
    const auto table = compare_forecasters(errors, forecaster::analyst, prep.panel.annual_investment());

    StandardReplication r;
    auto mse_of = [&](const std::string& name) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& [k, e] : errors.at(name)) {
            s += e * e;
            ++n;
        }
        return s / static_cast<double>(n);
    };
    for (const auto& row : table.rows) {
        if (row.forecaster == forecaster::analyst) {
            r.beta_analyst = row.beta;
            r.t_analyst = row.t_stat;
            r.n_obs = row.n_obs;
        }
    }
    r.mse_analyst = mse_of(forecaster::analyst);
    r.revision_analyst = revision_magnitude(all, forecaster::analyst);
    for (double g : gammas) {
        const auto label = gbrt_label(g);
        const auto row = std::find_if(table.rows.begin(), table.rows.end(), [&](const auto& x) { return x.forecaster == label; });
        r.gbrt.push_back({g, row->beta, row->t_stat, revision_magnitude(all, label), mse_of(label)});
    }
    return r;
}

inline std::vector<StandardReplication> standard_monte_carlo(const StandardConfig& cfg, const std::vector<double>& gammas,
                                                             std::size_t reps, std::uint64_t first_seed,
                                                             unsigned threads) {
    return parallel_map(reps, threads, [&](std::size_t i) { return standard_replication(cfg, first_seed + i, gammas); });
}

struct SweepRow {
    double gamma = 0.0;
    McSummary abs_beta;
    McSummary beta;
    McSummary revision;
    McSummary mse;
};

struct LrSweep {
    std::vector<SweepRow> rows;
    McSummary analyst_beta;
    stats::Correlation spearman_abs_beta{0.0, 1.0};
    stats::Correlation spearman_revision{0.0, 1.0};
    std::size_t reps = 0;
};

/// Learning-rate sweep over common seeds; Spearman correlations pool all (gamma, replication) cells.
inline LrSweep summarize_sweep(const std::vector<StandardReplication>& reps, const std::vector<double>& gammas) {
    LrSweep s;
    s.reps = reps.size();
    std::vector<double> g_all, b_all, r_all, analyst;
    for (const auto& r : reps) analyst.push_back(r.beta_analyst);
    s.analyst_beta = summarize(analyst);
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        std::vector<double> ab, b, rv, m;
        for (const auto& r : reps) {
            ab.push_back(std::fabs(r.gbrt[k].beta));
            b.push_back(r.gbrt[k].beta);
            rv.push_back(r.gbrt[k].revision);
            m.push_back(r.gbrt[k].mse);
            g_all.push_back(gammas[k]);
            b_all.push_back(std::fabs(r.gbrt[k].beta));
            r_all.push_back(r.gbrt[k].revision);
        }
        s.rows.push_back({gammas[k], summarize(ab), summarize(b), summarize(rv), summarize(m)});
    }
    if (gammas.size() >= 2 && reps.size() >= 1) {
        s.spearman_abs_beta = stats::spearman(g_all, b_all);
        s.spearman_revision = stats::spearman(g_all, r_all);
    }
    return s;
}

inline void write_sweep_csv(std::ostream& os, const LrSweep& s) {
    os << "learning_rate,mean_beta,mean_abs_beta,mc_se_abs_beta,mean_revision,mc_se_revision,mean_mse,replications\n";
    for (const auto& r : s.rows)
        os << format_number(r.gamma) << ',' << format_number(r.beta.mean) << ',' << format_number(r.abs_beta.mean)
           << ',' << format_number(r.abs_beta.mc_se) << ',' << format_number(r.revision.mean) << ','
           << format_number(r.revision.mc_se) << ',' << format_number(r.mse.mean) << ',' << r.abs_beta.n << '\n';
}

inline void print_sweep(std::ostream& os, const LrSweep& s) {
    os << "learning rate   mean beta   mean |beta|   (MC se)   revision    MSE\n";
    for (const auto& r : s.rows)
        os << "  " << format_fixed(r.gamma, 3) << "        " << format_fixed(r.beta.mean, 4) << "      "
           << format_fixed(r.abs_beta.mean, 4) << "     (" << format_fixed(r.abs_beta.mc_se, 4) << ")   "
           << format_fixed(r.revision.mean, 4) << "   " << format_fixed(r.mse.mean, 4) << '\n';
    os << "analyst mean beta " << format_fixed(s.analyst_beta.mean, 4) << "; Spearman(|beta|, lr) "
       << format_fixed(s.spearman_abs_beta.rho, 3) << " p=" << format_number(s.spearman_abs_beta.p_value) << '\n';
}

// --- full synthetic reproduction -------------------------------------------------------

struct ReproConfig {
    synth::SynthParams synth{};
    RollingConfig rolling{};
    GbrtHyperParams hyper{};
    std::vector<double> lr_grid = learning_rate_grid();
    int cv_folds = 10;
    eq::EquilibriumParams equilibrium{};
    std::vector<double> lambdas{0.0, 0.9};
    double eps_prev = 10.0;
    double xbar_prev = 1000.0;
};

inline ReproConfig repro_config_from_json(const json& j) {
    check_keys(j, {"synth", "gbrt", "horizons", "window_years", "lr_grid", "cv_folds", "equilibrium", "lambdas",
                   "eps_prev", "xbar_prev"},
               "repro config");
    ReproConfig c;
    if (j.contains("synth")) c.synth = synth::synth_params_from_json(j.at("synth"));
    if (j.contains("gbrt")) c.hyper = gbrt_hyper_from_json(j.at("gbrt"));
    read_optional(j, "horizons", c.rolling.horizons, "repro config");
    read_optional(j, "window_years", c.rolling.window_years, "repro config");
    read_optional(j, "lr_grid", c.lr_grid, "repro config");
    read_optional(j, "cv_folds", c.cv_folds, "repro config");
    if (j.contains("equilibrium")) c.equilibrium = eq::equilibrium_params_from_json(j.at("equilibrium"));
    read_optional(j, "lambdas", c.lambdas, "repro config");
    read_optional(j, "eps_prev", c.eps_prev, "repro config");
    read_optional(j, "xbar_prev", c.xbar_prev, "repro config");
    for (double g : c.lr_grid)
        require(g > 0 && g <= 1, ErrorKind::config, "lr_grid entries must lie in (0, 1]");
    return c;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::io, "cannot write " + path.string());
    f << content;
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

inline std::vector<double> values_of(const std::map<int, double>& m) {
    std::vector<double> v;
    for (const auto& [k, x] : m) v.push_back(x);
    return v;
}

}  // namespace detail

/// Writes every synthetic-analogue table and curve into `dir`; returns a human summary.
inline std::string repro_all(const ReproConfig& cfg, const std::filesystem::path& dir, unsigned threads) {
    std::filesystem::create_directories(dir);
    std::ostringstream summary;
    auto rolling = cfg.rolling;
    rolling.threads = threads;

    const auto prep = prepare_panel(cfg.synth, true);
    detail::write_file(dir / "synth_params.json", synth::to_json(cfg.synth).dump(2) + "\n");
    detail::write_file(dir / "panel.csv", detail::render([&](auto& os) { write_panel_csv(os, prep.panel); }));

    // Forecasts: analyst passthrough, GBRT with and without the analyst column, linear.
    ForecastPanel fp = run_rolling_forecasts(prep.panel, ForecasterSpec::analyst(prep.analyst), rolling).forecasts;
    const auto gbrt_run = run_rolling_forecasts(prep.ml_panel, ForecasterSpec::gbrt(cfg.hyper), rolling);
    fp.merge(gbrt_run.forecasts);
    fp.merge(run_rolling_forecasts(prep.ml_panel, ForecasterSpec::linear(), rolling).forecasts);
    const auto no_analyst = run_rolling_forecasts(prep.panel, ForecasterSpec::gbrt(cfg.hyper, "gbrt_no_analyst"), rolling);
    fp.merge(no_analyst.forecasts);
    const auto base_only = select_features(prep.panel, {"last_outcome", "z"});
    fp.merge(run_rolling_forecasts(base_only, ForecasterSpec::gbrt(cfg.hyper, "gbrt_outcome_z"), rolling).forecasts);
    detail::write_file(dir / "forecasts.csv", detail::render([&](auto& os) { write_forecast_csv(os, fp); }));
    detail::write_file(dir / "consensus.csv", detail::render([&](auto& os) { write_consensus_csv(os, fp); }));

    // Accuracy: MSE, out-of-sample R^2 against the lagged outcome, DM against the analyst.
    {
        std::ostringstream t;
        t << "forecaster,mse,oos_r2,dm_vs_analyst,dm_p_value,periods\n";
        summary << "Forecast accuracy (target years with all forecasters)\n";
        const auto outcomes = prep.panel.annual_outcomes();
        const auto analyst_yearly = yearly_mse(fp, forecaster::analyst);
        for (const auto& name : fp.forecasters()) {
            std::vector<double> a, f, naive;
            for (const auto& [k, c] : fp.consensus_of(name)) {
                const auto x = outcomes.find(k);
                const auto lag = outcomes.find({k.firm_id, k.year - 1});
                if (x == outcomes.end() || lag == outcomes.end()) continue;
                a.push_back(x->second);
                f.push_back(c);
                naive.push_back(lag->second);
            }
            const double m = mse(a, f);
            const double r2 = oos_r2(a, f, naive);
            std::string dm_cell = ",", periods = "0";
            const auto yearly = yearly_mse(fp, name);
            if (name != forecaster::analyst) {
                std::vector<double> la, lb;
                for (const auto& [y, v] : yearly)
                    if (analyst_yearly.count(y)) {
                        la.push_back(v);
                        lb.push_back(analyst_yearly.at(y));
                    }
                periods = std::to_string(la.size());
                if (la.size() >= 8) {
                    const auto dm = diebold_mariano(la, lb);
                    dm_cell = format_number(dm.dm_stat) + "," + format_number(dm.p_value);
                }
            }
            t << name << ',' << format_number(m) << ',' << format_number(r2) << ',' << dm_cell << ',' << periods << '\n';
            summary << "  " << name << std::string(name.size() < 18 ? 18 - name.size() : 1, ' ') << "MSE "
                    << format_fixed(m, 4) << "  OOS R2 " << format_fixed(r2, 4) << '\n';
        }
        detail::write_file(dir / "table1_accuracy.csv", t.str());
    }

    // Overreaction of each forecaster, Wald tests against the analyst.
    const auto investment = prep.panel.annual_investment();
    {
        std::map<std::string, FirmYearSeries> errors;
        for (const auto& name : {forecaster::analyst, forecaster::gbrt, forecaster::linear})
            errors[name] = fp.forecast_errors(name);
        const auto table = compare_forecasters(errors, forecaster::analyst, investment);
        detail::write_file(dir / "table2_overreaction.csv", detail::render([&](auto& os) { write_table_csv(os, table); }));
        detail::write_file(dir / "table2_overreaction.json", to_json(table).dump(2) + "\n");
        summary << "Overreaction (error on investment, firm + year effects, firm-clustered t)\n";
        for (const auto& r : table.rows)
            summary << "  " << r.forecaster << ": beta " << format_fixed(r.beta, 4) << " (t " << format_fixed(r.t_stat, 2)
                    << "), chi2 vs analyst " << format_fixed(r.wald_vs_baseline->chi2, 3) << '\n';
    }

    // Variable sets.
    {
        std::map<std::string, FirmYearSeries> errors;
        for (const auto& name : {forecaster::analyst, forecaster::gbrt, std::string("gbrt_no_analyst"),
                                 std::string("gbrt_outcome_z")})
            errors[name] = fp.forecast_errors(name);
        const auto table = compare_forecasters(errors, forecaster::analyst, investment);
        detail::write_file(dir / "table3_variable_sets.csv", detail::render([&](auto& os) { write_table_csv(os, table); }));
    }

    // Learning-rate sweep on this panel.
    {
        std::vector<std::pair<double, std::string>> labels;
        ForecastPanel sweep = fp.relabeled(forecaster::analyst, forecaster::analyst);
        for (double g : cfg.lr_grid) {
            auto h = cfg.hyper;
            h.learning_rate = g;
            sweep.merge(run_rolling_forecasts(prep.ml_panel, ForecasterSpec::gbrt(h, gbrt_label(g)), rolling).forecasts);
            labels.emplace_back(g, gbrt_label(g));
        }
        std::map<std::string, FirmYearSeries> errors;
        for (const auto& name : sweep.forecasters()) errors[name] = sweep.forecast_errors(name);
        const auto table = compare_forecasters(errors, forecaster::analyst, investment);
        std::ostringstream t;
        t << "learning_rate,beta,t_stat,chi2_vs_analyst,p_value,revision,n_obs\n";
        summary << "Learning-rate sweep (single panel)\n";
        for (const auto& [g, label] : labels) {
            const auto& r = *std::find_if(table.rows.begin(), table.rows.end(), [&](const auto& x) { return x.forecaster == label; });
            const double rev = revision_magnitude(sweep, label);
            t << format_number(g) << ',' << format_number(r.beta) << ',' << format_number(r.t_stat) << ','
              << format_number(r.wald_vs_baseline->chi2) << ',' << format_number(r.wald_vs_baseline->p_value) << ','
              << format_number(rev) << ',' << r.n_obs << '\n';
            summary << "  lr " << format_fixed(g, 2) << ": beta " << format_fixed(r.beta, 4) << " (t "
                    << format_fixed(r.t_stat, 2) << "), revision " << format_fixed(rev, 4) << '\n';
        }
        detail::write_file(dir / "table4_learning_rate.csv", t.str());
    }

    // Market versus firm-specific components.
    {
        std::ostringstream t;
        t << "forecaster,var_error,var_market,var_firm,mean_beta_im,degenerate_firms\n";
        for (const auto& name : {forecaster::analyst, forecaster::gbrt, forecaster::linear}) {
            const auto d = decompose_errors(fp.forecast_errors(name));
            if (name == forecaster::gbrt)
                detail::write_file(dir / "table5_decomposition_gbrt.csv",
                                   detail::render([&](auto& os) { write_decomposition_csv(os, d); }));
            std::vector<double> b;
            for (const auto& [f, v] : d.beta_im) b.push_back(v);
            t << name << ',' << format_number(stats::variance(d.total)) << ','
              << format_number(stats::variance(d.market_component)) << ','
              << format_number(stats::variance(d.firm_component)) << ',' << format_number(stats::mean(b)) << ','
              << d.degenerate_firms.size() << '\n';
        }
        detail::write_file(dir / "table5_decomposition.csv", t.str());
    }

    // Yearly MSE ratio of GBRT to analysts.
    {
        std::ostringstream t;
        t << "fiscal_year,mse_ratio_gbrt_over_analyst\n";
        for (const auto& [y, ratio] : yearly_mse_ratio(fp, forecaster::gbrt, forecaster::analyst))
            t << y << ',' << format_number(ratio) << '\n';
        detail::write_file(dir / "figure2_mse_ratio.csv", t.str());
    }

    // Tech and non-tech analysts on the same panel.
    {
        auto both = prep.analyst;
        both.merge(synth::generate_analyst_forecasts(prep.panel, cfg.synth.theta_tech, cfg.synth.delta,
                                                     cfg.synth.f_spec, "analyst_tech"));
        std::map<std::string, FirmYearSeries> errors{{forecaster::analyst, both.forecast_errors(forecaster::analyst)},
                                                     {"analyst_tech", both.forecast_errors("analyst_tech")}};
        const auto table = compare_forecasters(errors, forecaster::analyst, investment);
        detail::write_file(dir / "tech_analysts.csv", detail::render([&](auto& os) { write_table_csv(os, table); }));
    }

    // Stratified cross-validation.
    {
        json cv = json::object();
        const auto sample = annual_sample(prep.ml_panel);
        for (const auto& spec : {ForecasterSpec::gbrt(cfg.hyper), ForecasterSpec::linear(), ForecasterSpec::mean()}) {
            const auto r = kfold_stratified_cv(sample, spec, cfg.cv_folds, cfg.synth.seed);
            cv[spec.label] = json{{"mean_oos_r2", r.mean_r2}, {"fold_oos_r2", r.fold_r2}};
        }
        detail::write_file(dir / "cv_oos_r2.json", cv.dump(2) + "\n");
    }

    // Equilibrium curve.
    {
        const auto curve = eq::run_numerical_example(cfg.equilibrium, eq::default_A_grid(), cfg.lambdas, cfg.eps_prev,
                                                     cfg.xbar_prev, threads);
        detail::write_file(dir / "figure3_curve.csv", detail::render([&](auto& os) { eq::write_curve_csv(os, curve); }));
        detail::write_file(dir / "equilibrium_params.json", eq::to_json(cfg.equilibrium).dump(2) + "\n");
    }

    // Provenance of every fit, for the look-ahead audit trail.
    {
        std::ostringstream t;
        t << "forecast_year,horizon,n_train,latest_label_year,latest_label_month,latest_feature_year,latest_feature_month\n";
        for (const auto& f : gbrt_run.fits)
            t << f.forecast_year << ',' << f.horizon << ',' << f.n_train << ',' << f.latest_label_index / 12 << ','
              << f.latest_label_index % 12 + 1 << ',' << f.latest_feature_index / 12 << ','
              << f.latest_feature_index % 12 + 1 << '\n';
        detail::write_file(dir / "gbrt_fit_provenance.csv", t.str());
    }
    detail::write_file(dir / "summary.txt", summary.str());
    return summary.str();
}

}  // namespace fo::exp
