#include "test_util.hpp"

#include <cmath>

#include "fo/experiments.hpp"
#include "fo/overreact.hpp"
#include "fo/synth.hpp"

using namespace fo;

namespace {

struct RationalCase {
    FirmYearSeries errors;
    FirmYearSeries investment;
};

RationalCase rational_case(int firms, int years, std::uint64_t seed) {
    synth::SynthParams p;
    p.n_firms = firms;
    p.n_years = years;
    p.seed = seed;
    p.theta = 0.0;
    p.n_features_noise = 0;
    const auto panel = synth::generate_synthetic_panel(p);
    const auto fp = synth::generate_analyst_forecasts(panel, 0.0, p.delta, p.f_spec);
    return {fp.forecast_errors(forecaster::analyst), panel.annual_investment()};
}

double rational_coverage(int firms, int years, int reps) {
    int inside = 0;
    for (int s = 1; s <= reps; ++s) {
        const auto c = rational_case(firms, years, static_cast<std::uint64_t>(s));
        const auto r = overreaction_test(c.errors, c.investment);
        if (std::fabs(r.beta) <= 2.0 * r.se) ++inside;
    }
    return static_cast<double>(inside) / reps;
}

FirmYearSeries overreacting_errors(const PanelDataset& panel, double theta) {
    return synth::generate_analyst_forecasts(panel, theta, 0.785, synth::FSpec{}).forecast_errors(forecaster::analyst);
}

}  // namespace

TEST_CASE("rational errors are unpredictable over long firm histories", "[overreact]") {
    REQUIRE(rational_coverage(20, 100, 200) >= 0.90);
}

TEST_CASE("rational errors are unpredictable on the standard panel", "[overreact][direction]") {
    REQUIRE(rational_coverage(50, 20, 200) >= 0.90);
}

TEST_CASE("overreacting forecasts load negatively on investment", "[overreact]") {
    synth::SynthParams p;
    const auto panel = synth::generate_synthetic_panel(p);
    const auto r = overreaction_test(overreacting_errors(panel, 0.991), panel.annual_investment());
    REQUIRE(r.beta < 0.0);
    REQUIRE(r.t_stat < -2.0);
    REQUIRE(r.fe == FixedEffects::both);
    REQUIRE(r.n_obs == 50u * 19u);
    REQUIRE(r.fit.vcov_clustered.has_value());
}

TEST_CASE("flipping the predictor flips the slope exactly", "[overreact]") {
    synth::SynthParams p;
    const auto panel = synth::generate_synthetic_panel(p);
    const auto errors = overreacting_errors(panel, 0.991);
    auto inv = panel.annual_investment();
    const auto a = overreaction_test(errors, inv);
    for (auto& [k, v] : inv) v = -v;
    const auto b = overreaction_test(errors, inv);
    REQUIRE(b.beta == Catch::Approx(-a.beta).epsilon(1e-12));
    REQUIRE(b.se == Catch::Approx(a.se).epsilon(1e-12));
}

TEST_CASE("a constant added to every error leaves the slope unchanged", "[overreact]") {
    synth::SynthParams p;
    const auto panel = synth::generate_synthetic_panel(p);
    auto errors = overreacting_errors(panel, 0.5);
    const auto inv = panel.annual_investment();
    for (auto fe : {FixedEffects::none, FixedEffects::firm, FixedEffects::year, FixedEffects::both}) {
        const auto a = overreaction_test(errors, inv, fe);
        auto shifted = errors;
        for (auto& [k, v] : shifted) v += 7.5;
        const auto b = overreaction_test(shifted, inv, fe);
        REQUIRE(b.beta == Catch::Approx(a.beta).epsilon(1e-10));
        REQUIRE(b.se == Catch::Approx(a.se).epsilon(1e-8));
    }
}

TEST_CASE("misaligned or tiny samples are rejected", "[overreact]") {
    FirmYearSeries e{{{"A", 2001}, 1.0}, {{"A", 2002}, 2.0}};
    FirmYearSeries x{{{"B", 2000}, 1.0}};
    REQUIRE_ERROR_KIND(overreaction_test(e, x), ErrorKind::alignment);
    FirmYearSeries x2{{{"A", 2000}, 1.0}, {{"A", 2001}, 3.0}};
    REQUIRE_ERROR_KIND(overreaction_test(e, x2), ErrorKind::data);
}

TEST_CASE("comparison table against a baseline", "[overreact]") {
    synth::SynthParams p;
    const auto panel = synth::generate_synthetic_panel(p);
    auto high = overreacting_errors(panel, 0.991);
    const auto low = overreacting_errors(panel, 0.2);
    high.erase(high.begin());
    const auto inv = panel.annual_investment();
    const auto t = compare_forecasters({{"high", high}, {"low", low}, {"same", high}}, "high", inv);
    REQUIRE(t.rows.size() == 3);
    REQUIRE(t.dropped == 1);
    for (const auto& r : t.rows) REQUIRE(r.n_obs == t.rows[0].n_obs);
    REQUIRE(t.rows[0].forecaster == "high");
    REQUIRE(t.rows[0].wald_vs_baseline->chi2 == 0.0);
    REQUIRE(t.rows[2].wald_vs_baseline->chi2 == 0.0);
    REQUIRE(t.rows[1].wald_vs_baseline->chi2 > 10.0);
    REQUIRE(std::fabs(t.rows[1].beta) < std::fabs(t.rows[0].beta));
    REQUIRE_ERROR_KIND(compare_forecasters({{"a", high}}, "b", inv), ErrorKind::data);
    REQUIRE_ERROR_KIND(compare_forecasters({{"a", high}, {"b", FirmYearSeries{{{"Z", 1}, 0.0}}}}, "a", inv),
                       ErrorKind::coverage);
}

TEST_CASE("Wald statistic is zero exactly when the slopes coincide", "[overreact]") {
    synth::SynthParams p;
    const auto panel = synth::generate_synthetic_panel(p);
    const auto inv = panel.annual_investment();
    const auto base = overreacting_errors(panel, 0.991);
    // Firm constants are absorbed; a multiple of the predictor moves the slope.
    auto firm_shift = base;
    for (auto& [k, v] : firm_shift) v += static_cast<double>(k.firm_id.back() - '0');
    auto slope_shift = base;
    for (auto& [k, v] : slope_shift) {
        const auto p_it = inv.find({k.firm_id, k.year - 1});
        if (p_it != inv.end()) v += 0.1 * p_it->second;
    }
    const auto t = compare_forecasters({{"base", base}, {"firm", firm_shift}, {"slope", slope_shift}}, "base", inv);
    REQUIRE(t.rows[1].beta == Catch::Approx(t.rows[0].beta).epsilon(1e-10));
    REQUIRE(t.rows[1].wald_vs_baseline->chi2 == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(t.rows[2].beta != Catch::Approx(t.rows[0].beta).epsilon(1e-6));
    REQUIRE(t.rows[2].wald_vs_baseline->chi2 > 0.0);
}

TEST_CASE("analysts overreact more than boosted trees on the standard configuration", "[overreact]") {
    exp::StandardConfig cfg;
    const auto r = exp::standard_replication(cfg, 1, {0.1});
    REQUIRE(std::fabs(r.gbrt.front().beta) <= std::fabs(r.beta_analyst));
}

TEST_CASE("slower learning rates overreact less", "[overreact][direction]") {
    exp::StandardConfig cfg;
    const auto reps = exp::standard_monte_carlo(cfg, {0.01, 0.1}, 200, 1, 1);
    int wins = 0;
    for (const auto& r : reps)
        if (std::fabs(r.gbrt[0].beta) < std::fabs(r.gbrt[1].beta)) ++wins;
    REQUIRE(wins >= 180);
}

TEST_CASE("decomposition identity and hand-checked loadings", "[overreact]") {
    // Firm A moves one for one with the market, firm B twice as much, firm C against it.
    const double m[4] = {1.0, -2.0, 0.5, 3.0};
    FirmYearSeries e;
    for (int t = 0; t < 4; ++t) {
        e[{"A", 2000 + t}] = m[t] + 1.0;
        e[{"B", 2000 + t}] = 2.0 * m[t];
        e[{"C", 2000 + t}] = 0.0 * m[t] - 4.0;
    }
    const auto d = decompose_errors(e);
    for (int t = 0; t < 4; ++t) REQUIRE(d.market_error.at(2000 + t) == Catch::Approx((3.0 * m[t] - 3.0) / 3.0));
    // r_t = m_t - 1, so A = r + 2, B = 2 r + 2, C = -4.
    REQUIRE(d.beta_im.at("A") == Catch::Approx(1.0));
    REQUIRE(d.beta_im.at("B") == Catch::Approx(2.0));
    REQUIRE(d.beta_im.at("C") == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(d.intercept.at("A") == Catch::Approx(2.0));
    REQUIRE(d.intercept.at("B") == Catch::Approx(2.0));
    for (std::size_t i = 0; i < d.keys.size(); ++i)
        REQUIRE(std::fabs(d.market_component[i] + d.firm_component[i] - d.total[i]) <= 1e-12);
}

TEST_CASE("identical errors across firms are all market", "[overreact]") {
    FirmYearSeries e;
    RandomStream rng(3, 1);
    for (int t = 0; t < 8; ++t) {
        const double v = rng.normal();
        for (const char* f : {"A", "B", "C", "D"}) e[{f, 2000 + t}] = v;
    }
    const auto d = decompose_errors(e);
    for (const auto& [f, b] : d.beta_im) REQUIRE(b == Catch::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < d.keys.size(); ++i) {
        REQUIRE(d.market_component[i] == Catch::Approx(d.total[i]).margin(1e-12));
        REQUIRE(std::fabs(d.firm_component[i] - d.intercept.at(d.keys[i].firm_id)) < 1e-12);
    }
}

TEST_CASE("independent errors leave little for the market component", "[overreact]") {
    // With a balanced panel the loadings average to exactly one, so the check is on the
    // variance the market component carries: about 1 / (T - 1) of the total for pure noise.
    FirmYearSeries e;
    RandomStream rng(4, 1);
    const int T = 20;
    for (int f = 0; f < 500; ++f)
        for (int t = 0; t < T; ++t) e[{"F" + std::to_string(f), 2000 + t}] = rng.normal();
    const auto d = decompose_errors(e);
    double ss_market = 0, ss_total = 0, mean_beta = 0;
    for (std::size_t i = 0; i < d.total.size(); ++i) {
        ss_market += d.market_component[i] * d.market_component[i];
        ss_total += d.total[i] * d.total[i];
    }
    for (const auto& [f, b] : d.beta_im) mean_beta += b / 500.0;
    REQUIRE(mean_beta == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(ss_market / ss_total < 0.1);
    for (const auto& [y, r] : d.market_error) REQUIRE(std::fabs(r) < 0.25);
}

TEST_CASE("planted market loading is recovered", "[overreact]") {
    FirmYearSeries e;
    RandomStream rng(5, 1);
    const int T = 20, N = 500;
    std::vector<double> m(T);
    for (auto& v : m) v = rng.normal();
    for (int f = 0; f < N; ++f)
        for (int t = 0; t < T; ++t)
            e[{"F" + std::to_string(1000 + f), 2000 + t}] = (f % 2 == 0 ? 2.0 : 0.0) * m[static_cast<std::size_t>(t)] +
                                                            rng.normal();
    const auto d = decompose_errors(e);
    double loaded = 0;
    for (int f = 0; f < N; f += 2) loaded += d.beta_im.at("F" + std::to_string(1000 + f)) / (N / 2);
    REQUIRE(loaded == Catch::Approx(2.0).margin(0.05));
}

TEST_CASE("constant market error is flagged as degenerate", "[overreact]") {
    FirmYearSeries e;
    for (int t = 0; t < 4; ++t) {
        e[{"A", 2000 + t}] = 1.0 + t;
        e[{"B", 2000 + t}] = 1.0 - t;
    }
    const auto d = decompose_errors(e);
    REQUIRE(d.degenerate_firms.size() == 2);
    REQUIRE(d.beta_im.at("A") == 0.0);
    FirmYearSeries short_firm{{{"A", 2000}, 1.0}, {{"A", 2001}, 2.0}};
    REQUIRE_ERROR_KIND(decompose_errors(short_firm), ErrorKind::data);
}

TEST_CASE("revision magnitude over consecutive horizons", "[overreact]") {
    ForecastPanel fp;
    const double v[4] = {1.0, 4.0, 2.0, 2.5};
    for (int i = 0; i < 4; ++i) {
        const auto [y, m] = forecast_date(2001, 12 + i);
        fp.records.push_back({"A", 2001, 12 + i, y, m, "f", v[i]});
    }
    fp.finalize();
    REQUIRE(revision_magnitude(fp, "f") == Catch::Approx((3.0 + 2.0 + 0.5) / 3.0));
    REQUIRE_ERROR_KIND(revision_magnitude(fp, "g"), ErrorKind::data);
}
