#pragma once

// Synthetic earnings panel and the diagnostic-expectations analyst.
//
// Outcome process, per firm i and year t:
//     x[t+1] = delta * x[t] + f(z[t]) + eps[t+1],   eps ~ N(0, sigma_eps^2),  z ~ N(0, sigma_z^2)
// Analyst forecast made during year t for year t+1:
//     F_t x[t+1] = delta_hat * x[t] + f_hat(z[t]) + theta * delta_hat * eps[t]
// Investment proxies the date-t news x[t] - delta * x[t-1] = f(z[t-1]) + eps[t]:
//     investment[t] = 0.1 * logistic(news / sigma_eps) + 0.01 * N(0, 1), clipped at zero.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fo/error.hpp"
#include "fo/forecast_panel.hpp"
#include "fo/json_util.hpp"
#include "fo/panel.hpp"
#include "fo/parallel.hpp"
#include "fo/rng.hpp"

namespace fo::synth {

inline constexpr int kFirstFiscalYear = 1990;
inline constexpr int kBurnInYears = 2;
inline constexpr double kInvestmentScale = 0.1;
inline constexpr double kInvestmentNoise = 0.01;

/// Firm component f(z).
struct FSpec {
    enum class Kind { zero, linear, step };
    Kind kind = Kind::linear;
    /// linear: {c} for f(z) = c z.  step: {lo, hi} for f(z) = lo if z < 0 else hi.
    std::vector<double> coef{1.0};

    static FSpec zero() { return {Kind::zero, {}}; }
    static FSpec linear(double c) { return {Kind::linear, {c}}; }
    static FSpec step(double lo, double hi) { return {Kind::step, {lo, hi}}; }

    double operator()(double z) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::linear: return coef[0] * z;
            case Kind::step: return z < 0.0 ? coef[0] : coef[1];
        }
        return 0.0;
    }

    void validate() const {
        const std::size_t want = kind == Kind::zero ? 0 : kind == Kind::linear ? 1 : 2;
        require(coef.size() == want, ErrorKind::parameter, "f_spec has the wrong number of coefficients");
        for (double c : coef) require(std::isfinite(c), ErrorKind::parameter, "f_spec coefficient is not finite");
    }
};

struct SynthParams {
    int n_firms = 50;
    int n_years = 20;
    double delta = 0.785;
    double theta = 0.991;
    double theta_tech = 0.3;
    double sigma_eps = 1.0;
    FSpec f_spec{};
    double sigma_z = 1.0;
    int n_features_noise = 2;
    std::uint64_t seed = 1;

    void validate() const {
        require(n_firms >= 2, ErrorKind::parameter, "n_firms must be at least 2");
        require(n_years >= 3, ErrorKind::parameter, "n_years must be at least 3");
        require(std::isfinite(delta) && std::fabs(delta) < 1.0, ErrorKind::parameter, "|delta| must be < 1");
        require(std::isfinite(theta) && theta >= 0.0, ErrorKind::parameter, "theta must be >= 0");
        require(std::isfinite(theta_tech) && theta_tech >= 0.0, ErrorKind::parameter, "theta_tech must be >= 0");
        require(std::isfinite(sigma_eps) && sigma_eps > 0.0, ErrorKind::parameter, "sigma_eps must be > 0");
        require(std::isfinite(sigma_z) && sigma_z >= 0.0, ErrorKind::parameter, "sigma_z must be >= 0");
        require(n_features_noise >= 0, ErrorKind::parameter, "n_features_noise must be >= 0");
        f_spec.validate();
    }
};

// --- JSON --------------------------------------------------------------------

inline json to_json(const FSpec& f) {
    static constexpr const char* names[] = {"zero", "linear", "step"};
    return json{{"kind", names[static_cast<int>(f.kind)]}, {"coef", f.coef}};
}

inline FSpec fspec_from_json(const json& j) {
    check_keys(j, {"kind", "coef"}, "f_spec");
    FSpec f;
    const std::string kind = j.value("kind", std::string("linear"));
    if (kind == "zero") f = FSpec::zero();
    else if (kind == "linear") f = FSpec::linear(1.0);
    else if (kind == "step") f = FSpec::step(0.0, 1.0);
    else fail(ErrorKind::config, "f_spec.kind must be zero, linear or step");
    read_optional(j, "coef", f.coef, "f_spec");
    f.validate();
    return f;
}

inline json to_json(const SynthParams& p) {
    return json{{"n_firms", p.n_firms},     {"n_years", p.n_years},       {"delta", p.delta},
                {"theta", p.theta},         {"theta_tech", p.theta_tech}, {"sigma_eps", p.sigma_eps},
                {"f_spec", to_json(p.f_spec)}, {"sigma_z", p.sigma_z},    {"n_features_noise", p.n_features_noise},
                {"seed", p.seed}};
}

inline SynthParams synth_params_from_json(const json& j) {
    check_keys(j,
               {"n_firms", "n_years", "delta", "theta", "theta_tech", "sigma_eps", "f_spec", "sigma_z",
                "n_features_noise", "seed"},
               "SynthParams");
    SynthParams p;
    read_optional(j, "n_firms", p.n_firms, "SynthParams");
    read_optional(j, "n_years", p.n_years, "SynthParams");
    read_optional(j, "delta", p.delta, "SynthParams");
    read_optional(j, "theta", p.theta, "SynthParams");
    read_optional(j, "theta_tech", p.theta_tech, "SynthParams");
    read_optional(j, "sigma_eps", p.sigma_eps, "SynthParams");
    if (j.contains("f_spec")) p.f_spec = fspec_from_json(j.at("f_spec"));
    read_optional(j, "sigma_z", p.sigma_z, "SynthParams");
    read_optional(j, "n_features_noise", p.n_features_noise, "SynthParams");
    read_optional(j, "seed", p.seed, "SynthParams");
    p.validate();
    return p;
}

// --- generation ----------------------------------------------------------------

inline std::string firm_name(int index, int n_firms) {
    const int width = std::max<int>(4, static_cast<int>(std::to_string(n_firms - 1).size()));
    std::string digits = std::to_string(index);
    return "F" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

inline std::vector<std::string> feature_names(const SynthParams& p) {
    std::vector<std::string> names{"last_outcome", "z"};
    for (int k = 0; k < p.n_features_noise; ++k) names.push_back("noise_" + std::to_string(k));
    return names;
}

namespace detail {

inline std::vector<PanelObservation> generate_firm(const SynthParams& p, int firm) {
    RandomStream rng(p.seed, static_cast<std::uint64_t>(firm) + 1);
    const int total = kBurnInYears + p.n_years;
    const double stationary_sd = p.sigma_eps / std::sqrt(1.0 - p.delta * p.delta);
    const std::string id = firm_name(firm, p.n_firms);

    std::vector<PanelObservation> rows;
    rows.reserve(static_cast<std::size_t>(p.n_years) * 12);
    double x_prev = rng.normal(0.0, stationary_sd);
    double z_prev = p.sigma_z * rng.normal();
    for (int k = 1; k < total; ++k) {
        const double eps = p.sigma_eps * rng.normal();
        const double x = p.delta * x_prev + p.f_spec(z_prev) + eps;
        const double z = p.sigma_z * rng.normal();
        const double news = x - p.delta * x_prev;
        const double logistic = 1.0 / (1.0 + std::exp(-news / p.sigma_eps));
        const double investment = std::max(0.0, kInvestmentScale * logistic + kInvestmentNoise * rng.normal());
        const bool keep = k >= kBurnInYears;
        for (int m = 1; m <= 12; ++m) {
            std::vector<double> feats{x, z};
            for (int j = 0; j < p.n_features_noise; ++j) feats.push_back(rng.normal());
            if (!keep) continue;
            rows.push_back({id, kFirstFiscalYear + (k - kBurnInYears), m, x, investment, eps, z, std::move(feats)});
        }
        x_prev = x;
        z_prev = z;
    }
    return rows;
}

}  // namespace detail

/// Simulates the panel; firms are generated independently on their own streams.
inline PanelDataset generate_synthetic_panel(const SynthParams& params, unsigned threads = 1) {
    params.validate();
    auto per_firm = parallel_map(static_cast<std::size_t>(params.n_firms), threads,
                                 [&](std::size_t i) { return detail::generate_firm(params, static_cast<int>(i)); });
    PanelDataset panel;
    panel.feature_names = feature_names(params);
    panel.provenance = "synthetic:" + to_json(params).dump();
    for (auto& rows : per_firm)
        for (auto& r : rows) panel.observations.push_back(std::move(r));
    return panel;
}

/// Diagnostic-expectations forecasts for every firm-year t of the panel, targeting t + 1.
///
/// Each annual forecast is repeated for horizons 12..23 (made in months
/// Dec..Jan of year t), so the monthly consensus equals the annual value.
inline ForecastPanel generate_analyst_forecasts(const PanelDataset& panel, double theta, double delta_hat,
                                                const FSpec& f_hat, const std::string& label = forecaster::analyst) {
    require(std::isfinite(theta) && theta >= 0.0, ErrorKind::parameter, "theta must be >= 0");
    f_hat.validate();
    ForecastPanel fp;
    fp.realized = panel.annual_outcomes();
    for (const auto& o : panel.observations) {
        if (o.month != 1) continue;
        require(o.latent_eps.has_value() && o.latent_z.has_value(), ErrorKind::oracle_unavailable,
                "panel lacks latent shocks for " + o.firm_id + " " + std::to_string(o.fiscal_year));
        const double value = delta_hat * o.outcome + f_hat(*o.latent_z) + theta * delta_hat * *o.latent_eps;
        for (int h = kMinHorizon; h <= kMaxHorizon; ++h) {
            const auto [year, month] = forecast_date(o.fiscal_year + 1, h);
            fp.records.push_back({o.firm_id, o.fiscal_year + 1, h, year, month, label, value});
        }
    }
    fp.finalize();
    return fp;
}

/// -theta * delta * var(eps) / var(y): slope of the forecast error on date-t news.
inline double analytic_overreaction_beta(double theta, double delta, double var_eps, double var_y) {
    require(var_y > 0.0, ErrorKind::domain, "var_y must be positive");
    return -theta * delta * var_eps / var_y;
}

/// Population variance of the news x[t] - delta x[t-1] under the default z law.
inline double news_variance(const SynthParams& p) {
    switch (p.f_spec.kind) {
        case FSpec::Kind::zero: return p.sigma_eps * p.sigma_eps;
        case FSpec::Kind::linear: {
            const double c = p.f_spec.coef[0];
            return p.sigma_eps * p.sigma_eps + c * c * p.sigma_z * p.sigma_z;
        }
        case FSpec::Kind::step: {
            const double d = p.f_spec.coef[1] - p.f_spec.coef[0];
            return p.sigma_eps * p.sigma_eps + (p.sigma_z > 0 ? 0.25 * d * d : 0.0);
        }
    }
    return p.sigma_eps * p.sigma_eps;
}

/// Date-t news x[t] - delta x[t-1] keyed by (firm, t); the first year of each firm has none.
inline std::map<FirmYear, double> news_proxy(const PanelDataset& panel, double delta) {
    const auto outcomes = panel.annual_outcomes();
    std::map<FirmYear, double> out;
    for (const auto& [k, x] : outcomes) {
        const auto prev = outcomes.find({k.firm_id, k.year - 1});
        if (prev != outcomes.end()) out.emplace(k, x - delta * prev->second);
    }
    return out;
}

/// Sample forecast MSE of the analyst rule and its four uncorrelated components.
struct MseDecomposition {
    double sample_mse = 0;
    double persistence = 0;    ///< (delta - delta_hat)^2 E x_t^2
    double firm_component = 0; ///< E (f - f_hat)^2
    double overreaction = 0;   ///< theta^2 delta_hat^2 E eps_t^2
    double innovation = 0;     ///< E eps_{t+1}^2
    double sum() const { return persistence + firm_component + overreaction + innovation; }
};

inline MseDecomposition forecast_mse_decomposition(const PanelDataset& panel, const SynthParams& truth,
                                                   double theta, double delta_hat, const FSpec& f_hat) {
    std::map<FirmYear, const PanelObservation*> annual;
    for (const auto& o : panel.observations)
        if (o.month == 1) annual.emplace(FirmYear{o.firm_id, o.fiscal_year}, &o);
    MseDecomposition d;
    std::size_t n = 0;
    for (const auto& [k, o] : annual) {
        const auto next = annual.find({k.firm_id, k.year + 1});
        if (next == annual.end()) continue;
        require(o->latent_eps && o->latent_z && next->second->latent_eps, ErrorKind::oracle_unavailable,
                "panel lacks latent shocks");
        const double forecast = delta_hat * o->outcome + f_hat(*o->latent_z) + theta * delta_hat * *o->latent_eps;
        const double err = next->second->outcome - forecast;
        const double gap = truth.f_spec(*o->latent_z) - f_hat(*o->latent_z);
        d.sample_mse += err * err;
        d.persistence += (truth.delta - delta_hat) * (truth.delta - delta_hat) * o->outcome * o->outcome;
        d.firm_component += gap * gap;
        d.overreaction += theta * theta * delta_hat * delta_hat * *o->latent_eps * *o->latent_eps;
        d.innovation += *next->second->latent_eps * *next->second->latent_eps;
        ++n;
    }
    require(n > 0, ErrorKind::data, "panel has no consecutive firm-years");
    const double inv = 1.0 / static_cast<double>(n);
    d.sample_mse *= inv;
    d.persistence *= inv;
    d.firm_component *= inv;
    d.overreaction *= inv;
    d.innovation *= inv;
    return d;
}

}  // namespace fo::synth
