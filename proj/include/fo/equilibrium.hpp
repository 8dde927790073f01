#pragma once

// One-firm noisy rational-expectations model with analyst-biased signals.
//
// Investors combine a prior N(mu_z, 1/rho_z), a private signal of precision
// rho_eta (biased by (theta delta eps_{t-1} + f~) for the 1 - lambda share
// of non-tech signals) and the price signal of precision
// rho_p = rho_eta^2 rho_x / (alpha^2 A^2). The firm picks issuance xbar from
//     xbar = [A/(r rho) G - phi1~ + phi2 xbar_prev] / [2 alpha A^2/(r rho) + phi2]
// with G = rho mu_z + rho_eta (1 - lambda)(theta delta eps + f~) and phi1~ = +-phi1
// by the sign of the change.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fo/error.hpp"
#include "fo/json_util.hpp"
#include "fo/panel.hpp"
#include "fo/parallel.hpp"
#include "fo/rng.hpp"

namespace fo::eq {

/// f~ as a step in A: `high` above mu_A, `low` at or below it.
struct FTildeRule {
    double mu_A = 1.0;
    double low = 100.0;
    double high = 500.0;

    double operator()(double A) const { return A > mu_A ? high : low; }
};

struct EquilibriumParams {
    double rho_z = 81.16;
    double rho_x = 4.0;
    double rho_eta = 2.78;
    double alpha = 0.1;
    double mu_z = 15.0;
    double phi0 = 0.0;
    double phi1 = 0.091;
    double phi2 = 0.0004;
    double r = 1.01;
    double delta = 0.785;
    double theta = 0.991;
    double lambda = 0.0;
    double delta_A = 0.5;
    double sigma_A = 0.05;
    FTildeRule f_tilde{};

    void validate() const {
        require(rho_z > 0 && rho_eta > 0, ErrorKind::parameter, "prior and signal precisions must be positive");
        require(rho_x >= 0, ErrorKind::parameter, "rho_x must be non-negative");
        require(alpha > 0, ErrorKind::parameter, "alpha must be positive");
        require(r > 0, ErrorKind::parameter, "r must be positive");
        require(phi0 >= 0 && phi1 >= 0 && phi2 >= 0, ErrorKind::parameter, "issuance costs must be non-negative");
        require(lambda >= 0 && lambda <= 1, ErrorKind::parameter, "lambda must lie in [0, 1]");
        require(std::fabs(delta_A) < 1 && sigma_A >= 0, ErrorKind::parameter, "invalid aggregate AR(1) parameters");
        for (double v : {rho_z, rho_x, rho_eta, alpha, mu_z, phi0, phi1, phi2, r, delta, theta, lambda, f_tilde.mu_A,
                         f_tilde.low, f_tilde.high})
            require(std::isfinite(v), ErrorKind::parameter, "non-finite equilibrium parameter");
    }
};

/// |f~| must be non-decreasing in A - mu_A over the grid and smaller at or below mu_A.
inline void check_assumption_one(const EquilibriumParams& p, std::vector<double> grid) {
    std::sort(grid.begin(), grid.end());
    double prev = -1.0, max_low = -1.0, min_high = INFINITY;
    for (double A : grid) {
        const double v = std::fabs(p.f_tilde(A));
        require(v >= prev, ErrorKind::parameter, "f~ rule violates monotonicity in A");
        prev = v;
        if (A <= p.f_tilde.mu_A) max_low = std::max(max_low, v);
        else min_high = std::min(min_high, v);
    }
    require(max_low <= min_high, ErrorKind::parameter, "|f~| must be smaller at or below mu_A");
}

inline json to_json(const EquilibriumParams& p) {
    return json{{"rho_z", p.rho_z},   {"rho_x", p.rho_x},     {"rho_eta", p.rho_eta}, {"alpha", p.alpha},
                {"mu_z", p.mu_z},     {"phi0", p.phi0},       {"phi1", p.phi1},       {"phi2", p.phi2},
                {"r", p.r},           {"delta", p.delta},     {"theta", p.theta},     {"lambda", p.lambda},
                {"delta_A", p.delta_A}, {"sigma_A", p.sigma_A},
                {"f_tilde", {{"mu_A", p.f_tilde.mu_A}, {"low", p.f_tilde.low}, {"high", p.f_tilde.high}}}};
}

inline EquilibriumParams equilibrium_params_from_json(const json& j) {
    const char* what = "EquilibriumParams";
    check_keys(j, {"rho_z", "rho_x", "rho_eta", "alpha", "mu_z", "phi0", "phi1", "phi2", "r", "delta", "theta",
                   "lambda", "delta_A", "sigma_A", "f_tilde"},
               what);
    EquilibriumParams p;
    read_optional(j, "rho_z", p.rho_z, what);
    read_optional(j, "rho_x", p.rho_x, what);
    read_optional(j, "rho_eta", p.rho_eta, what);
    read_optional(j, "alpha", p.alpha, what);
    read_optional(j, "mu_z", p.mu_z, what);
    read_optional(j, "phi0", p.phi0, what);
    read_optional(j, "phi1", p.phi1, what);
    read_optional(j, "phi2", p.phi2, what);
    read_optional(j, "r", p.r, what);
    read_optional(j, "delta", p.delta, what);
    read_optional(j, "theta", p.theta, what);
    read_optional(j, "lambda", p.lambda, what);
    read_optional(j, "delta_A", p.delta_A, what);
    read_optional(j, "sigma_A", p.sigma_A, what);
    if (j.contains("f_tilde")) {
        const auto& f = j.at("f_tilde");
        check_keys(f, {"mu_A", "low", "high"}, "f_tilde");
        read_optional(f, "mu_A", p.f_tilde.mu_A, "f_tilde");
        read_optional(f, "low", p.f_tilde.low, "f_tilde");
        read_optional(f, "high", p.f_tilde.high, "f_tilde");
    }
    p.validate();
    return p;
}

struct EquilibriumState {
    double A = 1.0;
    double eps_prev = 10.0;
    double xbar_prev = 1000.0;
    std::optional<double> prior_mean;  ///< overrides mu_z, e.g. delta z_{t-1} + f_{t-1}

    void validate() const {
        require(A > 0 && std::isfinite(A), ErrorKind::parameter, "A must be positive");
        require(std::isfinite(eps_prev) && std::isfinite(xbar_prev), ErrorKind::parameter, "non-finite state");
    }
};

enum class Branch { increase, decrease, inaction };

inline std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::increase: return "increase";
        case Branch::decrease: return "decrease";
        case Branch::inaction: return "inaction";
    }
    return "inaction";
}

struct EquilibriumOutcome {
    double rho_p = 0;
    double rho_total = 0;
    double gamma_term = 0;  ///< rho_z mu_z + rho_eta (1 - lambda)(theta delta eps + f~)
    double f_tilde = 0;
    double xbar = 0;
    Branch branch = Branch::inaction;
    double phi1_tilde = 0;
    double d_xbar_d_eps = 0;
    double expected_price = 0;
};

inline double price_signal_precision(const EquilibriumParams& p, double A) {
    require(A > 0, ErrorKind::domain, "A must be positive");
    return p.rho_eta * p.rho_eta * p.rho_x / (p.alpha * p.alpha * A * A);
}

struct Posterior {
    double mean;
    double precision;
};

inline Posterior posterior_belief(const EquilibriumParams& p, double prior_mean, double signal, double price_signal,
                                  double A) {
    const double rp = price_signal_precision(p, A);
    const double rho = p.rho_z + p.rho_eta + rp;
    return {(p.rho_z * prior_mean + p.rho_eta * signal + rp * price_signal) / rho, rho};
}

/// Mean-variance demand q = (A mu - p r) / (alpha A^2 / rho).
inline double investor_demand(const EquilibriumParams& p, double posterior_mean, double rho_t, double price, double A) {
    require(A > 0, ErrorKind::domain, "A must be positive");
    return (A * posterior_mean - price * p.r) / (p.alpha * A * A / rho_t);
}

namespace detail {

struct Terms {
    double rho_p, rho, f, gamma, numer, denom, prior;
};

inline Terms terms(const EquilibriumParams& p, const EquilibriumState& s) {
    Terms t{};
    t.prior = s.prior_mean.value_or(p.mu_z);
    t.rho_p = price_signal_precision(p, s.A);
    t.rho = p.rho_z + p.rho_eta + t.rho_p;
    t.f = p.f_tilde(s.A);
    const double bias = p.rho_eta * (1.0 - p.lambda) * (p.theta * p.delta * s.eps_prev + t.f);
    t.gamma = p.rho_z * t.prior + bias;
    const double scale = s.A / (p.r * t.rho);
    t.numer = scale * (t.rho * t.prior + bias);
    t.denom = 2.0 * p.alpha * s.A * s.A / (p.r * t.rho) + p.phi2;
    return t;
}

inline double expected_price(const EquilibriumParams& p, const Terms& t, double A, double xbar) {
    return A / (p.r * t.rho) * (t.gamma - p.alpha * A * xbar + (p.rho_eta + t.rho_p) * t.prior);
}

}  // namespace detail

/// Optimal issuance with the branch of the linear cost resolved by sign consistency.
inline EquilibriumOutcome equity_issuance(const EquilibriumParams& p, const EquilibriumState& s) {
    s.validate();
    const auto t = detail::terms(p, s);
    EquilibriumOutcome o;
    o.rho_p = t.rho_p;
    o.rho_total = t.rho;
    o.gamma_term = t.gamma;
    o.f_tilde = t.f;

    const double up = (t.numer - p.phi1 + p.phi2 * s.xbar_prev) / t.denom;
    const double down = (t.numer + p.phi1 + p.phi2 * s.xbar_prev) / t.denom;
    const bool up_ok = up > s.xbar_prev;
    const bool down_ok = down < s.xbar_prev;
    // down >= up, so both branches can only be consistent when phi1 = 0 and they coincide.
    if (up_ok) {
        o.xbar = up;
        o.branch = Branch::increase;
        o.phi1_tilde = p.phi1;
    } else if (down_ok) {
        o.xbar = down;
        o.branch = Branch::decrease;
        o.phi1_tilde = -p.phi1;
    } else {
        o.xbar = s.xbar_prev;
        o.branch = Branch::inaction;
    }

    if (o.branch != Branch::inaction && p.phi0 > 0.0) {
        // Fixed cost: move only if the net gain over standing still exceeds phi0.
        auto revenue = [&](double x) { return x * detail::expected_price(p, t, s.A, x); };
        const double dx = o.xbar - s.xbar_prev;
        const double gain = revenue(o.xbar) - p.phi1 * std::fabs(dx) - 0.5 * p.phi2 * dx * dx - revenue(s.xbar_prev);
        if (!(gain > p.phi0)) {
            o.xbar = s.xbar_prev;
            o.branch = Branch::inaction;
            o.phi1_tilde = 0.0;
        }
    }
    require(std::isfinite(o.xbar), ErrorKind::numeric, "issuance is not finite");
    if (o.branch != Branch::inaction)
        o.d_xbar_d_eps = s.A / (p.r * t.rho) * p.rho_eta * (1.0 - p.lambda) * p.theta * p.delta / t.denom;
    o.expected_price = detail::expected_price(p, t, s.A, o.xbar);
    return o;
}

/// Issuance with phi1 = phi2 = 0: G / (2 alpha A).
inline double frictionless_issuance(const EquilibriumParams& p, const EquilibriumState& s) {
    const double A = s.A;
    const double prior = s.prior_mean.value_or(p.mu_z);
    const double rp = p.rho_eta * p.rho_eta / (p.alpha * p.alpha * A * A) * p.rho_x;
    return ((p.rho_z + p.rho_eta + rp) * prior +
            p.rho_eta * (1.0 - p.lambda) * (p.theta * p.delta * s.eps_prev + p.f_tilde(A))) /
           (2.0 * p.alpha * A);
}

struct Sensitivity {
    double d_xbar_d_eps;
    double d2_xbar_d_eps_d_lambda;
};

inline Sensitivity overreaction_sensitivity(const EquilibriumParams& p, const EquilibriumState& s) {
    const auto o = equity_issuance(p, s);
    require(o.branch != Branch::inaction, ErrorKind::domain, "sensitivities are undefined on the inaction boundary");
    const auto t = detail::terms(p, s);
    const double lead = s.A / (p.r * t.rho) * p.rho_eta * p.theta * p.delta / t.denom;
    return {lead * (1.0 - p.lambda), -lead};
}

/// Market price given realized z and noisy supply x, using e = -A alpha x / rho_eta.
inline double market_price(const EquilibriumParams& p, const EquilibriumState& s, double xbar, double z_realized,
                           double noise_supply) {
    const auto t = detail::terms(p, s);
    return s.A / (p.r * t.rho) *
           (t.gamma - p.alpha * s.A * xbar +
            (p.rho_eta + t.rho_p) * (z_realized - s.A * p.alpha / p.rho_eta * noise_supply));
}

/// log A_t = delta_A log A_{t-1} + e_t; starts at A = 1.
inline std::vector<double> sample_aggregate_path(const EquilibriumParams& p, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed, 0xA);
    std::vector<double> out;
    double logA = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logA = p.delta_A * logA + p.sigma_A * rng.normal();
        out.push_back(std::exp(logA));
    }
    return out;
}

struct CurvePoint {
    double lambda;
    double A;
    double xbar;
    Branch branch;
    double d_xbar_d_eps;
};

/// A from 0.9 to 1.1 in steps of 0.005.
inline std::vector<double> default_A_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 40; ++i) g.push_back((180.0 + i) / 200.0);
    return g;
}

inline std::vector<CurvePoint> run_numerical_example(const EquilibriumParams& p, const std::vector<double>& A_grid,
                                                     const std::vector<double>& lambdas, double eps_prev,
                                                     double xbar_prev, unsigned threads = 1) {
    require(!A_grid.empty() && !lambdas.empty(), ErrorKind::parameter, "empty evaluation grid");
    p.validate();
    check_assumption_one(p, A_grid);
    std::vector<std::pair<double, double>> cells;
    for (double l : lambdas)
        for (double A : A_grid) cells.emplace_back(l, A);
    auto points = parallel_map(cells.size(), threads, [&](std::size_t i) {
        auto q = p;
        q.lambda = cells[i].first;
        q.validate();
        const auto o = equity_issuance(q, {cells[i].second, eps_prev, xbar_prev, std::nullopt});
        return CurvePoint{cells[i].first, cells[i].second, o.xbar, o.branch, o.d_xbar_d_eps};
    });
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.lambda != b.lambda ? a.lambda < b.lambda : a.A < b.A;
    });
    return points;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
    os << "lambda,A,xbar,branch,d_xbar_d_eps\n";
    for (const auto& c : pts)
        os << format_number(c.lambda) << ',' << format_number(c.A) << ',' << format_number(c.xbar) << ','
           << to_string(c.branch) << ',' << format_number(c.d_xbar_d_eps) << '\n';
}

}  // namespace fo::eq
