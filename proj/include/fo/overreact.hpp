#pragma once

// Overreaction regressions of forecast errors on date-t information,
// cross-forecaster comparisons and the market / firm-specific error split.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fo/error.hpp"
#include "fo/forecast_panel.hpp"
#include "fo/json_util.hpp"
#include "fo/panel.hpp"
#include "fo/regress.hpp"

namespace fo {

using FirmYearSeries = std::map<FirmYear, double>;

struct OverreactionResult {
    std::string forecaster;
    std::string predictor = "investment";
    double beta = 0.0;
    double se = 0.0;
    double t_stat = 0.0;
    std::size_t n_obs = 0;
    double adj_r2 = 0.0;
    FixedEffects fe = FixedEffects::both;
    std::optional<WaldResult> wald_vs_baseline;
    RegressionFit fit;
};

namespace detail {

inline std::size_t distinct_years(const std::vector<FirmYear>& keys) {
    std::set<int> s;
    for (const auto& k : keys) s.insert(k.year);
    return s.size();
}

inline std::size_t distinct_firms(const std::vector<FirmYear>& keys) {
    std::set<std::string> s;
    for (const auto& k : keys) s.insert(k.firm_id);
    return s.size();
}

}  // namespace detail

/// Firm-years (i, t + 1) whose error and date-t predictor both exist.
inline std::vector<FirmYear> paired_keys(const FirmYearSeries& errors, const FirmYearSeries& predictor) {
    std::vector<FirmYear> keys;
    for (const auto& [k, e] : errors)
        if (predictor.count({k.firm_id, k.year - 1})) keys.push_back(k);
    return keys;
}

/// Regresses error_{i,t+1} on predictor_{i,t} with the requested fixed effects,
/// clustering by firm. Keys of `errors` are target years.
inline OverreactionResult overreaction_test_on(const std::vector<FirmYear>& keys, const FirmYearSeries& errors,
                                               const FirmYearSeries& predictor, FixedEffects fe,
                                               const std::string& label, const std::string& predictor_name) {
    require(detail::distinct_firms(keys) >= 2 && detail::distinct_years(keys) >= 2, ErrorKind::data,
            "overreaction test needs at least two firms and two years");
    Vector y(static_cast<Eigen::Index>(keys.size()));
    Matrix X(static_cast<Eigen::Index>(keys.size()), 1);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto e = errors.find(keys[i]);
        const auto p = predictor.find({keys[i].firm_id, keys[i].year - 1});
        require(e != errors.end() && p != predictor.end(), ErrorKind::alignment,
                "missing error or predictor for " + keys[i].firm_id + " " + std::to_string(keys[i].year));
        y(static_cast<Eigen::Index>(i)) = e->second;
        X(static_cast<Eigen::Index>(i), 0) = p->second;
    }
    OverreactionResult r;
    r.forecaster = label;
    r.predictor = predictor_name;
    r.fe = fe;
    r.fit = fe_regression(y, X, {predictor_name}, keys, fe, true);
    const std::size_t j = fe == FixedEffects::none ? 1 : 0;
    r.beta = r.fit.coef(j);
    r.se = r.fit.se(j);
    r.t_stat = r.fit.t_stat(j);
    r.n_obs = r.fit.n_obs;
    r.adj_r2 = r.fit.adj_r2;
    return r;
}

inline OverreactionResult overreaction_test(const FirmYearSeries& errors, const FirmYearSeries& predictor,
                                            FixedEffects fe = FixedEffects::both, const std::string& label = "",
                                            const std::string& predictor_name = "investment") {
    const auto keys = paired_keys(errors, predictor);
    require(!keys.empty(), ErrorKind::alignment, "errors and predictor share no firm-years");
    return overreaction_test_on(keys, errors, predictor, fe, label, predictor_name);
}

/// Coefficient index of the predictor inside OverreactionResult::fit.
inline std::size_t predictor_index(const OverreactionResult& r) { return r.fe == FixedEffects::none ? 1 : 0; }

struct ComparisonTable {
    std::string baseline;
    std::vector<OverreactionResult> rows;  ///< one per forecaster, in name order
    std::size_t dropped = 0;               ///< firm-years outside the common coverage
};

/// Runs the overreaction regression for every forecaster on the common
/// coverage and tests each slope against the baseline's.
inline ComparisonTable compare_forecasters(const std::map<std::string, FirmYearSeries>& error_panels,
                                           const std::string& baseline, const FirmYearSeries& predictor,
                                           FixedEffects fe = FixedEffects::both,
                                           const std::string& predictor_name = "investment") {
    require(error_panels.count(baseline), ErrorKind::data, "baseline forecaster " + baseline + " missing");
    std::set<FirmYear> all;
    std::optional<std::set<FirmYear>> common;
    for (const auto& [name, errs] : error_panels) {
        std::set<FirmYear> keys;
        for (const auto& [k, v] : errs) {
            keys.insert(k);
            all.insert(k);
        }
        if (!common) {
            common = std::move(keys);
        } else {
            std::set<FirmYear> inter;
            std::set_intersection(common->begin(), common->end(), keys.begin(), keys.end(),
                                  std::inserter(inter, inter.end()));
            common = std::move(inter);
        }
    }
    ComparisonTable t;
    t.baseline = baseline;
    t.dropped = all.size() - common->size();
    std::vector<FirmYear> keys;
    for (const auto& k : *common)
        if (predictor.count({k.firm_id, k.year - 1})) keys.push_back(k);
    require(!keys.empty(), ErrorKind::coverage, "forecasters share no firm-years with a predictor");

    for (const auto& [name, errs] : error_panels)
        t.rows.push_back(overreaction_test_on(keys, errs, predictor, fe, name, predictor_name));
    const auto base = std::find_if(t.rows.begin(), t.rows.end(), [&](const auto& r) { return r.forecaster == baseline; });
    for (auto& r : t.rows) r.wald_vs_baseline = sur_wald(r.fit, base->fit, predictor_index(r));
    return t;
}

/// Coefficient (t-stat) grid with forecasters as columns, plus a chi2 [p] row.
inline void write_table_csv(std::ostream& os, const ComparisonTable& t) {
    os << "row";
    for (const auto& r : t.rows) os << ',' << r.forecaster;
    os << '\n';
    if (t.rows.empty()) return;
    os << t.rows.front().predictor;
    for (const auto& r : t.rows) os << ',' << format_fixed(r.beta, 4) << " (" << format_fixed(r.t_stat, 2) << ')';
    os << "\nobservations";
    for (const auto& r : t.rows) os << ',' << r.n_obs;
    os << "\nadj_r2";
    for (const auto& r : t.rows) os << ',' << format_fixed(r.adj_r2, 4);
    os << "\nfixed_effects";
    for (const auto& r : t.rows) os << ',' << to_string(r.fe);
    os << "\nchi2_vs_" << t.baseline;
    for (const auto& r : t.rows)
        os << ',' << format_fixed(r.wald_vs_baseline->chi2, 3) << " [" << format_fixed(r.wald_vs_baseline->p_value, 3)
           << ']';
    os << '\n';
}

inline json to_json(const ComparisonTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row{{"forecaster", r.forecaster}, {"predictor", r.predictor}, {"beta", r.beta},
                 {"se", r.se},                 {"t_stat", r.t_stat},       {"n_obs", r.n_obs},
                 {"adj_r2", r.adj_r2},         {"fixed_effects", to_string(r.fe)}, {"clustered_by", "firm"}};
        if (r.wald_vs_baseline) row["wald_vs_baseline"] = to_json(*r.wald_vs_baseline);
        rows.push_back(row);
    }
    return json{{"baseline", t.baseline}, {"dropped_firm_years", t.dropped}, {"rows", rows}};
}

// --- market / firm decomposition ---------------------------------------------------

struct ErrorDecomposition {
    std::vector<FirmYear> keys;
    std::vector<double> total;
    std::vector<double> market_component;
    std::vector<double> firm_component;
    std::map<int, double> market_error;       ///< equal-weighted mean error per year
    std::map<std::string, double> beta_im;    ///< per-firm market loading
    std::map<std::string, double> intercept;  ///< per-firm intercept, part of the firm component
    std::set<std::string> degenerate_firms;   ///< loading forced to zero
};

/// e_it = b_i + b_im r_mt + u_it per firm; the market part is b_im r_mt and
/// the intercept stays with the firm part.
inline ErrorDecomposition decompose_errors(const FirmYearSeries& errors) {
    require(!errors.empty(), ErrorKind::data, "no errors to decompose");
    ErrorDecomposition d;
    std::map<int, std::pair<double, int>> acc;
    std::map<std::string, std::vector<FirmYear>> by_firm;
    for (const auto& [k, e] : errors) {
        acc[k.year].first += e;
        ++acc[k.year].second;
        by_firm[k.firm_id].push_back(k);
    }
    for (const auto& [y, a] : acc) d.market_error[y] = a.first / a.second;

    for (const auto& [firm, keys] : by_firm) {
        require(keys.size() >= 3, ErrorKind::data, "firm " + firm + " has fewer than 3 years");
        double mr = 0.0, me = 0.0;
        for (const auto& k : keys) {
            mr += d.market_error.at(k.year);
            me += errors.at(k);
        }
        mr /= static_cast<double>(keys.size());
        me /= static_cast<double>(keys.size());
        double sxy = 0.0, sxx = 0.0, sr = 0.0;
        for (const auto& k : keys) {
            const double r = d.market_error.at(k.year) - mr;
            sxy += r * (errors.at(k) - me);
            sxx += r * r;
            sr = std::max(sr, std::fabs(d.market_error.at(k.year)));
        }
        double beta = 0.0;
        if (sxx <= 1e-24 * std::max(1.0, sr * sr) * static_cast<double>(keys.size())) {
            d.degenerate_firms.insert(firm);
        } else {
            beta = sxy / sxx;
        }
        d.beta_im[firm] = beta;
        d.intercept[firm] = me - beta * mr;
    }
    for (const auto& [k, e] : errors) {
        const double market = d.beta_im.at(k.firm_id) * d.market_error.at(k.year);
        d.keys.push_back(k);
        d.total.push_back(e);
        d.market_component.push_back(market);
        d.firm_component.push_back(e - market);
    }
    return d;
}

inline void write_decomposition_csv(std::ostream& os, const ErrorDecomposition& d) {
    os << "firm_id,fiscal_year,error,market_error,beta_im,market_component,firm_component,degenerate\n";
    for (std::size_t i = 0; i < d.keys.size(); ++i) {
        const auto& k = d.keys[i];
        os << k.firm_id << ',' << k.year << ',' << format_number(d.total[i]) << ','
           << format_number(d.market_error.at(k.year)) << ',' << format_number(d.beta_im.at(k.firm_id)) << ','
           << format_number(d.market_component[i]) << ',' << format_number(d.firm_component[i]) << ','
           << (d.degenerate_firms.count(k.firm_id) ? 1 : 0) << '\n';
    }
}

/// Mean |F_h - F_{h+1}| over consecutive monthly forecasts of the same firm-year.
inline double revision_magnitude(const ForecastPanel& fp, const std::string& name) {
    std::map<std::tuple<std::string, int, int>, double> v;
    for (const auto& r : fp.records)
        if (r.forecaster == name) v[{r.firm_id, r.fiscal_year, r.horizon_months}] = r.value;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [k, f] : v) {
        const auto& [firm, year, h] = k;
        const auto next = v.find({firm, year, h + 1});
        if (next == v.end()) continue;
        sum += std::fabs(f - next->second);
        ++n;
    }
    require(n > 0, ErrorKind::data, "no consecutive monthly forecasts for " + name);
    return sum / static_cast<double>(n);
}

}  // namespace fo
