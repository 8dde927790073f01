#pragma once

// Rolling-window forecasting: training samples, per (year, horizon) refits,
// the look-ahead audit, model comparison and stratified cross-validation.
//
// Dates: a model used during forecast year y for horizon h predicts the
// fiscal year ending h months after the forecast month, which is y + 1 for
// every h in 12..23 (made in month 24 - h of year y). It is trained on pairs
// (features at month tau, outcome of the fiscal year containing tau + h) with
// tau in the `window` years before y and the label's fiscal-year end no later
// than December of y - 1.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fo/error.hpp"
#include "fo/forecast_panel.hpp"
#include "fo/gbrt.hpp"
#include "fo/json_util.hpp"
#include "fo/panel.hpp"
#include "fo/parallel.hpp"
#include "fo/regress.hpp"
#include "fo/rng.hpp"

namespace fo {

inline constexpr int kDefaultWindowYears = 5;

struct ForecasterSpec {
    enum class Kind { gbrt, linear, analyst, mean };
    Kind kind = Kind::gbrt;
    GbrtHyperParams hyper{};
    std::string label;                           ///< defaults to the kind's name
    const ForecastPanel* analyst_source = nullptr; ///< passthrough copies its records labelled `label`

    static ForecasterSpec gbrt(GbrtHyperParams h = {}, std::string label = forecaster::gbrt) {
        return {Kind::gbrt, h, std::move(label), nullptr};
    }
    static ForecasterSpec linear(std::string label = forecaster::linear) { return {Kind::linear, {}, std::move(label), nullptr}; }
    static ForecasterSpec analyst(const ForecastPanel& source, std::string label = forecaster::analyst) {
        return {Kind::analyst, {}, std::move(label), &source};
    }
    /// Predicts the training mean; a floor for cross-validation.
    static ForecasterSpec mean() { return {Kind::mean, {}, "mean", nullptr}; }
};

/// Fits `spec` on (X, y) and predicts the rows of P.
inline Vector fit_predict(const ForecasterSpec& spec, const Matrix& X, const Vector& y, const Matrix& P,
                          const std::vector<std::string>& names = {}) {
    switch (spec.kind) {
        case ForecasterSpec::Kind::gbrt: return predict(fit_gbrt(X, y, spec.hyper, names), P);
        case ForecasterSpec::Kind::linear: {
            Matrix Xc(X.rows(), X.cols() + 1), Pc(P.rows(), P.cols() + 1);
            Xc << Vector::Ones(X.rows()), X;
            Pc << Vector::Ones(P.rows()), P;
            return Pc * ols(Xc, y).coefficients;
        }
        case ForecasterSpec::Kind::mean: {
            require(y.size() > 0, ErrorKind::fit, "cannot fit on an empty sample");
            return Vector::Constant(P.rows(), y.mean());
        }
        case ForecasterSpec::Kind::analyst: break;
    }
    fail(ErrorKind::parameter, "the analyst passthrough cannot be fitted");
}

// --- training samples ----------------------------------------------------------

struct TrainingPair {
    std::string firm_id;
    int feature_year = 0;
    int feature_month = 1;
    int label_year = 0;

    long feature_index() const { return month_index(feature_year, feature_month); }
    long label_index() const { return fiscal_year_end_index(label_year); }
    bool operator==(const TrainingPair&) const = default;
};

struct TrainingSample {
    Matrix X;
    Vector y;
    std::vector<TrainingPair> pairs;
};

/// Fiscal year whose end is the first at or after month index `idx`.
inline int label_fiscal_year(long idx) {
    const long a = idx - (kFiscalYearEndMonth - 1);
    return static_cast<int>(a >= 0 ? (a + 11) / 12 : -((-a) / 12));
}

/// Throws a lookahead error if any pair uses information dated in year y or later.
inline void audit_training_pairs(const std::vector<TrainingPair>& pairs, int forecast_year) {
    const long cutoff = fiscal_year_end_index(forecast_year - 1);
    for (const auto& p : pairs) {
        require(p.label_index() <= cutoff, ErrorKind::lookahead,
                "label " + p.firm_id + " FY" + std::to_string(p.label_year) + " is not public before year " +
                    std::to_string(forecast_year));
        require(p.feature_index() <= cutoff, ErrorKind::lookahead,
                "feature row " + p.firm_id + " " + std::to_string(p.feature_year) + "-" +
                    std::to_string(p.feature_month) + " is dated in or after year " + std::to_string(forecast_year));
    }
}

/// Pairs (X_tau, Y_{tau+h}) usable by a model trained before forecast year y.
inline TrainingSample build_training_sample(const PanelDataset& panel, int forecast_year, int horizon,
                                            int window_years = kDefaultWindowYears) {
    require(horizon >= kMinHorizon && horizon <= kMaxHorizon, ErrorKind::parameter, "horizon must lie in 12..23");
    require(window_years >= 1, ErrorKind::parameter, "window_years must be positive");
    const auto [first, last] = panel.year_range();
    require(first <= forecast_year - window_years && last >= forecast_year - 1, ErrorKind::coverage,
            "panel does not span the training window for year " + std::to_string(forecast_year));

    const auto outcomes = panel.annual_outcomes();
    TrainingSample s;
    std::vector<const PanelObservation*> rows;
    for (const auto& o : panel.observations) {
        if (o.fiscal_year < forecast_year - window_years || o.fiscal_year > forecast_year - 1) continue;
        const int label_year = label_fiscal_year(month_index(o.fiscal_year, o.month) + horizon);
        if (label_year > forecast_year - 1) continue;
        const auto it = outcomes.find({o.firm_id, label_year});
        if (it == outcomes.end()) continue;
        s.pairs.push_back({o.firm_id, o.fiscal_year, o.month, label_year});
        rows.push_back(&o);
    }
    require(!rows.empty(), ErrorKind::coverage,
            "no training pairs for year " + std::to_string(forecast_year) + " horizon " + std::to_string(horizon));
    s.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.n_features()));
    s.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < panel.n_features(); ++j)
            s.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i]->features[j];
        s.y(static_cast<Eigen::Index>(i)) = outcomes.at({s.pairs[i].firm_id, s.pairs[i].label_year});
    }
    return s;
}

// --- rolling forecasts ---------------------------------------------------------

struct RollingConfig {
    std::vector<int> horizons = [] {
        std::vector<int> h;
        for (int k = kMinHorizon; k <= kMaxHorizon; ++k) h.push_back(k);
        return h;
    }();
    int window_years = kDefaultWindowYears;
    unsigned threads = 1;
};

/// What one (year, horizon) fit was allowed to see.
struct FitProvenance {
    int forecast_year = 0;
    int horizon = 0;
    std::size_t n_train = 0;
    long latest_label_index = 0;
    long latest_feature_index = 0;
    std::vector<TrainingPair> pairs;
};

struct RollingResult {
    ForecastPanel forecasts;
    std::vector<FitProvenance> fits;
};

/// Re-checks every fit of a run against the availability rule.
inline void audit_no_lookahead(const RollingResult& run) {
    for (const auto& f : run.fits) {
        audit_training_pairs(f.pairs, f.forecast_year);
        const long cutoff = fiscal_year_end_index(f.forecast_year - 1);
        require(f.latest_label_index <= cutoff && f.latest_feature_index <= cutoff, ErrorKind::lookahead,
                "fit for year " + std::to_string(f.forecast_year) + " saw data dated after its cutoff");
    }
    for (const auto& r : run.forecasts.records)
        require(r.dates_consistent(), ErrorKind::lookahead, "forecast record with inconsistent dates");
}

/// Forecast years y with a full training window and a realized target y + 1.
inline std::vector<int> rolling_years(const PanelDataset& panel, int window_years) {
    const auto [first, last] = panel.year_range();
    std::vector<int> years;
    for (int y = first + window_years; y <= last - 1; ++y) years.push_back(y);
    return years;
}

inline RollingResult run_rolling_forecasts(const PanelDataset& panel, const ForecasterSpec& spec,
                                           const RollingConfig& cfg = {}) {
    require(!cfg.horizons.empty(), ErrorKind::parameter, "no horizons requested");
    for (int h : cfg.horizons)
        require(h >= kMinHorizon && h <= kMaxHorizon, ErrorKind::parameter, "horizon must lie in 12..23");
    const auto years = rolling_years(panel, cfg.window_years);
    require(!years.empty(), ErrorKind::coverage, "panel is too short for the rolling window");
    const std::string label = spec.label.empty() ? std::string(forecaster::gbrt) : spec.label;

    RollingResult out;
    out.forecasts.realized = panel.annual_outcomes();

    if (spec.kind == ForecasterSpec::Kind::analyst) {
        require(spec.analyst_source != nullptr, ErrorKind::parameter, "analyst passthrough needs a source panel");
        const std::set<int> hs(cfg.horizons.begin(), cfg.horizons.end());
        const std::set<int> targets = [&] {
            std::set<int> t;
            for (int y : years) t.insert(y + 1);
            return t;
        }();
        for (const auto& r : spec.analyst_source->records)
            if (r.forecaster == label && hs.count(r.horizon_months) && targets.count(r.fiscal_year))
                out.forecasts.records.push_back(r);
        out.forecasts.finalize();
        return out;
    }

    const auto index = panel.index();
    const auto firms = panel.firms();
    struct Job {
        int year, horizon;
    };
    std::vector<Job> jobs;
    for (int y : years)
        for (int h : cfg.horizons) jobs.push_back({y, h});

    struct JobResult {
        std::vector<ForecastRecord> records;
        FitProvenance provenance;
    };
    auto results = parallel_map(jobs.size(), cfg.threads, [&](std::size_t j) {
        const auto [y, h] = jobs[j];
        JobResult res;
        try {
            auto sample = build_training_sample(panel, y, h, cfg.window_years);
            audit_training_pairs(sample.pairs, y);
            const auto [made_year, made_month] = forecast_date(y + 1, h);
            std::vector<std::size_t> rows;
            std::vector<std::string> ids;
            for (const auto& f : firms) {
                const auto it = index.find({f, made_year, made_month});
                if (it == index.end()) continue;
                rows.push_back(it->second);
                ids.push_back(f);
            }
            Matrix P(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.n_features()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t c = 0; c < panel.n_features(); ++c)
                    P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = panel.observations[rows[i]].features[c];
            const Vector pred = fit_predict(spec, sample.X, sample.y, P, panel.feature_names);
            for (std::size_t i = 0; i < rows.size(); ++i)
                res.records.push_back({ids[i], y + 1, h, made_year, made_month, label, pred(static_cast<Eigen::Index>(i))});
            auto& pv = res.provenance;
            pv.forecast_year = y;
            pv.horizon = h;
            pv.n_train = sample.pairs.size();
            pv.latest_label_index = 0;
            pv.latest_feature_index = 0;
            for (const auto& p : sample.pairs) {
                pv.latest_label_index = std::max(pv.latest_label_index, p.label_index());
                pv.latest_feature_index = std::max(pv.latest_feature_index, p.feature_index());
            }
            pv.pairs = std::move(sample.pairs);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " [year " + std::to_string(y) + ", horizon " +
                                      std::to_string(h) + "]");
        }
        return res;
    });
    for (auto& r : results) {
        for (auto& rec : r.records) out.forecasts.records.push_back(std::move(rec));
        out.fits.push_back(std::move(r.provenance));
    }
    out.forecasts.finalize();
    audit_no_lookahead(out);
    return out;
}

/// Adds a feature column holding forecaster `name`'s forecast made at each row's date
/// for the next fiscal year.
inline PanelDataset with_forecast_feature(const PanelDataset& panel, const ForecastPanel& fp, const std::string& name,
                                          const std::string& column = "analyst_forecast") {
    std::map<std::tuple<std::string, int, int>, double> by_date;
    for (const auto& r : fp.records)
        if (r.forecaster == name) by_date[{r.firm_id, r.made_year, r.made_month}] = r.value;
    PanelDataset out = panel;
    out.feature_names.push_back(column);
    for (auto& o : out.observations) {
        const auto it = by_date.find({o.firm_id, o.fiscal_year, o.month});
        require(it != by_date.end(), ErrorKind::coverage,
                "no " + name + " forecast made at " + o.firm_id + " " + std::to_string(o.fiscal_year) + "-" +
                    std::to_string(o.month));
        o.features.push_back(it->second);
    }
    return out;
}

// --- comparisons ---------------------------------------------------------------

/// Per target year, MSE of forecaster a over MSE of forecaster b on their common firm-years.
inline std::vector<std::pair<int, double>> yearly_mse_ratio(const ForecastPanel& fp, const std::string& a,
                                                            const std::string& b) {
    require(fp.has_forecaster(a) && fp.has_forecaster(b), ErrorKind::data, "forecaster missing from panel");
    const auto ea = fp.forecast_errors(a);
    const auto eb = fp.forecast_errors(b);
    std::map<int, std::pair<double, double>> sums;
    std::map<int, int> counts;
    std::set<int> ya, yb, years;
    for (const auto& [k, v] : ea) ya.insert(k.year);
    for (const auto& [k, v] : eb) yb.insert(k.year);
    std::set_intersection(ya.begin(), ya.end(), yb.begin(), yb.end(), std::inserter(years, years.end()));
    require(!years.empty(), ErrorKind::coverage, a + " and " + b + " share no target years");
    for (const auto& [k, v] : ea) {
        const auto it = eb.find(k);
        if (it == eb.end()) continue;
        sums[k.year].first += v * v;
        sums[k.year].second += it->second * it->second;
        ++counts[k.year];
    }
    std::vector<std::pair<int, double>> out;
    for (int y : years) {
        require(counts[y] > 0, ErrorKind::coverage, "no common firm-years in " + std::to_string(y));
        const auto [sa, sb] = sums[y];
        require(sb > 0.0, ErrorKind::degenerate, "zero MSE for " + b + " in " + std::to_string(y));
        out.emplace_back(y, sa / sb);
    }
    return out;
}

/// Per target year mean squared error of one forecaster; the input to the DM test.
inline std::map<int, double> yearly_mse(const ForecastPanel& fp, const std::string& name) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& [k, e] : fp.forecast_errors(name)) {
        acc[k.year].first += e * e;
        ++acc[k.year].second;
    }
    std::map<int, double> out;
    for (const auto& [y, v] : acc) out[y] = v.first / v.second;
    return out;
}

// --- stratified cross-validation -------------------------------------------------

/// One-year-ahead annual sample: December features of year t, outcome of t + 1,
/// and the naive lagged outcome x_t.
struct AnnualSample {
    Matrix X;
    Vector y;
    Vector naive;
    std::vector<int> years;
};

inline AnnualSample annual_sample(const PanelDataset& panel) {
    const auto outcomes = panel.annual_outcomes();
    std::vector<const PanelObservation*> rows;
    std::vector<double> target, naive;
    for (const auto& o : panel.observations) {
        if (o.month != kFiscalYearEndMonth) continue;
        const auto next = outcomes.find({o.firm_id, o.fiscal_year + 1});
        if (next == outcomes.end()) continue;
        rows.push_back(&o);
        target.push_back(next->second);
        naive.push_back(o.outcome);
    }
    AnnualSample s;
    s.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.n_features()));
    s.y = Eigen::Map<Vector>(target.data(), static_cast<Eigen::Index>(target.size()));
    s.naive = Eigen::Map<Vector>(naive.data(), static_cast<Eigen::Index>(naive.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < panel.n_features(); ++j)
            s.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i]->features[j];
        s.years.push_back(rows[i]->fiscal_year);
    }
    return s;
}

/// Fold index per observation: each year is shuffled, then dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<int>& strata, int k, std::uint64_t seed) {
    require(k >= 2, ErrorKind::partition, "k must be at least 2");
    std::map<int, std::vector<std::size_t>> by_year;
    for (std::size_t i = 0; i < strata.size(); ++i) by_year[strata[i]].push_back(i);
    std::vector<int> fold(strata.size(), -1);
    RandomStream rng(seed, 0xCF);
    int offset = 0;
    for (auto& [year, idx] : by_year) {
        require(static_cast<int>(idx.size()) >= k, ErrorKind::partition,
                "year " + std::to_string(year) + " has fewer than k observations");
        shuffle(idx, rng);
        for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>((i + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(k));
        offset = static_cast<int>((static_cast<std::size_t>(offset) + idx.size()) % static_cast<std::size_t>(k));
    }
    return fold;
}

struct CvResult {
    double mean_r2 = 0.0;
    std::vector<double> fold_r2;
    std::vector<int> fold_of;
};

/// K-fold cross-validated out-of-sample R^2 against the lagged-outcome benchmark.
inline CvResult kfold_stratified_cv(const AnnualSample& s, const ForecasterSpec& spec, int k, std::uint64_t seed) {
    CvResult out;
    out.fold_of = stratified_folds(s.years, k, seed);
    for (int f = 0; f < k; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (std::size_t i = 0; i < out.fold_of.size(); ++i)
            (out.fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
        const Matrix Xtr = s.X(tr, Eigen::all);
        const Vector ytr = s.y(tr);
        const Matrix Xte = s.X(te, Eigen::all);
        const Vector pred = fit_predict(spec, Xtr, ytr, Xte);
        const Vector yte = s.y(te), nte = s.naive(te);
        out.fold_r2.push_back(oos_r2({yte.data(), static_cast<std::size_t>(yte.size())},
                                     {pred.data(), static_cast<std::size_t>(pred.size())},
                                     {nte.data(), static_cast<std::size_t>(nte.size())}));
    }
    out.mean_r2 = stats::mean(out.fold_r2);
    return out;
}

inline CvResult kfold_stratified_cv(const PanelDataset& panel, const ForecasterSpec& spec, int k = 10,
                                    std::uint64_t seed = 1) {
    return kfold_stratified_cv(annual_sample(panel), spec, k, seed);
}

}  // namespace fo
