#pragma once

// Least squares, fixed-effects absorption, cluster-robust covariance, the
// cross-equation Wald test and forecast-accuracy statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fo/error.hpp"
#include "fo/json_util.hpp"
#include "fo/panel.hpp"
#include "fo/stats.hpp"

namespace fo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FixedEffects { none, firm, year, both };

inline std::string_view to_string(FixedEffects fe) {
    switch (fe) {
        case FixedEffects::none: return "none";
        case FixedEffects::firm: return "firm";
        case FixedEffects::year: return "year";
        case FixedEffects::both: return "both";
    }
    return "none";
}

inline FixedEffects fixed_effects_from_string(std::string_view s) {
    if (s == "none") return FixedEffects::none;
    if (s == "firm") return FixedEffects::firm;
    if (s == "year") return FixedEffects::year;
    if (s == "both") return FixedEffects::both;
    fail(ErrorKind::config, "fixed effects must be none, firm, year or both");
}

struct RegressionFit {
    std::vector<std::string> names;
    Vector coefficients;
    Vector residuals;
    Matrix vcov_plain;
    std::optional<Matrix> vcov_clustered;
    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    std::size_t absorbed_df = 0;  ///< degrees of freedom absorbed by fixed effects
    std::size_t absorbed_df_unnested = 0;  ///< part of absorbed_df not nested within clusters
    double r2 = 0.0;
    double adj_r2 = 0.0;
    bool fe_firm = false;
    bool fe_year = false;

    // Inputs kept so cross-equation tests can verify alignment.
    Matrix design;
    Vector response;
    std::vector<std::string> clusters;
    std::vector<FirmYear> row_keys;

    const Matrix& vcov() const { return vcov_clustered ? *vcov_clustered : vcov_plain; }
    double se(std::size_t j) const { return std::sqrt(vcov()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))); }
    double t_stat(std::size_t j) const { return coefficients(static_cast<Eigen::Index>(j)) / se(j); }
    double coef(std::size_t j) const { return coefficients(static_cast<Eigen::Index>(j)); }
};

struct OlsOptions {
    std::vector<std::string> names;
    std::optional<std::vector<std::string>> clusters;
    std::size_t absorbed_df = 0;         ///< fixed-effect df removed before the call
    std::size_t absorbed_df_unnested = 0; ///< part of absorbed_df not nested within clusters
    double tss_override = -1.0;          ///< total sum of squares for R^2 when the response was demeaned
    bool fe_firm = false;
    bool fe_year = false;
};

/// Cluster-robust sandwich with the G/(G-1) (N-1)/(N-K) finite-sample factor.
inline Matrix cluster_vcov(const Matrix& X, const Vector& u, const std::vector<std::string>& clusters,
                           const Matrix& bread, std::size_t k_total) {
    require(clusters.size() == static_cast<std::size_t>(X.rows()), ErrorKind::shape,
            "cluster ids differ in length from the design");
    std::map<std::string, Vector> scores;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto [it, inserted] = scores.try_emplace(clusters[static_cast<std::size_t>(i)], Vector::Zero(X.cols()));
        it->second += X.row(i).transpose() * u(i);
    }
    const double G = static_cast<double>(scores.size());
    require(G >= 2, ErrorKind::degenerate, "clustered covariance needs at least two clusters");
    Matrix meat = Matrix::Zero(X.cols(), X.cols());
    for (const auto& [g, s] : scores) meat.noalias() += s * s.transpose();
    const double N = static_cast<double>(X.rows());
    const double K = static_cast<double>(k_total);
    require(N > K, ErrorKind::singular, "not enough observations for clustered covariance");
    const double factor = G / (G - 1.0) * (N - 1.0) / (N - K);
    Matrix v = factor * bread * meat * bread;
    return 0.5 * (v + v.transpose());
}

/// Least squares by Householder QR. The design is used as given; add an intercept column yourself.
inline RegressionFit ols(const Matrix& X, const Vector& y, const OlsOptions& opt = {}) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto k = static_cast<std::size_t>(X.cols());
    require(X.rows() == y.size(), ErrorKind::shape, "design rows and response differ in length");
    require(k >= 1, ErrorKind::shape, "empty design");
    require(X.allFinite() && y.allFinite(), ErrorKind::data, "non-finite value in regression input");
    require(n > k + opt.absorbed_df, ErrorKind::singular, "need more observations than parameters");
    std::vector<std::string> names = opt.names;
    if (names.empty())
        for (std::size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(j));
    require(names.size() == k, ErrorKind::shape, "names length differs from design columns");

    Eigen::HouseholderQR<Matrix> qr(X);
    const Matrix R = qr.matrixQR().topLeftCorner(X.cols(), X.cols()).triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < k; ++j) {
        const double col_norm = X.col(static_cast<Eigen::Index>(j)).norm();
        const double rjj = std::fabs(R(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
        require(col_norm > 0.0 && rjj > 1e-10 * col_norm, ErrorKind::singular,
                "design is rank deficient at column '" + names[j] + "'");
    }

    RegressionFit fit;
    fit.names = std::move(names);
    fit.coefficients = qr.solve(y);
    fit.residuals = y - X * fit.coefficients;
    fit.n_obs = n;
    fit.n_params = k;
    fit.absorbed_df = opt.absorbed_df;
    fit.absorbed_df_unnested = opt.absorbed_df_unnested;
    fit.fe_firm = opt.fe_firm;
    fit.fe_year = opt.fe_year;

    const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(X.cols(), X.cols()));
    const Matrix bread = Rinv * Rinv.transpose();
    const double ssr = fit.residuals.squaredNorm();
    const double dof = static_cast<double>(n - k - opt.absorbed_df);
    Matrix vp = (ssr / dof) * bread;
    fit.vcov_plain = 0.5 * (vp + vp.transpose());
    if (opt.clusters) fit.vcov_clustered = cluster_vcov(X, fit.residuals, *opt.clusters, bread, k + opt.absorbed_df_unnested);

    double tss = opt.tss_override;
    if (tss < 0.0) tss = (y.array() - y.mean()).square().sum();
    fit.r2 = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
    // One of k + absorbed_df parameters is the intercept.
    const double p_eff = static_cast<double>(k + opt.absorbed_df) - 1.0;
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - p_eff - 1.0);

    fit.design = X;
    fit.response = y;
    if (opt.clusters) fit.clusters = *opt.clusters;
    return fit;
}

// --- fixed effects -------------------------------------------------------------

struct WithinResult {
    Matrix values;
    int iterations = 0;
    std::vector<double> trace;  ///< max absolute change per sweep
};

inline constexpr int kWithinMaxIterations = 100;
inline constexpr double kWithinTolerance = 1e-10;

/// Alternating firm/year demeaning of every column of `values`.
///
/// Stops when a sweep changes no entry by more than 1e-10 relative to the
/// largest absolute input value (or 1e-10 absolute for inputs below one).
inline WithinResult two_way_within(const Matrix& values, const std::vector<std::string>& firm_ids,
                                   const std::vector<int>& year_ids) {
    const auto n = static_cast<std::size_t>(values.rows());
    require(firm_ids.size() == n && year_ids.size() == n, ErrorKind::shape, "group ids differ in length from values");
    require(n >= 1, ErrorKind::data, "no observations to demean");
    require(values.allFinite(), ErrorKind::data, "non-finite value in fixed-effects input");

    std::map<std::string, int> firm_code;
    std::map<int, int> year_code;
    for (const auto& f : firm_ids) firm_code.try_emplace(f, 0);
    for (int y : year_ids) year_code.try_emplace(y, 0);
    int c = 0;
    for (auto& [f, v] : firm_code) v = c++;
    c = 0;
    for (auto& [y, v] : year_code) v = c++;
    std::vector<int> fi(n), yi(n);
    std::vector<double> fcount(firm_code.size(), 0.0), ycount(year_code.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        fi[i] = firm_code[firm_ids[i]];
        yi[i] = year_code[year_ids[i]];
        fcount[static_cast<std::size_t>(fi[i])] += 1.0;
        ycount[static_cast<std::size_t>(yi[i])] += 1.0;
    }

    WithinResult out;
    out.values = values;
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    auto demean = [&](const std::vector<int>& g, const std::vector<double>& count, Eigen::Index col) {
        std::vector<double> sum(count.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) sum[static_cast<std::size_t>(g[i])] += out.values(static_cast<Eigen::Index>(i), col);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = sum[static_cast<std::size_t>(g[i])] / count[static_cast<std::size_t>(g[i])];
            out.values(static_cast<Eigen::Index>(i), col) -= m;
            change = std::max(change, std::fabs(m));
        }
        return change;
    };
    for (int it = 1; it <= kWithinMaxIterations; ++it) {
        double change = 0.0;
        for (Eigen::Index col = 0; col < values.cols(); ++col) {
            change = std::max(change, demean(fi, fcount, col));
            change = std::max(change, demean(yi, ycount, col));
        }
        out.trace.push_back(change);
        out.iterations = it;
        if (change < kWithinTolerance * scale) return out;
    }
    std::string trace;
    for (std::size_t i = out.trace.size() >= 5 ? out.trace.size() - 5 : 0; i < out.trace.size(); ++i)
        trace += (trace.empty() ? "" : ", ") + format_number(out.trace[i]);
    fail(ErrorKind::numeric, "two-way demeaning did not converge in 100 sweeps; last changes: " + trace);
}

inline Vector two_way_within(const Vector& values, const std::vector<std::string>& firm_ids,
                             const std::vector<int>& year_ids) {
    return two_way_within(Matrix(values), firm_ids, year_ids).values.col(0);
}

/// One-way demeaning by an arbitrary grouping.
inline Matrix one_way_within(const Matrix& values, const std::vector<std::string>& groups) {
    std::map<std::string, std::pair<Vector, double>> acc;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        auto [it, ins] = acc.try_emplace(groups[static_cast<std::size_t>(i)], Vector::Zero(values.cols()), 0.0);
        it->second.first += values.row(i).transpose();
        it->second.second += 1.0;
    }
    Matrix out = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const auto& [s, c] = acc.at(groups[static_cast<std::size_t>(i)]);
        out.row(i) -= (s / c).transpose();
    }
    return out;
}

inline std::size_t count_distinct(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

/// Panel regression of y on X with the requested fixed effects, clustered by firm.
///
/// X must not contain an intercept; one is added when fe == none.
inline RegressionFit fe_regression(const Vector& y, const Matrix& X, const std::vector<std::string>& names,
                                   const std::vector<FirmYear>& keys, FixedEffects fe, bool cluster_by_firm = true) {
    const auto n = static_cast<std::size_t>(y.size());
    require(keys.size() == n && static_cast<std::size_t>(X.rows()) == n, ErrorKind::shape,
            "panel regression inputs differ in length");
    std::vector<std::string> firms(n), years_s(n);
    std::vector<int> years(n);
    for (std::size_t i = 0; i < n; ++i) {
        firms[i] = keys[i].firm_id;
        years[i] = keys[i].year;
        years_s[i] = std::to_string(keys[i].year);
    }
    const std::size_t G = count_distinct(firms);
    const std::size_t T = count_distinct(years_s);

    Matrix data(static_cast<Eigen::Index>(n), X.cols() + 1);
    data.col(0) = y;
    data.rightCols(X.cols()) = X;
    OlsOptions opt;
    opt.names = names;
    switch (fe) {
        case FixedEffects::none: {
            Matrix Xc(static_cast<Eigen::Index>(n), X.cols() + 1);
            Xc.col(0).setOnes();
            Xc.rightCols(X.cols()) = X;
            opt.names.insert(opt.names.begin(), "const");
            if (cluster_by_firm) opt.clusters = firms;
            auto fit = ols(Xc, y, opt);
            fit.row_keys = keys;
            return fit;
        }
        case FixedEffects::firm:
            data = one_way_within(data, firms);
            opt.absorbed_df = G;
            opt.absorbed_df_unnested = 0;
            opt.fe_firm = true;
            break;
        case FixedEffects::year:
            data = one_way_within(data, years_s);
            opt.absorbed_df = T;
            opt.absorbed_df_unnested = T;
            opt.fe_year = true;
            break;
        case FixedEffects::both:
            data = two_way_within(data, firms, years).values;
            opt.absorbed_df = G + T - 1;
            opt.absorbed_df_unnested = T - 1;
            opt.fe_firm = opt.fe_year = true;
            break;
    }
    if (cluster_by_firm) opt.clusters = firms;
    opt.tss_override = (y.array() - y.mean()).square().sum();
    auto fit = ols(data.rightCols(X.cols()), data.col(0), opt);
    fit.row_keys = keys;
    return fit;
}

// --- cross-equation Wald test --------------------------------------------------

struct WaldResult {
    double chi2 = 0.0;
    double p_value = 1.0;
    int df = 1;
};

inline json to_json(const WaldResult& w) { return json{{"chi2", w.chi2}, {"p_value", w.p_value}, {"df", w.df}}; }

/// Tests H0: beta_a[j] = beta_b[j] for two regressions on the same rows and regressors.
///
/// With a common design the stacked (SUR) estimator equals the two OLS fits,
/// and the cross-equation variance Var(b_a) + Var(b_b) - 2 Cov(b_a, b_b) is
/// the OLS variance of the difference regression of (y_a - y_b) on X. It is
/// clustered with the same sandwich and factor when both fits are clustered,
/// and uses the pooled residual variance otherwise.
inline WaldResult sur_wald(const RegressionFit& a, const RegressionFit& b, std::size_t coef_index) {
    require(a.design.rows() == b.design.rows() && a.design.cols() == b.design.cols() && a.design == b.design,
            ErrorKind::alignment, "fits do not share the same regressor matrix");
    require(a.row_keys == b.row_keys, ErrorKind::alignment, "fits do not share the same observations");
    require(a.clusters == b.clusters, ErrorKind::alignment, "fits use different clusters");
    require(a.absorbed_df == b.absorbed_df, ErrorKind::alignment, "fits absorb different fixed effects");
    require(coef_index < a.n_params, ErrorKind::range, "coefficient index out of range");
    const auto j = static_cast<Eigen::Index>(coef_index);

    const Vector d = a.response - b.response;
    const double scale = std::max(a.response.norm(), b.response.norm());
    if (d.norm() <= 1e-12 * scale) return {0.0, 1.0, 1};

    const Matrix& X = a.design;
    const Vector delta = a.coefficients - b.coefficients;
    const Vector u = a.residuals - b.residuals;
    if (u.norm() <= 1e-9 * d.norm()) {
        const bool same = std::fabs(delta(j)) * X.col(j).norm() <= 1e-9 * d.norm();
        return same ? WaldResult{0.0, 1.0, 1} : WaldResult{std::numeric_limits<double>::infinity(), 0.0, 1};
    }

    Eigen::HouseholderQR<Matrix> qr(X);
    const Matrix R = qr.matrixQR().topLeftCorner(X.cols(), X.cols()).triangularView<Eigen::Upper>();
    const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(X.cols(), X.cols()));
    const Matrix bread = Rinv * Rinv.transpose();
    double var = 0.0;
    if (a.vcov_clustered && b.vcov_clustered) {
        var = cluster_vcov(X, u, a.clusters, bread, a.n_params + a.absorbed_df_unnested)(j, j);
    } else {
        const double dof = static_cast<double>(a.n_obs - a.n_params - a.absorbed_df);
        var = u.squaredNorm() / dof * bread(j, j);
    }
    const double chi2 = delta(j) * delta(j) / var;
    return {chi2, stats::chi2_sf(chi2, 1), 1};
}

// --- forecast accuracy ---------------------------------------------------------

inline double mse(std::span<const double> actual, std::span<const double> forecast) {
    require(!actual.empty(), ErrorKind::data, "mse of an empty sample");
    require(actual.size() == forecast.size(), ErrorKind::shape, "mse inputs differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += (actual[i] - forecast[i]) * (actual[i] - forecast[i]);
    return s / static_cast<double>(actual.size());
}

/// 1 - SSE(forecast) / SSE(naive); the naive benchmark is usually the lagged actual.
inline double oos_r2(std::span<const double> actual, std::span<const double> forecast, std::span<const double> naive) {
    require(!actual.empty(), ErrorKind::data, "oos_r2 of an empty sample");
    require(actual.size() == forecast.size() && actual.size() == naive.size(), ErrorKind::shape,
            "oos_r2 inputs differ in length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        num += (forecast[i] - actual[i]) * (forecast[i] - actual[i]);
        den += (actual[i] - naive[i]) * (actual[i] - naive[i]);
    }
    require(den > 0.0, ErrorKind::degenerate, "naive benchmark is perfect; R^2 is undefined");
    return 1.0 - num / den;
}

struct DieboldMariano {
    double dm_stat = 0.0;
    double p_value = 1.0;
    double mean_diff = 0.0;
    int lag = 0;
};

/// DM test on per-period mean squared errors. d_t = loss_b - loss_a, so a
/// positive statistic favours forecaster a. Newey-West variance with
/// Bartlett weights and lag floor(T^(1/3)).
inline DieboldMariano diebold_mariano(std::span<const double> loss_a, std::span<const double> loss_b) {
    require(loss_a.size() == loss_b.size(), ErrorKind::shape, "loss series differ in length");
    require(loss_a.size() >= 8, ErrorKind::data, "Diebold-Mariano needs at least 8 periods");
    const std::size_t T = loss_a.size();
    std::vector<double> d(T);
    bool all_zero = true;
    for (std::size_t t = 0; t < T; ++t) {
        d[t] = loss_b[t] - loss_a[t];
        all_zero = all_zero && d[t] == 0.0;
    }
    require(!all_zero, ErrorKind::degenerate, "identical forecast losses in every period");
    const double dbar = stats::mean(d);
    const int L = static_cast<int>(std::floor(std::cbrt(static_cast<double>(T)) + 1e-12));
    auto autocov = [&](int lag) {
        double s = 0.0;
        for (std::size_t t = static_cast<std::size_t>(lag); t < T; ++t) s += (d[t] - dbar) * (d[t - static_cast<std::size_t>(lag)] - dbar);
        return s / static_cast<double>(T);
    };
    double lrv = autocov(0);
    for (int l = 1; l <= L; ++l) lrv += 2.0 * (1.0 - static_cast<double>(l) / (L + 1)) * autocov(l);
    DieboldMariano out;
    out.mean_diff = dbar;
    out.lag = L;
    if (lrv <= 0.0) {
        out.dm_stat = dbar > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
    }
    out.dm_stat = dbar / std::sqrt(lrv / static_cast<double>(T));
    out.p_value = stats::normal_two_sided_p(out.dm_stat);
    return out;
}

// --- export --------------------------------------------------------------------

inline json to_json(const RegressionFit& f) {
    json coefs = json::object();
    for (std::size_t j = 0; j < f.n_params; ++j)
        coefs[f.names[j]] = json{{"coef", f.coef(j)}, {"se", f.se(j)}, {"t", f.t_stat(j)}};
    return json{{"coefficients", coefs},
                {"n_obs", f.n_obs},
                {"adj_r2", f.adj_r2},
                {"r2", f.r2},
                {"clustered", f.vcov_clustered.has_value()},
                {"fe_firm", f.fe_firm},
                {"fe_year", f.fe_year}};
}

}  // namespace fo
