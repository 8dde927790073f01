#pragma once

// Distribution functions and small descriptive statistics.
//
// Chi-square tail probabilities use the regularized incomplete gamma
// function: the power series for x < a + 1 and a modified-Lentz continued
// fraction otherwise. Both are iterated to relative precision 1e-15, which
// keeps p-values accurate to about 1e-12 over the range used by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "fo/error.hpp"

namespace fo::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Two-sided p-value of a standard-normal statistic.
inline double normal_two_sided_p(double z) {
    if (std::isinf(z)) return 0.0;
    return std::erfc(std::fabs(z) / std::numbers::sqrt2);
}

namespace detail {

inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    require(a > 0.0 && x >= 0.0, ErrorKind::domain, "gamma_p requires a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
    require(a > 0.0 && x >= 0.0, ErrorKind::domain, "gamma_q requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_continued_fraction(a, x);
}

inline double chi2_cdf(double x, int df) {
    require(df > 0, ErrorKind::domain, "chi-square df must be positive");
    if (x <= 0.0) return 0.0;
    if (df == 1) return std::erf(std::sqrt(0.5 * x));
    return gamma_p(0.5 * df, 0.5 * x);
}

/// Upper tail P(X > x) for X ~ chi-square(df).
inline double chi2_sf(double x, int df) {
    require(df > 0, ErrorKind::domain, "chi-square df must be positive");
    if (x <= 0.0) return 1.0;
    if (df == 1) return std::erfc(std::sqrt(0.5 * x));
    return gamma_q(0.5 * df, 0.5 * x);
}

inline double mean(std::span<const double> v) {
    require(!v.empty(), ErrorKind::data, "mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample variance with the n - 1 divisor.
inline double variance(std::span<const double> v) {
    require(v.size() >= 2, ErrorKind::data, "variance needs at least two values");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

/// Standard error of the sample mean.
inline double standard_error(std::span<const double> v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// Average ranks (ties share the mean rank), 1-based.
inline std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && a.size() >= 2, ErrorKind::shape, "pearson needs equal-length samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    require(saa > 0 && sbb > 0, ErrorKind::degenerate, "pearson correlation of a constant sample");
    return sab / std::sqrt(saa * sbb);
}

struct Correlation {
    double rho;
    double p_value;  ///< two-sided, large-sample normal approximation z = rho * sqrt(n - 1)
};

inline Correlation spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double rho = pearson(ra, rb);
    const double z = rho * std::sqrt(static_cast<double>(a.size()) - 1.0);
    return {rho, normal_two_sided_p(z)};
}

}  // namespace fo::stats
