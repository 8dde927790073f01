#pragma once

// Long-format firm x fiscal-year x month panel and its CSV form.
//
// CSV header: firm_id,fiscal_year,month,outcome,investment,latent_eps,latent_z,feat_0,...,feat_k
// An empty latent field means "absent". Numbers are written in shortest
// round-trip form so a write/read cycle is exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fo/error.hpp"

namespace fo {

/// Synthetic fiscal years all end in December.
inline constexpr int kFiscalYearEndMonth = 12;

struct FirmYear {
    std::string firm_id;
    int year = 0;
    auto operator<=>(const FirmYear&) const = default;
};

/// Month index counted from year 0, used for date arithmetic.
constexpr long month_index(int year, int month) { return static_cast<long>(year) * 12 + (month - 1); }
constexpr long fiscal_year_end_index(int fiscal_year) { return month_index(fiscal_year, kFiscalYearEndMonth); }

struct PanelObservation {
    std::string firm_id;
    int fiscal_year = 0;
    int month = 1;
    double outcome = 0.0;
    double investment = 0.0;
    std::optional<double> latent_eps;
    std::optional<double> latent_z;
    std::vector<double> features;
};

struct PanelDataset {
    std::vector<PanelObservation> observations;
    std::vector<std::string> feature_names;
    std::string provenance;

    std::size_t n_features() const { return feature_names.size(); }

    /// Checks ordering, uniqueness, month range and feature width.
    void validate() const {
        for (std::size_t i = 0; i < observations.size(); ++i) {
            const auto& o = observations[i];
            require(o.month >= 1 && o.month <= 12, ErrorKind::data, "month out of range for " + o.firm_id);
            require(o.features.size() == feature_names.size(), ErrorKind::shape,
                    "feature vector length differs from header for " + o.firm_id);
            require(std::isfinite(o.outcome), ErrorKind::data, "missing outcome for " + o.firm_id);
            if (i > 0) {
                const auto& p = observations[i - 1];
                const auto a = std::tie(p.firm_id, p.fiscal_year, p.month);
                const auto b = std::tie(o.firm_id, o.fiscal_year, o.month);
                require(a < b, ErrorKind::data,
                        "panel must be sorted by (firm_id, fiscal_year, month) without duplicates near " + o.firm_id +
                            " " + std::to_string(o.fiscal_year));
            }
        }
    }

    std::vector<std::string> firms() const {
        std::vector<std::string> out;
        for (const auto& o : observations)
            if (out.empty() || out.back() != o.firm_id) out.push_back(o.firm_id);
        return out;
    }

    std::pair<int, int> year_range() const {
        require(!observations.empty(), ErrorKind::data, "empty panel");
        int lo = observations.front().fiscal_year, hi = lo;
        for (const auto& o : observations) {
            lo = std::min(lo, o.fiscal_year);
            hi = std::max(hi, o.fiscal_year);
        }
        return {lo, hi};
    }

    /// Fiscal-year outcome per firm-year (taken from the first monthly row).
    std::map<FirmYear, double> annual_outcomes() const {
        std::map<FirmYear, double> out;
        for (const auto& o : observations) out.try_emplace({o.firm_id, o.fiscal_year}, o.outcome);
        return out;
    }

    std::map<FirmYear, double> annual_investment() const {
        std::map<FirmYear, double> out;
        for (const auto& o : observations) out.try_emplace({o.firm_id, o.fiscal_year}, o.investment);
        return out;
    }

    /// Row lookup by (firm, fiscal year, month).
    std::map<std::tuple<std::string, int, int>, std::size_t> index() const {
        std::map<std::tuple<std::string, int, int>, std::size_t> idx;
        for (std::size_t i = 0; i < observations.size(); ++i) {
            const auto& o = observations[i];
            idx.emplace(std::tuple{o.firm_id, o.fiscal_year, o.month}, i);
        }
        return idx;
    }

    std::size_t feature_index(std::string_view name) const {
        const auto it = std::find(feature_names.begin(), feature_names.end(), name);
        require(it != feature_names.end(), ErrorKind::data, "unknown feature column " + std::string(name));
        return static_cast<std::size_t>(it - feature_names.begin());
    }
};

/// Returns a copy without the named feature column.
inline PanelDataset drop_feature(const PanelDataset& panel, std::string_view name) {
    const std::size_t j = panel.feature_index(name);
    PanelDataset out = panel;
    out.feature_names.erase(out.feature_names.begin() + static_cast<long>(j));
    for (auto& o : out.observations) o.features.erase(o.features.begin() + static_cast<long>(j));
    return out;
}

/// Returns a copy that keeps only the named feature columns, in the given order.
inline PanelDataset select_features(const PanelDataset& panel, const std::vector<std::string>& names) {
    std::vector<std::size_t> cols;
    for (const auto& n : names) cols.push_back(panel.feature_index(n));
    PanelDataset out = panel;
    out.feature_names = names;
    for (std::size_t i = 0; i < out.observations.size(); ++i) {
        std::vector<double> f;
        f.reserve(cols.size());
        for (auto c : cols) f.push_back(panel.observations[i].features[c]);
        out.observations[i].features = std::move(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// number formatting / parsing shared by every CSV writer

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed-precision rendering for human-facing tables.
inline std::string format_fixed(double v, int precision) {
    if (!std::isfinite(v)) return format_number(v);
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s, std::string_view what) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorKind::data,
            "cannot parse number '" + std::string(s) + "' in " + std::string(what));
    return v;
}

inline int parse_int(std::string_view s, std::string_view what) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorKind::data,
            "cannot parse integer '" + std::string(s) + "' in " + std::string(what));
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().remove_suffix(1);
    return out;
}

inline void write_panel_csv(std::ostream& os, const PanelDataset& panel) {
    os << "firm_id,fiscal_year,month,outcome,investment,latent_eps,latent_z";
    for (std::size_t j = 0; j < panel.n_features(); ++j) os << ",feat_" << j;
    os << '\n';
    for (const auto& o : panel.observations) {
        os << o.firm_id << ',' << o.fiscal_year << ',' << o.month << ',' << format_number(o.outcome) << ','
           << format_number(o.investment) << ',';
        if (o.latent_eps) os << format_number(*o.latent_eps);
        os << ',';
        if (o.latent_z) os << format_number(*o.latent_z);
        for (double f : o.features) os << ',' << format_number(f);
        os << '\n';
    }
}

inline PanelDataset read_panel_csv(std::istream& is, std::string provenance = "csv") {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::io, "panel CSV is empty");
    const auto header = split_csv_line(line);
    static constexpr std::string_view fixed[] = {"firm_id", "fiscal_year", "month",   "outcome",
                                                 "investment", "latent_eps", "latent_z"};
    require(header.size() >= 7, ErrorKind::data, "panel CSV header too short");
    for (std::size_t i = 0; i < 7; ++i)
        require(header[i] == fixed[i], ErrorKind::data, "unexpected panel CSV column " + std::string(header[i]));
    PanelDataset panel;
    panel.provenance = std::move(provenance);
    for (std::size_t j = 7; j < header.size(); ++j) {
        require(header[j] == "feat_" + std::to_string(j - 7), ErrorKind::data,
                "unexpected feature column " + std::string(header[j]));
        panel.feature_names.emplace_back(header[j]);
    }
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        const std::string where = "panel CSV line " + std::to_string(line_no);
        require(cells.size() == header.size(), ErrorKind::data, where + ": wrong number of fields");
        PanelObservation o;
        o.firm_id = std::string(cells[0]);
        o.fiscal_year = parse_int(cells[1], where);
        o.month = parse_int(cells[2], where);
        o.outcome = parse_number(cells[3], where);
        o.investment = parse_number(cells[4], where);
        if (!cells[5].empty()) o.latent_eps = parse_number(cells[5], where);
        if (!cells[6].empty()) o.latent_z = parse_number(cells[6], where);
        for (std::size_t j = 7; j < cells.size(); ++j) o.features.push_back(parse_number(cells[j], where));
        panel.observations.push_back(std::move(o));
    }
    panel.validate();
    return panel;
}

}  // namespace fo
