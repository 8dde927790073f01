#pragma once

// Monthly forecast records, realized outcomes and 12-month consensus.
//
// With one synthetic analyst per type the monthly cross-analyst median is the
// identity, so consensus is the plain mean of the monthly records. A
// multi-analyst adapter would take the median per month before this step.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fo/error.hpp"
#include "fo/panel.hpp"

namespace fo {

namespace forecaster {
inline const std::string analyst = "analyst";
inline const std::string gbrt = "gbrt";
inline const std::string linear = "linear";
}  // namespace forecaster

inline constexpr int kMinHorizon = 12;
inline constexpr int kMaxHorizon = 23;

struct ForecastRecord {
    std::string firm_id;
    int fiscal_year = 0;  ///< target fiscal year
    int horizon_months = kMinHorizon;
    int made_year = 0;
    int made_month = 1;
    std::string forecaster;
    double value = 0.0;

    auto key() const { return std::tie(firm_id, fiscal_year, forecaster, horizon_months); }

    /// forecast_made_at + horizon must land on the target fiscal-year end.
    bool dates_consistent() const {
        return month_index(made_year, made_month) + horizon_months == fiscal_year_end_index(fiscal_year);
    }
};

/// Forecast date for a target fiscal year at horizon h.
inline std::pair<int, int> forecast_date(int target_fiscal_year, int horizon) {
    const long idx = fiscal_year_end_index(target_fiscal_year) - horizon;
    return {static_cast<int>(idx / 12), static_cast<int>(idx % 12) + 1};
}

struct ConsensusKey {
    std::string firm_id;
    int fiscal_year = 0;
    std::string forecaster;
    auto operator<=>(const ConsensusKey&) const = default;
};

struct ForecastPanel {
    std::vector<ForecastRecord> records;
    std::map<FirmYear, double> realized;
    std::map<ConsensusKey, double> consensus;

    /// Sorts records canonically and recomputes every consensus entry.
    void finalize() {
        std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
        for (std::size_t i = 1; i < records.size(); ++i)
            require(records[i - 1].key() != records[i].key(), ErrorKind::data,
                    "duplicate forecast record for " + records[i].firm_id + " " +
                        std::to_string(records[i].fiscal_year) + " " + records[i].forecaster);
        consensus.clear();
        for (std::size_t i = 0; i < records.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < records.size() && records[j].firm_id == records[i].firm_id &&
                   records[j].fiscal_year == records[i].fiscal_year &&
                   records[j].forecaster == records[i].forecaster) {
                sum += records[j].value;
                ++j;
            }
            consensus[{records[i].firm_id, records[i].fiscal_year, records[i].forecaster}] =
                sum / static_cast<double>(j - i);
            i = j;
        }
    }

    std::set<std::string> forecasters() const {
        std::set<std::string> out;
        for (const auto& r : records) out.insert(r.forecaster);
        return out;
    }

    bool has_forecaster(const std::string& name) const {
        return std::any_of(records.begin(), records.end(), [&](const auto& r) { return r.forecaster == name; });
    }

    /// realized - consensus for every firm-year where both exist.
    std::map<FirmYear, double> forecast_errors(const std::string& name) const {
        std::map<FirmYear, double> out;
        for (const auto& [k, c] : consensus) {
            if (k.forecaster != name) continue;
            const auto it = realized.find({k.firm_id, k.fiscal_year});
            if (it != realized.end()) out.emplace(FirmYear{k.firm_id, k.fiscal_year}, it->second - c);
        }
        return out;
    }

    std::map<FirmYear, double> consensus_of(const std::string& name) const {
        std::map<FirmYear, double> out;
        for (const auto& [k, c] : consensus)
            if (k.forecaster == name) out.emplace(FirmYear{k.firm_id, k.fiscal_year}, c);
        return out;
    }

    /// Adds another panel's records (realized values must agree where both exist).
    void merge(const ForecastPanel& other) {
        records.insert(records.end(), other.records.begin(), other.records.end());
        for (const auto& [k, v] : other.realized) {
            const auto [it, inserted] = realized.emplace(k, v);
            require(inserted || it->second == v, ErrorKind::alignment,
                    "realized outcome disagreement for " + k.firm_id + " " + std::to_string(k.year));
        }
        finalize();
    }

    /// Copy of the records of one forecaster under a new label.
    ForecastPanel relabeled(const std::string& from, const std::string& to) const {
        ForecastPanel out;
        out.realized = realized;
        for (const auto& r : records)
            if (r.forecaster == from) {
                out.records.push_back(r);
                out.records.back().forecaster = to;
            }
        out.finalize();
        return out;
    }
};

inline void write_forecast_csv(std::ostream& os, const ForecastPanel& fp) {
    os << "firm_id,fiscal_year,horizon_months,made_year,made_month,forecaster,value\n";
    for (const auto& r : fp.records)
        os << r.firm_id << ',' << r.fiscal_year << ',' << r.horizon_months << ',' << r.made_year << ','
           << r.made_month << ',' << r.forecaster << ',' << format_number(r.value) << '\n';
}

inline void write_consensus_csv(std::ostream& os, const ForecastPanel& fp) {
    os << "firm_id,fiscal_year,forecaster,consensus,realized,error\n";
    for (const auto& [k, c] : fp.consensus) {
        os << k.firm_id << ',' << k.fiscal_year << ',' << k.forecaster << ',' << format_number(c) << ',';
        const auto it = fp.realized.find({k.firm_id, k.fiscal_year});
        if (it != fp.realized.end()) os << format_number(it->second) << ',' << format_number(it->second - c);
        else os << ',';
        os << '\n';
    }
}

inline ForecastPanel read_forecast_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::io, "forecast CSV is empty");
    require(line.rfind("firm_id,fiscal_year,horizon_months,made_year,made_month,forecaster,value", 0) == 0,
            ErrorKind::data, "unexpected forecast CSV header");
    ForecastPanel fp;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        const std::string where = "forecast CSV line " + std::to_string(line_no);
        require(c.size() == 7, ErrorKind::data, where + ": wrong number of fields");
        ForecastRecord r{std::string(c[0]), parse_int(c[1], where), parse_int(c[2], where),
                         parse_int(c[3], where),  parse_int(c[4], where), std::string(c[5]),
                         parse_number(c[6], where)};
        require(r.dates_consistent(), ErrorKind::data, where + ": forecast date and horizon disagree");
        fp.records.push_back(std::move(r));
    }
    fp.finalize();
    return fp;
}

}  // namespace fo
