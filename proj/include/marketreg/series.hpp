#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace marketreg {

/// Calendar date. Only (year, month) grouping and ordering are needed, so
/// this stays a plain value type instead of a full calendar library.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    auto operator<=>(const Date&) const = default;

    [[nodiscard]] static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    [[nodiscard]] static unsigned days_in_month(int y, unsigned m) {
        static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m < 1 || m > 12) return 0;
        return (m == 2 && is_leap(y)) ? 29u : kDays[m - 1];
    }

    [[nodiscard]] bool valid() const {
        return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
               day <= days_in_month(year, month);
    }

    /// ISO-8601 "YYYY-MM-DD".
    [[nodiscard]] std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
        return buf;
    }

    /// "YYYY-MM", used to label monthly aggregates.
    [[nodiscard]] std::string year_month() const { return iso().substr(0, 7); }
};

struct DailyRecord {
    Date date;
    double close = 0.0;
    std::optional<std::int64_t> volume;

    bool operator==(const DailyRecord&) const = default;
};

/// Ordered daily closes of one index. Record k sits at trading-day index
/// t = k; calendar gaps (weekends, holidays) do not advance t.
///
/// Construction enforces strictly increasing dates. Price positivity is
/// checked by the operations that need it, so a series holding a bad
/// price can still be inspected by validate_series().
class DailySeries {
public:
    DailySeries() = default;

    DailySeries(std::vector<DailyRecord> records, std::string index_name)
        : records_(std::move(records)), index_name_(std::move(index_name)) {
        for (std::size_t k = 0; k < records_.size(); ++k) {
            if (!records_[k].date.valid())
                throw Error(ErrorCode::InvalidSeries, "invalid date at record " + std::to_string(k));
            if (k > 0 && !(records_[k - 1].date < records_[k].date))
                throw Error(ErrorCode::InvalidSeries,
                            "dates not strictly increasing at " + records_[k].date.iso());
        }
    }

    [[nodiscard]] std::span<const DailyRecord> records() const { return records_; }
    [[nodiscard]] const std::string& index_name() const { return index_name_; }
    [[nodiscard]] std::size_t size() const { return records_.size(); }
    [[nodiscard]] bool empty() const { return records_.empty(); }
    [[nodiscard]] const DailyRecord& operator[](std::size_t k) const { return records_[k]; }

    /// Date of t = 0.
    [[nodiscard]] std::optional<Date> t_origin() const {
        if (records_.empty()) return std::nullopt;
        return records_.front().date;
    }

    [[nodiscard]] bool has_volume() const {
        return std::any_of(records_.begin(), records_.end(),
                           [](const DailyRecord& r) { return r.volume.has_value(); });
    }

    bool operator==(const DailySeries&) const = default;

private:
    std::vector<DailyRecord> records_;
    std::string index_name_;
};

/// Daily percentage changes; values[k] is the change from record k to k+1.
struct FluctuationSeries {
    std::vector<double> values;
    std::string source;
};

struct MonthlyAggregate {
    int tau = 0;             // 0-based over retained months
    int year = 0;
    unsigned month = 0;
    double mean_log = 0.0;   // <ln S> over the month
    double std_log = 0.0;    // population std of ln S over the month
    std::size_t n_days = 0;
    std::size_t first_day = 0;  // trading-day index of the month's first record

    [[nodiscard]] double variance() const { return std_log * std_log; }
};

struct LogPoint {
    double t = 0.0;
    double ln_close = 0.0;
};

inline constexpr std::size_t kMinDaysPerMonth = 10;

namespace detail {

// Shifted by the first element so a constant input gives its value exactly.
inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x - xs[0];
    return xs[0] + sum / static_cast<double>(xs.size());
}

// Two-pass population variance.
inline double population_variance(std::span<const double> xs, double mu) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return ss / static_cast<double>(xs.size());
}

inline void require_positive_prices(const DailySeries& series) {
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double c = series[k].close;
        if (!(c > 0.0) || !std::isfinite(c))
            throw Error(ErrorCode::NonPositivePrice,
                        "close " + std::to_string(c) + " on " + series[k].date.iso());
    }
}

}  // namespace detail

/// (t, ln close) for every record.
inline std::vector<LogPoint> log_series(const DailySeries& series) {
    detail::require_positive_prices(series);
    std::vector<LogPoint> out;
    out.reserve(series.size());
    for (std::size_t k = 0; k < series.size(); ++k)
        out.push_back({static_cast<double>(k), std::log(series[k].close)});
    return out;
}

/// Groups records by calendar month and summarizes ln S per month. Months
/// with fewer than `min_days` trading days are dropped; tau numbers the
/// retained months consecutively.
inline std::vector<MonthlyAggregate> monthly_aggregates(const DailySeries& series,
                                                        std::size_t min_days = kMinDaysPerMonth) {
    if (series.size() < 2)
        throw Error(ErrorCode::InsufficientData, "monthly aggregation needs at least 2 records");
    const auto logs = log_series(series);

    std::vector<MonthlyAggregate> out;
    std::vector<double> month_logs;
    std::size_t begin = 0;
    while (begin < series.size()) {
        const Date& d0 = series[begin].date;
        std::size_t end = begin;
        while (end < series.size() && series[end].date.year == d0.year && series[end].date.month == d0.month)
            ++end;
        const std::size_t n = end - begin;
        if (n >= min_days) {
            month_logs.clear();
            for (std::size_t k = begin; k < end; ++k) month_logs.push_back(logs[k].ln_close);
            MonthlyAggregate agg;
            agg.tau = static_cast<int>(out.size());
            agg.year = d0.year;
            agg.month = d0.month;
            agg.mean_log = detail::mean(month_logs);
            agg.std_log = std::sqrt(detail::population_variance(month_logs, agg.mean_log));
            agg.n_days = n;
            agg.first_day = begin;
            out.push_back(agg);
        }
        begin = end;
    }
    if (out.empty())
        throw Error(ErrorCode::InsufficientData,
                    "no calendar month has at least " + std::to_string(min_days) + " trading days");
    return out;
}

}  // namespace marketreg
