#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "series.hpp"

namespace marketreg {

/// Column mapping and lexical conventions of a daily data file. The
/// defaults describe the canonical format: "Date,Close,Volume" header,
/// ISO dates, period decimals.
struct IngestConfig {
    std::string date_column = "Date";
    std::string price_column = "Close";
    std::optional<std::string> volume_column = std::string("Volume");
    std::string date_format = "%Y-%m-%d";
    char delimiter = ',';
    bool decimal_comma = false;

    void validate() const {
        if (date_column.empty() || price_column.empty())
            throw Error(ErrorCode::InvalidConfig, "column names must be non-empty");
        if (date_column == price_column)
            throw Error(ErrorCode::InvalidConfig, "date and price columns must differ");
        if (!std::isprint(static_cast<unsigned char>(delimiter)))
            throw Error(ErrorCode::InvalidConfig, "delimiter must be a printable character");
        if (decimal_comma && delimiter == ',')
            throw Error(ErrorCode::InvalidConfig, "decimal comma requires a delimiter other than ','");
        if (date_format.empty()) throw Error(ErrorCode::InvalidConfig, "empty date format");
    }
};

struct ValidationSummary {
    std::size_t n = 0;
    std::optional<Date> first;
    std::optional<Date> last;
    std::size_t bad_prices = 0;
    std::size_t missing_volumes = 0;
    std::optional<double> max_abs_delta;  // percent
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(delim, pos);
        cells.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return cells;
}

inline bool parse_uint(std::string_view s, std::size_t min_len, std::size_t max_len, std::size_t& pos,
                       unsigned& out) {
    std::size_t len = 0;
    unsigned value = 0;
    while (pos + len < s.size() && len < max_len && std::isdigit(static_cast<unsigned char>(s[pos + len]))) {
        value = value * 10 + static_cast<unsigned>(s[pos + len] - '0');
        ++len;
    }
    if (len < min_len) return false;
    pos += len;
    out = value;
    return true;
}

inline std::optional<unsigned> month_from_name(std::string_view name) {
    static constexpr std::string_view kNames[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                  "jul", "aug", "sep", "oct", "nov", "dec"};
    if (name.size() != 3) return std::nullopt;
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (unsigned i = 0; i < 12; ++i)
        if (kNames[i] == lower) return i + 1;
    return std::nullopt;
}

}  // namespace detail

/// Parses a date against a strftime-like pattern. Supported conversions:
/// %Y (4-digit year), %m and %d (1-2 digits), %b (English month
/// abbreviation), %% (literal percent). Other characters must match exactly.
inline std::optional<Date> parse_date(std::string_view text, std::string_view format) {
    Date d{0, 0, 0};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < format.size(); ++i) {
        if (format[i] != '%' || i + 1 == format.size()) {
            if (pos >= text.size() || text[pos] != format[i]) return std::nullopt;
            ++pos;
            continue;
        }
        unsigned v = 0;
        switch (format[++i]) {
            case 'Y':
                if (!detail::parse_uint(text, 4, 4, pos, v)) return std::nullopt;
                d.year = static_cast<int>(v);
                break;
            case 'm':
                if (!detail::parse_uint(text, 1, 2, pos, v)) return std::nullopt;
                d.month = v;
                break;
            case 'd':
                if (!detail::parse_uint(text, 1, 2, pos, v)) return std::nullopt;
                d.day = v;
                break;
            case 'b': {
                if (pos + 3 > text.size()) return std::nullopt;
                auto m = detail::month_from_name(text.substr(pos, 3));
                if (!m) return std::nullopt;
                d.month = *m;
                pos += 3;
                break;
            }
            case '%':
                if (pos >= text.size() || text[pos] != '%') return std::nullopt;
                ++pos;
                break;
            default:
                return std::nullopt;
        }
    }
    if (pos != text.size() || !d.valid()) return std::nullopt;
    return d;
}

inline std::optional<double> parse_decimal(std::string_view text, bool decimal_comma) {
    std::string buf(text);
    if (decimal_comma) std::replace(buf.begin(), buf.end(), ',', '.');
    if (buf.empty()) return std::nullopt;
    const char* first = buf.data();
    if (*first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, buf.data() + buf.size(), value);
    if (ec != std::errc() || ptr != buf.data() + buf.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

/// Reads one index from a header-bearing delimited text stream. Rows are
/// sorted by date on ingest; a row that cannot be parsed, a duplicated
/// date, or a non-positive price aborts the whole parse.
inline DailySeries parse_daily_file(std::istream& in, const IngestConfig& config, std::string index_name = {}) {
    config.validate();

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> header;
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        header_line = line;
        header = detail::split(header_line, config.delimiter);
        break;
    }
    if (header.empty()) throw Error(ErrorCode::EmptySeries, "stream has no header row");

    auto column = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), std::string_view(name));
        if (it == header.end()) throw Error(ErrorCode::UnknownColumn, name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = column(config.date_column);
    const std::size_t price_col = column(config.price_column);
    std::optional<std::size_t> volume_col;
    if (config.volume_column) {
        // The default volume column is optional; an explicitly renamed one is not.
        const auto it = std::find(header.begin(), header.end(), std::string_view(*config.volume_column));
        if (it != header.end())
            volume_col = static_cast<std::size_t>(it - header.begin());
        else if (*config.volume_column != IngestConfig{}.volume_column)
            throw Error(ErrorCode::UnknownColumn, *config.volume_column);
    }
    const std::size_t needed = std::max({date_col, price_col, volume_col.value_or(0)}) + 1;

    std::vector<DailyRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, config.delimiter);
        if (cells.size() < needed) throw Error(ErrorCode::MalformedRow, "too few cells", line_no);

        DailyRecord rec;
        const auto date = parse_date(cells[date_col], config.date_format);
        if (!date)
            throw Error(ErrorCode::MalformedRow, "bad date '" + std::string(cells[date_col]) + "'", line_no);
        rec.date = *date;

        const auto price = parse_decimal(cells[price_col], config.decimal_comma);
        if (!price)
            throw Error(ErrorCode::MalformedRow, "bad price '" + std::string(cells[price_col]) + "'", line_no);
        if (*price <= 0.0) throw Error(ErrorCode::MalformedRow, "non-positive price", line_no);
        rec.close = *price;

        if (volume_col && !cells[*volume_col].empty()) {
            const auto cell = cells[*volume_col];
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || v < 0)
                throw Error(ErrorCode::MalformedRow, "bad volume '" + std::string(cell) + "'", line_no);
            rec.volume = v;
        }
        records.push_back(rec);
    }
    if (records.empty()) throw Error(ErrorCode::EmptySeries, "no data rows");

    std::stable_sort(records.begin(), records.end(),
                     [](const DailyRecord& a, const DailyRecord& b) { return a.date < b.date; });
    for (std::size_t k = 1; k < records.size(); ++k)
        if (records[k].date == records[k - 1].date) throw Error(ErrorCode::DuplicateDate, records[k].date.iso());

    return DailySeries(std::move(records), std::move(index_name));
}

inline DailySeries read_daily_file(const std::filesystem::path& path, const IngestConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return parse_daily_file(in, config, path.stem().string());
}

/// Writes the canonical format. Prices use 17 significant digits so that
/// parse_daily_file() reproduces them exactly.
inline void write_daily_file(std::ostream& out, const DailySeries& series) {
    const bool with_volume = series.has_volume();
    out << (with_volume ? "Date,Close,Volume\n" : "Date,Close\n");
    char buf[40];
    for (const auto& r : series.records()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.close);
        out << r.date.iso() << ',' << buf;
        if (with_volume) {
            out << ',';
            if (r.volume) out << *r.volume;
        }
        out << '\n';
    }
}

inline ValidationSummary validate_series(const DailySeries& series) {
    ValidationSummary s;
    s.n = series.size();
    s.first = series.t_origin();
    if (!series.empty()) s.last = series.records().back().date;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& r = series[k];
        if (!(r.close > 0.0)) ++s.bad_prices;
        if (!r.volume) ++s.missing_volumes;
        if (k > 0 && series[k - 1].close > 0.0 && r.close > 0.0) {
            const double delta = std::abs(100.0 * (r.close - series[k - 1].close) / series[k - 1].close);
            if (!s.max_abs_delta || delta > *s.max_abs_delta) s.max_abs_delta = delta;
        }
    }
    return s;
}

}  // namespace marketreg
