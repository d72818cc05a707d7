#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "estimators.hpp"
#include "series.hpp"

namespace marketreg {

/// Canonical number text for reports and plot files: scientific notation
/// below 1e-3 in magnitude, plain otherwise, always a period decimal
/// separator. Non-finite values have no JSON spelling and become null.
inline std::string format_number(double x) {
    if (!std::isfinite(x)) return "null";
    if (x == 0.0) return "0";
    char buf[48];
    if (std::abs(x) < 1e-3)
        std::snprintf(buf, sizeof buf, "%.10e", x);
    else
        std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Table precision: a and nu to 2 decimals, mu, sigma and m to 3,
/// w to 3 significant figures.
inline std::string format_fixed(double x, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

inline std::string format_significant(double x, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    return buf;
}

inline std::string to_string(VarianceFitMode mode) {
    return mode == VarianceFitMode::Intercept ? "intercept" : "origin";
}

namespace detail {

inline std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

// Minimal pretty-printing JSON emitter. Field order is insertion order,
// which keeps the report byte-stable.
class JsonWriter {
public:
    JsonWriter& begin_object(std::string_view key = {}) { return open(key, '{'); }
    JsonWriter& begin_array(std::string_view key = {}) { return open(key, '['); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& raw(std::string_view key, std::string_view literal) {
        prefix(key);
        out_ += literal;
        return *this;
    }
    JsonWriter& number(std::string_view key, double v) { return raw(key, format_number(v)); }
    JsonWriter& integer(std::string_view key, long long v) { return raw(key, std::to_string(v)); }
    JsonWriter& string(std::string_view key, std::string_view v) { return raw(key, json_escape(v)); }
    JsonWriter& null(std::string_view key) { return raw(key, "null"); }

    [[nodiscard]] std::string str() const { return out_ + "\n"; }

private:
    JsonWriter& open(std::string_view key, char bracket) {
        prefix(key);
        out_ += bracket;
        first_.push_back(true);
        return *this;
    }
    JsonWriter& close(char bracket) {
        const bool empty = first_.back();
        first_.pop_back();
        if (!empty) newline();
        out_ += bracket;
        return *this;
    }
    void prefix(std::string_view key) {
        if (!first_.empty()) {
            if (!first_.back()) out_ += ',';
            first_.back() = false;
            newline();
        }
        if (!key.empty()) {
            out_ += json_escape(key);
            out_ += ": ";
        }
    }
    void newline() {
        out_ += '\n';
        out_.append(2 * first_.size(), ' ');
    }

    std::string out_;
    std::vector<bool> first_;
};

inline void write_quantity(JsonWriter& j, std::string_view key, std::optional<double> value, std::string_view unit) {
    if (!value) {
        j.null(key);
        return;
    }
    j.begin_object(key).number("value", *value).string("unit", unit).end_object();
}

inline void write_fit(JsonWriter& j, std::string_view key, const std::optional<FitResult>& fit) {
    if (!fit) {
        j.null(key);
        return;
    }
    j.begin_object(key)
        .number("slope", fit->slope)
        .number("intercept", fit->intercept)
        .number("stderr_slope", fit->stderr_slope)
        .number("r_squared", fit->r_squared)
        .integer("n", static_cast<long long>(fit->n))
        .end_object();
}

inline std::string month_label(int year, unsigned month) {
    return Date{year, month, 1}.year_month();
}

}  // namespace detail

/// a and m columns of a set of reports, in order.
inline std::optional<double> cross_index_correlation(const std::vector<RegularityReport>& reports) {
    if (reports.size() < 3) return std::nullopt;
    std::vector<double> as, ms;
    for (const auto& r : reports) {
        as.push_back(r.a);
        ms.push_back(r.m);
    }
    return pearson_correlation(as, ms);
}

/// report.json text. Columns follow the summary table order (a, mu, sigma,
/// f0, m, w, nu); a missing nu is null.
inline std::string render_report(const std::vector<RegularityReport>& reports, const AnalysisOptions& options) {
    detail::JsonWriter j;
    j.begin_object();
    j.string("schema", "marketreg-report/1");
    j.begin_object("settings")
        .number("bin_width", options.bin_width)
        .string("variance_fit", to_string(options.variance_fit))
        .integer("min_days_per_month", static_cast<long long>(options.min_days_per_month))
        .end_object();

    j.begin_array("indices");
    for (const auto& r : reports) {
        const auto& d = r.diagnostics;
        j.begin_object();
        j.string("index", r.index_name);
        j.integer("n_days", static_cast<long long>(r.n_days));
        j.string("first_date", r.first.iso());
        j.string("last_date", r.last.iso());
        j.integer("n_months", static_cast<long long>(d.n_months));
        detail::write_quantity(j, "a", r.a, "percent per day");
        detail::write_quantity(j, "mu", r.mu, "percent");
        detail::write_quantity(j, "sigma", r.sigma, "percent");
        detail::write_quantity(j, "f0", r.f0, "count");
        detail::write_quantity(j, "m", r.m, "per month");
        detail::write_quantity(j, "w", r.w, "per month");
        detail::write_quantity(j, "nu", r.nu, "percent per day");

        j.begin_object("table_row")
            .raw("a", format_fixed(r.a, 2))
            .raw("mu", format_fixed(r.mu, 3))
            .raw("sigma", format_fixed(r.sigma, 3))
            .raw("m", format_fixed(r.m, 3))
            .raw("w", format_significant(r.w, 3));
        if (r.nu)
            j.raw("nu", format_fixed(*r.nu, 2));
        else
            j.null("nu");
        j.end_object();

        if (r.spike) {
            j.begin_object("variance_spike")
                .integer("tau", r.spike->tau)
                .string("month", detail::month_label(r.spike->year, r.spike->month))
                .number("value", r.spike->value)
                .end_object();
        } else {
            j.null("variance_spike");
        }

        j.begin_object("diagnostics");
        j.number("a_fraction_per_day", d.a_fraction);
        if (d.nu_fraction)
            j.number("nu_fraction_per_day", *d.nu_fraction);
        else
            j.null("nu_fraction_per_day");
        j.number("b_hat_per_sqrt_day", d.b_hat);
        j.begin_object("fits");
        detail::write_fit(j, "daily_growth", d.daily_growth);
        detail::write_fit(j, "monthly_growth", d.monthly_growth);
        detail::write_fit(j, "variance_decline", d.variance_decline);
        detail::write_fit(j, "volume_growth", d.volume_growth);
        j.end_object();
        j.begin_object("errors");
        for (const auto& [field, message] : d.errors) j.string(field, message);
        j.end_object();
        j.end_object();

        j.begin_array("warnings");
        for (const auto& w : r.warnings) j.string({}, w);
        j.end_array();
        j.end_object();
    }
    j.end_array();

    std::optional<double> r_am;
    std::optional<std::string> r_error;
    try {
        r_am = cross_index_correlation(reports);
    } catch (const Error& e) {
        r_error = e.what();
    }
    if (r_am || r_error) {
        j.begin_object("cross_index");
        j.integer("n_indices", static_cast<long long>(reports.size()));
        if (r_am)
            j.number("pearson_a_m", *r_am);
        else
            j.null("pearson_a_m");
        if (r_error) j.string("error", *r_error);
        j.end_object();
    } else {
        j.null("cross_index");
    }
    j.end_object();
    return j.str();
}

/// Writes `content` to a sibling temporary and renames it over `path`, so
/// readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
    }
}

/// Tab-separated data files behind the six figures, keyed by file name.
/// Each carries '#' comment lines naming its axes and the fitted slope in
/// the same text form as report.json.
inline std::map<std::string, std::string> render_plot_files(const DailySeries& series,
                                                            const IndexAnalysis& analysis) {
    const auto& rep = analysis.report;
    std::map<std::string, std::string> files;
    std::ostringstream os;

    {
        const auto& fit = rep.diagnostics.daily_growth;
        os << "# daily_log_price: " << rep.index_name << "\n"
           << "# x: t (trading days); y: ln S (dimensionless)\n"
           << "# slope: " << format_number(rep.a) << " percent per day\n"
           << "# intercept: " << format_number(fit.intercept) << "\n"
           << "t\tdate\tln_close\tfit\n";
        for (const auto& p : analysis.logs)
            os << static_cast<std::size_t>(p.t) << '\t' << series[static_cast<std::size_t>(p.t)].date.iso() << '\t'
               << format_number(p.ln_close) << '\t' << format_number(fit.at(p.t)) << '\n';
        files["daily_log_price.tsv"] = std::move(os).str();
    }
    {
        os = std::ostringstream();
        os << "# fluctuation_series: " << rep.index_name << "\n"
           << "# x: t (trading days); y: delta (percent)\n"
           << "# mu: " << format_number(rep.mu) << " percent\n"
           << "# sigma: " << format_number(rep.sigma) << " percent\n"
           << "t\tdate\tdelta\tmu\n";
        const auto& v = analysis.fluctuations.values;
        for (std::size_t k = 0; k < v.size(); ++k)
            os << k + 1 << '\t' << series[k + 1].date.iso() << '\t' << format_number(v[k]) << '\t'
               << format_number(rep.mu) << '\n';
        files["fluctuation_series.tsv"] = std::move(os).str();
    }
    {
        os = std::ostringstream();
        os << "# fluctuation_histogram: " << rep.index_name << "\n"
           << "# x: delta (percent); y: unnormalized count\n"
           << "# model: 1 + f0 exp(-(delta - mu)^2 / (2 sigma^2))\n"
           << "# f0: " << (rep.f0 ? format_number(*rep.f0) : "null") << "\n"
           << "# mu: " << format_number(rep.mu) << " percent\n"
           << "# sigma: " << format_number(rep.sigma) << " percent\n"
           << "bin_lo\tbin_hi\tcenter\tcount\tmodel\n";
        if (analysis.histogram) {
            const auto& h = *analysis.histogram;
            for (std::size_t i = 0; i < h.bins(); ++i)
                os << format_number(h.bin_edges[i]) << '\t' << format_number(h.bin_edges[i + 1]) << '\t'
                   << format_number(h.center(i)) << '\t' << h.counts[i] << '\t'
                   << (analysis.gaussian ? format_number((*analysis.gaussian)(h.center(i))) : "null") << '\n';
        }
        files["fluctuation_histogram.tsv"] = std::move(os).str();
    }
    {
        const auto& fit = rep.diagnostics.monthly_growth;
        os = std::ostringstream();
        os << "# monthly_mean_log: " << rep.index_name << "\n"
           << "# x: tau (months); y: monthly mean of ln S (dimensionless)\n"
           << "# slope: " << format_number(rep.m) << " per month\n"
           << "# intercept: " << format_number(fit.intercept) << "\n"
           << "tau\tmonth\tn_days\tmean_log\tfit\n";
        for (const auto& m : analysis.months)
            os << m.tau << '\t' << detail::month_label(m.year, m.month) << '\t' << m.n_days << '\t'
               << format_number(m.mean_log) << '\t' << format_number(fit.at(m.tau)) << '\n';
        files["monthly_mean_log.tsv"] = std::move(os).str();
    }
    {
        const auto& fit = rep.diagnostics.variance_decline;
        os = std::ostringstream();
        os << "# monthly_variance: " << rep.index_name << "\n"
           << "# x: tau (months); y: Sigma^2, variance of ln S within the month\n"
           << "# slope: " << format_number(rep.w) << " per month\n"
           << "# intercept: " << format_number(fit.intercept) << "\n"
           << "tau\tmonth\tvariance\tfit\n";
        for (const auto& m : analysis.months)
            os << m.tau << '\t' << detail::month_label(m.year, m.month) << '\t' << format_number(m.variance())
               << '\t' << format_number(fit.at(m.tau)) << '\n';
        files["monthly_variance.tsv"] = std::move(os).str();
    }
    {
        os = std::ostringstream();
        os << "# daily_log_volume: " << rep.index_name << "\n"
           << "# x: t (trading days); y: ln N (N = daily volume)\n";
        if (rep.nu && rep.diagnostics.volume_growth) {
            const auto& fit = *rep.diagnostics.volume_growth;
            os << "# slope: " << format_number(*rep.nu) << " percent per day\n"
               << "# intercept: " << format_number(fit.intercept) << "\n"
               << "t\tdate\tln_volume\tfit\n";
            for (std::size_t k = 0; k < series.size(); ++k) {
                const auto& v = series[k].volume;
                if (!v || *v <= 0) continue;
                const double t = static_cast<double>(k);
                os << k << '\t' << series[k].date.iso() << '\t' << format_number(std::log(static_cast<double>(*v)))
                   << '\t' << format_number(fit.at(t)) << '\n';
            }
        } else {
            os << "# slope: null (no volume data)\n"
               << "t\tdate\tln_volume\tfit\n";
        }
        files["daily_log_volume.tsv"] = std::move(os).str();
    }
    return files;
}

}  // namespace marketreg
