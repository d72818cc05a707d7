#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "series.hpp"

namespace marketreg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Least-squares line y = intercept + slope * x.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;

    [[nodiscard]] double at(double x) const { return intercept + slope * x; }
};

/// A growth rate in percent per unit time together with the log-linear fit
/// it was read from.
struct RateFit {
    double rate = 0.0;
    FitResult fit;
};

enum class VarianceFitMode { Intercept, Origin };

/// Ordinary least squares with intercept. stderr_slope is the usual
/// sqrt(SSR / (n - 2) / Sxx); it is 0 when n == 2 (no residual degrees
/// of freedom). r_squared is 1 when y is constant.
inline FitResult linear_least_squares(std::span<const Point> points) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(ErrorCode::InsufficientData, "least squares needs at least 2 points");

    double xm = 0.0, ym = 0.0;
    for (const auto& p : points) {
        xm += p.x;
        ym += p.y;
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x - xm, dy = p.y - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateX, "all x values are identical");

    FitResult fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double ssr = 0.0;
    for (const auto& p : points) {
        const double r = p.y - fit.at(p.x);
        ssr += r * r;
    }
    fit.stderr_slope = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return fit;
}

/// Least squares for y = slope * x (no intercept). r_squared is the
/// uncentered coefficient 1 - SSR / sum(y^2).
inline FitResult least_squares_through_origin(std::span<const Point> points) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(ErrorCode::InsufficientData, "least squares needs at least 2 points");
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::DegenerateX, "all x values are zero");

    FitResult fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    double ssr = 0.0;
    for (const auto& p : points) {
        const double r = p.y - fit.slope * p.x;
        ssr += r * r;
    }
    fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 1) / sxx);
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return fit;
}

/// a in percent per trading day: 100 x slope of ln(close) against t.
inline RateFit fit_daily_growth(const DailySeries& series) {
    if (series.size() < 2) throw Error(ErrorCode::InsufficientData, "daily growth needs at least 2 records");
    std::vector<Point> pts;
    pts.reserve(series.size());
    for (const auto& lp : log_series(series)) pts.push_back({lp.t, lp.ln_close});
    const auto fit = linear_least_squares(pts);
    return {100.0 * fit.slope, fit};
}

/// delta_k = 100 (S_k - S_{k-1}) / S_{k-1}: simple percentage returns.
inline FluctuationSeries daily_fluctuations(const DailySeries& series) {
    if (series.size() < 2) throw Error(ErrorCode::InsufficientData, "fluctuations need at least 2 records");
    FluctuationSeries out;
    out.source = series.index_name();
    out.values.reserve(series.size() - 1);
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double prev = series[k - 1].close;
        if (!(prev > 0.0))
            throw Error(ErrorCode::NonPositivePrice, "close " + std::to_string(prev) + " on " +
                                                         series[k - 1].date.iso());
        out.values.push_back(100.0 * (series[k].close - prev) / prev);
    }
    return out;
}

struct Moments {
    double mu = 0.0;
    double sigma = 0.0;
};

/// mu = <delta>, sigma = sqrt(<delta^2> - mu^2). The variance is
/// accumulated about the mean, which is the same quantity without the
/// cancellation of the raw-moment form.
inline Moments fluctuation_moments(const FluctuationSeries& fluct) {
    if (fluct.values.size() < 2) throw Error(ErrorCode::InsufficientData, "moments need at least 2 values");
    Moments m;
    m.mu = detail::mean(fluct.values);
    m.sigma = std::sqrt(detail::population_variance(fluct.values, m.mu));
    return m;
}

/// Uniform-width, unnormalized histogram. Bin i covers
/// [edges[i], edges[i+1]).
struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;

    [[nodiscard]] std::size_t bins() const { return counts.size(); }
    [[nodiscard]] double width() const { return bin_edges.size() > 1 ? bin_edges[1] - bin_edges[0] : 0.0; }
    [[nodiscard]] double center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }

    [[nodiscard]] std::size_t bin_of(double v) const {
        const double pos = std::floor((v - bin_edges.front()) / width());
        return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins() - 1)));
    }

    [[nodiscard]] std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

inline constexpr double kDefaultBinWidth = 0.1;

/// Bins span [min - width, max + width] so both tails have an empty
/// guard bin.
inline Histogram build_histogram(const FluctuationSeries& fluct, double bin_width = kDefaultBinWidth) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
    if (fluct.values.empty()) throw Error(ErrorCode::InsufficientData, "cannot bin an empty series");

    const auto [lo_it, hi_it] = std::minmax_element(fluct.values.begin(), fluct.values.end());
    const double lo = *lo_it - bin_width;
    const double hi = *hi_it + bin_width;
    const auto n_bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));

    Histogram h;
    h.bin_edges.reserve(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) h.bin_edges.push_back(lo + static_cast<double>(i) * bin_width);
    h.counts.assign(n_bins, 0);
    for (double v : fluct.values) ++h.counts[h.bin_of(v)];
    return h;
}

/// f(delta) = 1 + f0 exp(-(delta - mu)^2 / (2 sigma^2))
struct GaussianOffsetFit {
    double mu = 0.0;
    double sigma = 1.0;
    double f0 = 0.0;

    [[nodiscard]] double operator()(double delta) const {
        const double z = (delta - mu) / sigma;
        return 1.0 + f0 * std::exp(-0.5 * z * z);
    }
};

/// Fits the amplitude f0 of the offset Gaussian with mu and sigma held
/// fixed. Least squares over the bins from the first to the last occupied
/// one gives f0 = sum g_i (c_i - 1) / sum g_i^2, with g_i the unit Gaussian
/// factor at bin center i. Counts may be non-integral here.
inline GaussianOffsetFit fit_gaussian_offset(std::span<const double> centers, std::span<const double> counts,
                                             double mu, double sigma) {
    if (centers.size() != counts.size())
        throw Error(ErrorCode::InvalidArgument, "centers and counts differ in length");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorCode::DegenerateFit, "sigma must be positive");

    std::size_t occupied = 0;
    std::size_t first = counts.size(), last = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0.0) {
            ++occupied;
            first = std::min(first, i);
            last = i;
        }
    }
    if (occupied < 3) throw Error(ErrorCode::InsufficientData, "need at least 3 occupied bins");

    GaussianOffsetFit fit{mu, sigma, 0.0};
    double num = 0.0, den = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const double z = (centers[i] - mu) / sigma;
        const double g = std::exp(-0.5 * z * z);
        num += g * (counts[i] - 1.0);
        den += g * g;
    }
    if (!(den > 0.0)) throw Error(ErrorCode::DegenerateFit, "Gaussian factor vanishes on every bin");
    fit.f0 = std::max(0.0, num / den);
    return fit;
}

inline GaussianOffsetFit fit_gaussian_offset(const Histogram& hist, double mu, double sigma) {
    std::vector<double> centers, counts;
    centers.reserve(hist.bins());
    counts.reserve(hist.bins());
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        centers.push_back(hist.center(i));
        counts.push_back(static_cast<double>(hist.counts[i]));
    }
    return fit_gaussian_offset(centers, counts, mu, sigma);
}

/// m per month: slope of <ln S> against tau. Natural-log units, not percent.
inline RateFit fit_monthly_growth(std::span<const MonthlyAggregate> months) {
    if (months.size() < 2) throw Error(ErrorCode::InsufficientData, "monthly growth needs at least 2 months");
    std::vector<Point> pts;
    pts.reserve(months.size());
    for (const auto& m : months) pts.push_back({static_cast<double>(m.tau), m.mean_log});
    const auto fit = linear_least_squares(pts);
    return {fit.slope, fit};
}

/// w per month: slope of Sigma^2 against tau.
inline RateFit fit_variance_decline(std::span<const MonthlyAggregate> months,
                                    VarianceFitMode mode = VarianceFitMode::Intercept) {
    if (months.size() < 2) throw Error(ErrorCode::InsufficientData, "variance fit needs at least 2 months");
    std::vector<Point> pts;
    pts.reserve(months.size());
    for (const auto& m : months) pts.push_back({static_cast<double>(m.tau), m.variance()});
    const auto fit =
        mode == VarianceFitMode::Intercept ? linear_least_squares(pts) : least_squares_through_origin(pts);
    return {fit.slope, fit};
}

struct VarianceSpike {
    int tau = 0;
    double value = 0.0;  // Sigma^2
    int year = 0;
    unsigned month = 0;
};

/// Month of largest Sigma^2; the earliest wins a tie.
inline VarianceSpike detect_variance_spike(std::span<const MonthlyAggregate> months) {
    if (months.empty()) throw Error(ErrorCode::InsufficientData, "no monthly aggregates");
    const MonthlyAggregate* best = &months.front();
    for (const auto& m : months)
        if (m.variance() > best->variance()) best = &m;
    return {best->tau, best->variance(), best->year, best->month};
}

/// nu in percent per trading day, from ln(volume) against t over the
/// records whose volume is present and positive.
inline RateFit fit_volume_growth(const DailySeries& series) {
    std::vector<Point> pts;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& v = series[k].volume;
        if (v && *v > 0) pts.push_back({static_cast<double>(k), std::log(static_cast<double>(*v))});
    }
    if (pts.size() < 2) throw Error(ErrorCode::NoVolumeData, "fewer than 2 records with positive volume");
    const auto fit = linear_least_squares(pts);
    return {100.0 * fit.slope, fit};
}

inline double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "vectors differ in length");
    if (xs.size() < 2) throw Error(ErrorCode::InsufficientData, "correlation needs at least 2 pairs");
    const double xm = detail::mean(xs), ym = detail::mean(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - xm, dy = ys[i] - ym;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::DegenerateInput, "a vector is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct AnalysisOptions {
    double bin_width = kDefaultBinWidth;
    VarianceFitMode variance_fit = VarianceFitMode::Intercept;
    std::size_t min_days_per_month = kMinDaysPerMonth;
};

struct Diagnostics {
    FitResult daily_growth;
    FitResult monthly_growth;
    FitResult variance_decline;
    std::optional<FitResult> volume_growth;
    double a_fraction = 0.0;            // per day
    std::optional<double> nu_fraction;  // per day
    double b_hat = 0.0;                 // sigma / 100, per sqrt(day)
    std::size_t n_months = 0;
    /// First error per optional field, keyed by field name.
    std::map<std::string, std::string> errors;
};

/// One row of the summary table for one index.
struct RegularityReport {
    std::string index_name;
    std::size_t n_days = 0;
    Date first;
    Date last;
    double a = 0.0;      // percent per day
    double mu = 0.0;     // percent
    double sigma = 0.0;  // percent
    std::optional<double> f0;
    double m = 0.0;  // per month
    double w = 0.0;  // per month
    std::optional<double> nu;  // percent per day; absent without volume data
    std::optional<VarianceSpike> spike;
    Diagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// Everything analyze_index computes, including the intermediate series
/// needed to draw the figures.
struct IndexAnalysis {
    RegularityReport report;
    std::vector<LogPoint> logs;
    FluctuationSeries fluctuations;
    std::optional<Histogram> histogram;
    std::optional<GaussianOffsetFit> gaussian;
    std::vector<MonthlyAggregate> months;
};

inline constexpr std::size_t kShortHistoryDays = 1000;

/// Runs every estimator over one series. The price-based fields (a, mu,
/// sigma, m, w) must succeed or the error propagates; f0, nu and the spike
/// are optional and their failures are recorded in diagnostics.errors.
inline IndexAnalysis analyze_index_detailed(const DailySeries& series, const AnalysisOptions& options = {}) {
    IndexAnalysis out;
    RegularityReport& rep = out.report;
    rep.index_name = series.index_name();
    rep.n_days = series.size();
    if (series.size() < 2) throw Error(ErrorCode::InsufficientData, "series needs at least 2 records");
    rep.first = series[0].date;
    rep.last = series[series.size() - 1].date;
    if (series.size() < kShortHistoryDays)
        rep.warnings.push_back("short history: " + std::to_string(series.size()) +
                               " trading days; parameters drift with window length");

    out.logs = log_series(series);
    const auto growth = fit_daily_growth(series);
    rep.a = growth.rate;
    rep.diagnostics.daily_growth = growth.fit;
    rep.diagnostics.a_fraction = growth.fit.slope;

    out.fluctuations = daily_fluctuations(series);
    const auto moments = fluctuation_moments(out.fluctuations);
    rep.mu = moments.mu;
    rep.sigma = moments.sigma;
    rep.diagnostics.b_hat = moments.sigma / 100.0;

    try {
        out.histogram = build_histogram(out.fluctuations, options.bin_width);
        out.gaussian = fit_gaussian_offset(*out.histogram, moments.mu, moments.sigma);
        rep.f0 = out.gaussian->f0;
    } catch (const Error& e) {
        rep.diagnostics.errors.emplace("f0", e.what());
    }

    out.months = monthly_aggregates(series, options.min_days_per_month);
    rep.diagnostics.n_months = out.months.size();
    const auto monthly = fit_monthly_growth(out.months);
    rep.m = monthly.rate;
    rep.diagnostics.monthly_growth = monthly.fit;
    const auto decline = fit_variance_decline(out.months, options.variance_fit);
    rep.w = decline.rate;
    rep.diagnostics.variance_decline = decline.fit;
    rep.spike = detect_variance_spike(out.months);

    try {
        const auto volume = fit_volume_growth(series);
        rep.nu = volume.rate;
        rep.diagnostics.volume_growth = volume.fit;
        rep.diagnostics.nu_fraction = volume.fit.slope;
    } catch (const Error& e) {
        rep.diagnostics.errors.emplace("nu", e.what());
    }
    return out;
}

inline RegularityReport analyze_index(const DailySeries& series, const AnalysisOptions& options = {}) {
    return analyze_index_detailed(series, options).report;
}

}  // namespace marketreg
