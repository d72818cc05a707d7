#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "estimators.hpp"
#include "ingest.hpp"
#include "simulator.hpp"

namespace marketreg {

inline constexpr std::uint64_t kDefaultSelftestSeed = 20190430;

struct SelftestOptions {
    std::uint64_t seed = kDefaultSelftestSeed;
    /// Multiplies every "within" tolerance; 0.1 is the strict mode.
    double tolerance_scale = 1.0;
    /// Test hook: added to the drift the estimator is expected to recover.
    double drift_offset = 0.0;
};

struct CheckResult {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Sampling standard deviation of the OLS slope fitted to a random walk
/// with i.i.d. steps of standard deviation `step_sd` observed at
/// t = 0..n-1. Writing the walk as a sum of steps, the slope is
/// sum_j step_j C_j / Sxx with C_j = sum_{t >= j} (t - tbar), so its
/// variance is step_sd^2 sum_j C_j^2 / Sxx^2. The textbook OLS standard
/// error assumes independent residuals and is far smaller.
inline double random_walk_slope_sd(std::size_t n, double step_sd) {
    if (n < 2) return 0.0;
    const double tbar = 0.5 * static_cast<double>(n - 1);
    double sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) sxx += (t - tbar) * (t - tbar);
    double tail = 0.0, sum_c2 = 0.0;
    for (std::size_t j = n - 1; j >= 1; --j) {
        tail += static_cast<double>(j) - tbar;
        sum_c2 += tail * tail;
    }
    return step_sd * std::sqrt(sum_c2) / sxx;
}

/// E[ln(1 + a + b eps)] to fourth order in (a, b): the per-step drift of
/// ln S under Euler steps, which is what a log-linear fit recovers.
inline double expected_log_drift(double a, double b) {
    const double b2 = b * b;
    return a - 0.5 * (a * a + b2) + (a * a * a + 3.0 * a * b2) / 3.0 -
           0.25 * (a * a * a * a + 6.0 * a * a * b2 + 3.0 * b2 * b2);
}

namespace detail {

inline CheckResult within(std::string name, double observed, double expected, double tolerance) {
    return {std::move(name), observed, expected, tolerance, std::abs(observed - expected) <= tolerance};
}

inline double lag1_autocorrelation(const std::vector<double>& xs) {
    const double m = mean(xs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        den += (xs[i] - m) * (xs[i] - m);
        if (i > 0) num += (xs[i] - m) * (xs[i - 1] - m);
    }
    return num / den;
}

}  // namespace detail

/// Simulate-then-estimate oracle suite. Every check compares an estimator
/// against the parameters the simulator was driven with, at a statistical
/// tolerance derived for that estimator.
inline std::vector<CheckResult> run_selftest(const SelftestOptions& opt = {}) {
    std::vector<CheckResult> out;
    const double s = opt.tolerance_scale;

    {
        constexpr std::size_t n = 100000;
        const auto dw = wiener_increments(n, 1.0, opt.seed);
        const double m = detail::mean(dw);
        const double sd = std::sqrt(detail::population_variance(dw, m));
        const double bound = 3.0 / std::sqrt(static_cast<double>(n));
        out.push_back(detail::within("wiener mean (dt=1)", m, 0.0, s * bound));
        out.push_back(detail::within("wiener std (dt=1)", sd, 1.0, s * 0.01));
        out.push_back(detail::within("wiener lag-1 autocorrelation", detail::lag1_autocorrelation(dw), 0.0,
                                     s * bound));
        const auto dw4 = wiener_increments(n, 4.0, opt.seed + 1);
        const double sd4 = std::sqrt(detail::population_variance(dw4, detail::mean(dw4)));
        out.push_back(detail::within("wiener std (dt=4)", sd4, 2.0, s * 0.02));
    }

    {
        GbmParams p{3e-4, 0.012, 1000.0, 5500, opt.seed + 2, 1.0};
        const auto series = simulate_gbm(p);
        const auto growth = fit_daily_growth(series);
        const double expected = expected_log_drift(p.a, p.b) + opt.drift_offset;
        const double sd = random_walk_slope_sd(p.n_days, p.b);
        out.push_back(detail::within("drift recovery (log-drift, random-walk sd)", growth.fit.slope, expected,
                                     s * 3.0 * sd));

        const auto mom = fluctuation_moments(daily_fluctuations(series));
        const double n = static_cast<double>(p.n_days - 1);
        out.push_back(detail::within("fluctuation mean", mom.mu, 100.0 * p.a, s * 3.0 * mom.sigma / std::sqrt(n)));
        out.push_back(detail::within("fluctuation std", mom.sigma, 100.0 * p.b, s * 0.05 * 100.0 * p.b));
    }

    {
        GbmParams p{3e-4, 0.012, 1000.0, 240 * kSyntheticDaysPerMonth, opt.seed + 3, 1.0};
        const auto flat = fit_variance_decline(monthly_aggregates(simulate_gbm(p)));
        out.push_back(detail::within("variance trend, constant b", flat.rate, 0.0, s * 3.0 * flat.fit.stderr_slope));

        const auto decay =
            fit_variance_decline(monthly_aggregates(simulate_gbm(p, VolatilitySchedule::linear_decay(0.02, 0.005))));
        const double margin = decay.rate + 3.0 * decay.fit.stderr_slope;
        out.push_back({"variance decline, decaying b (w + 3 se < 0)", margin, 0.0, 0.0, margin < 0.0});
    }

    {
        constexpr std::size_t n = 5000;
        const auto base = simulate_gbm({3e-4, 0.012, 1000.0, n, opt.seed + 4, 1.0});
        const auto noisy = fit_volume_growth(with_volume(base, simulate_volume(4e-4, 1e6, 0.2, n, opt.seed + 5)));
        out.push_back(detail::within("volume growth (noisy)", noisy.rate, 0.04, s * 3.0 * 100.0 * noisy.fit.stderr_slope));
    }

    {
        std::vector<DailyRecord> recs;
        for (std::size_t k = 0; k < 240 * kSyntheticDaysPerMonth; ++k)
            recs.push_back({synthetic_trading_date(k), 1000.0 * std::exp(5e-4 * static_cast<double>(k)), {}});
        const DailySeries series(std::move(recs), "noiseless");
        out.push_back(detail::within("noiseless a", fit_daily_growth(series).rate, 0.05, s * 1e-9));
        out.push_back(
            detail::within("noiseless m", fit_monthly_growth(monthly_aggregates(series)).rate, 0.0105, s * 1e-9));
    }

    {
        std::vector<double> centers, counts;
        for (int i = -6; i <= 6; ++i) {
            centers.push_back(0.5 * i);
            counts.push_back(1.0 + 100.0 * std::exp(-0.5 * centers.back() * centers.back()));
        }
        out.push_back(detail::within("offset-Gaussian amplitude", fit_gaussian_offset(centers, counts, 0.0, 1.0).f0,
                                     100.0, s * 1e-9));
    }

    {
        const auto series = with_volume(simulate_gbm({3e-4, 0.012, 1000.0, 300, opt.seed + 6, 1.0}),
                                        simulate_volume(4e-4, 1e6, 0.2, 300, opt.seed + 7));
        std::stringstream file;
        write_daily_file(file, series);
        const auto parsed = parse_daily_file(file, IngestConfig{}, series.index_name());
        const bool same = parsed == series;
        out.push_back({"canonical file round trip", same ? 1.0 : 0.0, 1.0, 0.0, same});
    }
    return out;
}

inline bool print_selftest(std::ostream& os, const std::vector<CheckResult>& results) {
    bool all = true;
    char line[256];
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-4s %-46s observed=% .6e expected=% .6e tol=%.3e\n",
                      r.passed ? "PASS" : "FAIL", r.name.c_str(), r.observed, r.expected, r.tolerance);
        os << line;
        all = all && r.passed;
    }
    os << (all ? "selftest: all checks passed\n" : "selftest: FAILED\n");
    return all;
}

}  // namespace marketreg
