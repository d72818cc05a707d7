#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "series.hpp"

namespace marketreg {

/// Standard normal variates from a seeded 64-bit Mersenne Twister using
/// the Marsaglia polar method. Both the engine and the transform are fixed
/// here, so a seed gives the same sequence on every platform (unlike
/// std::normal_distribution, whose algorithm is implementation-defined).
class NormalGenerator {
public:
    explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

private:
    // 53 random bits in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n draws of epsilon * sqrt(dt), epsilon ~ N(0, 1).
inline std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one increment");
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    NormalGenerator gen(seed);
    const double root_dt = std::sqrt(dt);
    std::vector<double> out(n);
    for (auto& x : out) x = gen() * root_dt;
    return out;
}

struct GbmParams {
    double a = 0.0;         // drift, fraction per day
    double b = 0.0;         // volatility, fraction per sqrt(day)
    double s0 = 1000.0;
    std::size_t n_days = 1;  // number of records, including S0
    std::uint64_t seed = 0;
    double dt = 1.0;

    void validate() const {
        if (!(s0 > 0.0) || !std::isfinite(s0)) throw Error(ErrorCode::InvalidArgument, "s0 must be positive");
        if (!(b >= 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "b must be non-negative");
        if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be finite");
        if (n_days < 1) throw Error(ErrorCode::InvalidArgument, "n_days must be at least 1");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    }
};

/// Volatility per step. Constant mode uses GbmParams::b; linear decay
/// interpolates from b_start at the first step to b_end at the last.
struct VolatilitySchedule {
    enum class Mode { Constant, LinearDecay };
    Mode mode = Mode::Constant;
    double b_start = 0.0;
    double b_end = 0.0;

    static VolatilitySchedule constant() { return {}; }
    static VolatilitySchedule linear_decay(double b_start, double b_end) {
        return {Mode::LinearDecay, b_start, b_end};
    }

    void validate() const {
        if (mode == Mode::LinearDecay && !(b_start >= b_end && b_end >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "decay schedule needs b_start >= b_end >= 0");
    }

    [[nodiscard]] double at(std::size_t step, std::size_t n_steps, double b_constant) const {
        if (mode == Mode::Constant) return b_constant;
        if (n_steps <= 1) return b_start;
        const double frac = static_cast<double>(step) / static_cast<double>(n_steps - 1);
        return b_start + (b_end - b_start) * frac;
    }
};

inline constexpr std::size_t kSyntheticDaysPerMonth = 21;
inline constexpr int kSyntheticEpochYear = 2000;
inline constexpr std::size_t kMaxRedraws = 1000;

/// Date of synthetic trading day k: 21 trading days per calendar month,
/// numbered 1..21, starting January 2000.
inline Date synthetic_trading_date(std::size_t k) {
    const std::size_t month_offset = k / kSyntheticDaysPerMonth;
    return Date{kSyntheticEpochYear + static_cast<int>(month_offset / 12),
                static_cast<unsigned>(month_offset % 12) + 1,
                static_cast<unsigned>(k % kSyntheticDaysPerMonth) + 1};
}

/// Euler steps of dS/S = a dt + b dW:
///   S_{k+1} = S_k (1 + a dt + b_k dW_k).
/// A step that would make S non-positive is redrawn; 1000 consecutive
/// failures raise PathRejectionLimit.
inline DailySeries simulate_gbm(const GbmParams& params,
                                const VolatilitySchedule& schedule = VolatilitySchedule::constant(),
                                std::string index_name = "simulated") {
    params.validate();
    schedule.validate();

    NormalGenerator gen(params.seed);
    const double root_dt = std::sqrt(params.dt);
    const std::size_t n_steps = params.n_days - 1;

    std::vector<DailyRecord> records;
    records.reserve(params.n_days);
    double s = params.s0;
    records.push_back({synthetic_trading_date(0), s, std::nullopt});
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double b = schedule.at(k, n_steps, params.b);
        double factor = 0.0;
        std::size_t tries = 0;
        do {
            if (tries++ == kMaxRedraws)
                throw Error(ErrorCode::PathRejectionLimit, "step " + std::to_string(k) + " rejected " +
                                                               std::to_string(kMaxRedraws) + " times");
            factor = 1.0 + params.a * params.dt + b * gen() * root_dt;
        } while (!(factor > 0.0));
        s *= factor;
        records.push_back({synthetic_trading_date(k + 1), s, std::nullopt});
    }
    return DailySeries(std::move(records), std::move(index_name));
}

/// N_k = round(n0 exp(nu k + eta_k)), eta_k ~ N(0, noise_sd^2).
inline std::vector<std::int64_t> simulate_volume(double nu, double n0, double noise_sd, std::size_t n_days,
                                                 std::uint64_t seed) {
    if (!(n0 >= 1.0)) throw Error(ErrorCode::InvalidArgument, "n0 must be at least 1");
    if (!(noise_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sd must be non-negative");
    NormalGenerator gen(seed);
    std::vector<std::int64_t> out;
    out.reserve(n_days);
    for (std::size_t k = 0; k < n_days; ++k) {
        const double eta = noise_sd > 0.0 ? noise_sd * gen() : 0.0;
        out.push_back(std::llround(n0 * std::exp(nu * static_cast<double>(k) + eta)));
    }
    return out;
}

/// Copy of `series` with the given volume column attached.
inline DailySeries with_volume(const DailySeries& series, const std::vector<std::int64_t>& volumes) {
    if (volumes.size() != series.size())
        throw Error(ErrorCode::InvalidArgument, "volume column length differs from series");
    std::vector<DailyRecord> records(series.records().begin(), series.records().end());
    for (std::size_t k = 0; k < records.size(); ++k) records[k].volume = volumes[k];
    return DailySeries(std::move(records), series.index_name());
}

}  // namespace marketreg
