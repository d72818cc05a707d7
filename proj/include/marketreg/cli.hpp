#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimators.hpp"
#include "ingest.hpp"
#include "report.hpp"
#include "selftest.hpp"
#include "simulator.hpp"

namespace marketreg {

enum ExitCode : int {
    kExitOk = 0,
    kExitInputError = 2,
    kExitEstimationError = 3,
    kExitSelftestFailure = 4,
};

struct SimulateConfig {
    GbmParams params;
    std::optional<double> decay_to;
    std::optional<double> volume_nu;  // fraction per day; no volume column when unset
    double volume_n0 = 1e6;
    double volume_noise = 0.2;
    std::filesystem::path out;
};

struct RunConfig {
    enum class Command { Analyze, Simulate, Selftest };
    Command command = Command::Analyze;

    std::vector<std::filesystem::path> input_paths;
    IngestConfig ingest;
    AnalysisOptions analysis;
    std::filesystem::path output_dir = ".";
    bool emit_plots = false;

    SimulateConfig simulate;

    bool strict = false;
    std::optional<std::uint64_t> selftest_seed;
    double inject_drift = 0.0;
};

namespace detail {

inline std::string unique_name(const std::string& base, std::map<std::string, int>& seen) {
    const int n = ++seen[base];
    return n == 1 ? base : base + "_" + std::to_string(n);
}

}  // namespace detail

/// Reads every input, analyzes them concurrently, then writes report.json
/// (and plot files). Nothing is written unless every input succeeds.
inline int run_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.input_paths.empty()) {
        err << "error: analyze requires at least one --input\n";
        return kExitInputError;
    }

    struct Job {
        std::filesystem::path path;
        std::future<std::pair<DailySeries, IndexAnalysis>> result;
    };
    std::vector<Job> jobs;
    for (const auto& path : config.input_paths) {
        jobs.push_back({path, std::async(std::launch::async, [path, &config] {
                            auto series = read_daily_file(path, config.ingest);
                            auto analysis = analyze_index_detailed(series, config.analysis);
                            return std::make_pair(std::move(series), std::move(analysis));
                        })});
    }

    std::vector<std::pair<DailySeries, IndexAnalysis>> done;
    std::optional<int> failure;
    for (auto& job : jobs) {
        try {
            done.push_back(job.result.get());
        } catch (const Error& e) {
            if (!failure) {
                err << "error: " << job.path.string() << ": " << e.what() << "\n";
                failure = e.is_input_error() ? kExitInputError : kExitEstimationError;
            }
        } catch (const std::exception& e) {
            if (!failure) {
                err << "error: " << job.path.string() << ": " << e.what() << "\n";
                failure = kExitEstimationError;
            }
        }
    }
    if (failure) return *failure;

    std::vector<RegularityReport> reports;
    std::map<std::string, int> seen;
    for (auto& [series, analysis] : done) {
        analysis.report.index_name = detail::unique_name(analysis.report.index_name, seen);
        for (const auto& w : analysis.report.warnings) err << "warning: " << analysis.report.index_name << ": " << w << "\n";
        reports.push_back(analysis.report);
    }

    std::string report_text;
    try {
        report_text = render_report(reports, config.analysis);
    } catch (const Error& e) {
        err << "error: report: " << e.what() << "\n";
        return kExitEstimationError;
    }

    try {
        std::filesystem::create_directories(config.output_dir);
        if (config.emit_plots) {
            for (const auto& [series, analysis] : done) {
                const auto dir = config.output_dir / analysis.report.index_name;
                std::filesystem::create_directories(dir);
                for (const auto& [name, text] : render_plot_files(series, analysis))
                    write_file_atomic(dir / name, text);
            }
        }
        write_file_atomic(config.output_dir / "report.json", report_text);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    for (const auto& r : reports) {
        out << r.index_name << ": a=" << format_fixed(r.a, 2) << " mu=" << format_fixed(r.mu, 3)
            << " sigma=" << format_fixed(r.sigma, 3) << " m=" << format_fixed(r.m, 3)
            << " w=" << format_significant(r.w, 3) << " nu=" << (r.nu ? format_fixed(*r.nu, 2) : "-") << "\n";
    }
    out << "wrote " << (config.output_dir / "report.json").string() << "\n";
    return kExitOk;
}

/// Writes one simulated index in the canonical file format and echoes the
/// generating parameters on `out`.
inline int run_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto& sim = config.simulate;
    try {
        if (sim.out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
        const auto schedule = sim.decay_to ? VolatilitySchedule::linear_decay(sim.params.b, *sim.decay_to)
                                           : VolatilitySchedule::constant();
        auto series = simulate_gbm(sim.params, schedule, sim.out.stem().string());
        if (sim.volume_nu)
            series = with_volume(series, simulate_volume(*sim.volume_nu, sim.volume_n0, sim.volume_noise,
                                                         sim.params.n_days, sim.params.seed ^ 0x9E3779B97F4A7C15ull));
        std::ostringstream text;
        write_daily_file(text, series);
        if (sim.out.has_parent_path()) std::filesystem::create_directories(sim.out.parent_path());
        write_file_atomic(sim.out, text.str());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    out << "a=" << format_number(sim.params.a) << " b=" << format_number(sim.params.b)
        << " s0=" << format_number(sim.params.s0) << " days=" << sim.params.n_days << " seed=" << sim.params.seed
        << " dt=" << format_number(sim.params.dt);
    if (sim.decay_to) out << " decay_to=" << format_number(*sim.decay_to);
    if (sim.volume_nu) out << " volume_nu=" << format_number(*sim.volume_nu);
    out << " out=" << sim.out.string() << "\n";
    return kExitOk;
}

/// Seed precedence: explicit option, then MARKETREG_SEED, then the default.
inline int run_selftest(const RunConfig& config, std::ostream& out, std::ostream& err) {
    SelftestOptions opt;
    if (config.selftest_seed) {
        opt.seed = *config.selftest_seed;
    } else if (const char* env = std::getenv("MARKETREG_SEED"); env && *env) {
        try {
            opt.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "error: MARKETREG_SEED is not an unsigned integer: " << env << "\n";
            return kExitInputError;
        }
    }
    opt.tolerance_scale = config.strict ? 0.1 : 1.0;
    opt.drift_offset = config.inject_drift;
    out << "selftest seed=" << opt.seed << (config.strict ? " (strict, 0.1x tolerances)" : "") << "\n";
    try {
        return print_selftest(out, run_selftest(opt)) ? kExitOk : kExitSelftestFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitSelftestFailure;
    }
}

inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    switch (config.command) {
        case RunConfig::Command::Analyze: return run_analyze(config, out, err);
        case RunConfig::Command::Simulate: return run_simulate(config, out, err);
        case RunConfig::Command::Selftest: return run_selftest(config, out, err);
    }
    return kExitInputError;
}

}  // namespace marketreg
