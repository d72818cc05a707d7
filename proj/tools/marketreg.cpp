#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "marketreg/cli.hpp"

int main(int argc, char** argv) {
    using marketreg::RunConfig;

    RunConfig config;
    CLI::App app{"Stock-index regularity estimator and generalized-Wiener simulator"};
    app.require_subcommand(1);

    auto* analyze = app.add_subcommand("analyze", "Estimate a, mu, sigma, f0, m, w, nu for each input file");
    std::vector<std::string> inputs;
    analyze->add_option("--input,-i", inputs, "Daily data file(s)")->required()->expected(1, -1);
    analyze->add_option("--bin-width", config.analysis.bin_width, "Histogram bin width, percent")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    const std::map<std::string, marketreg::VarianceFitMode> fit_modes{
        {"intercept", marketreg::VarianceFitMode::Intercept}, {"origin", marketreg::VarianceFitMode::Origin}};
    analyze->add_option("--variance-fit", config.analysis.variance_fit, "Sigma^2 fit: intercept|origin")
        ->transform(CLI::CheckedTransformer(fit_modes, CLI::ignore_case));
    analyze->add_option("--min-days", config.analysis.min_days_per_month, "Minimum trading days per month")
        ->capture_default_str();
    std::string out_dir = ".";
    analyze->add_option("--out,-o", out_dir, "Output directory")->capture_default_str();
    analyze->add_flag("--plots", config.emit_plots, "Write tab-separated figure data per index");
    analyze->add_option("--date-column", config.ingest.date_column)->capture_default_str();
    analyze->add_option("--price-column", config.ingest.price_column)->capture_default_str();
    std::string volume_column = *config.ingest.volume_column;
    analyze->add_option("--volume-column", volume_column)->capture_default_str();
    bool no_volume = false;
    analyze->add_flag("--no-volume", no_volume, "Ignore any volume column");
    analyze->add_option("--date-format", config.ingest.date_format, "Pattern using %Y %m %d %b")
        ->capture_default_str();
    analyze->add_option("--delimiter", config.ingest.delimiter)->capture_default_str();
    analyze->add_flag("--decimal-comma", config.ingest.decimal_comma, "Prices use ',' as decimal separator");

    auto* simulate = app.add_subcommand("simulate", "Write a simulated index in the canonical file format");
    auto& sim = config.simulate;
    simulate->add_option("--a", sim.params.a, "Drift, fraction per day")->required();
    simulate->add_option("--b", sim.params.b, "Volatility, fraction per sqrt(day)")->required();
    simulate->add_option("--s0", sim.params.s0, "Initial price")->required();
    simulate->add_option("--days", sim.params.n_days, "Number of trading days")->required();
    simulate->add_option("--seed", sim.params.seed, "64-bit seed")->required();
    simulate->add_option("--dt", sim.params.dt, "Step length in trading days")->capture_default_str();
    std::optional<double> decay_to;
    simulate->add_option("--decay-to", decay_to, "Decay b linearly to this value by the last day");
    std::optional<double> volume_nu;
    simulate->add_option("--volume-nu", volume_nu, "Also simulate volume growing at this fraction per day");
    simulate->add_option("--volume-n0", sim.volume_n0)->capture_default_str();
    simulate->add_option("--volume-noise", sim.volume_noise)->capture_default_str();
    std::string sim_out;
    simulate->add_option("--out,-o", sim_out, "Output file")->required();

    auto* selftest = app.add_subcommand("selftest", "Run the simulate-and-recover oracle suite");
    selftest->add_flag("--strict", config.strict, "Scale every tolerance by 0.1");
    std::optional<std::uint64_t> seed;
    selftest->add_option("--seed", seed, "Seed (default: MARKETREG_SEED or built-in)");
    selftest->add_option("--inject-drift", config.inject_drift, "Test hook: offset the expected drift");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : marketreg::kExitInputError;
    }

    if (analyze->parsed()) {
        config.command = RunConfig::Command::Analyze;
        config.input_paths.assign(inputs.begin(), inputs.end());
        config.output_dir = out_dir;
        if (no_volume)
            config.ingest.volume_column.reset();
        else
            config.ingest.volume_column = volume_column;
    } else if (simulate->parsed()) {
        config.command = RunConfig::Command::Simulate;
        sim.decay_to = decay_to;
        sim.volume_nu = volume_nu;
        sim.out = sim_out;
    } else {
        config.command = RunConfig::Command::Selftest;
        config.selftest_seed = seed;
    }
    return marketreg::run(config, std::cout, std::cerr);
}
