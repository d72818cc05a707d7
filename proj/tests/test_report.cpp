#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "marketreg/report.hpp"
#include "marketreg/simulator.hpp"
#include "test_util.hpp"

using namespace marketreg;
using json = nlohmann::json;

namespace {

DailySeries simulated_index(std::uint64_t seed, bool volume, std::size_t days = 21 * 60) {
    auto s = simulate_gbm({0.0003, 0.012, 1000.0, days, seed, 1.0}, VolatilitySchedule::constant(),
                          "sim" + std::to_string(seed));
    if (volume) s = with_volume(s, simulate_volume(0.0004, 1e6, 0.2, days, seed + 1000));
    return s;
}

std::string slope_line(const std::string& tsv) {
    std::istringstream in(tsv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# slope: ", 0) == 0) return line.substr(9, line.find(' ', 9) - 9);
    return {};
}

}  // namespace

TEST(FormatNumber, Conventions) {
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(0.05), "0.05");
    EXPECT_EQ(format_number(1.495), "1.495");
    EXPECT_EQ(format_number(-3.41e-6), "-3.4100000000e-06");
    EXPECT_EQ(format_number(std::nan("")), "null");
    EXPECT_EQ(format_fixed(0.0512, 2), "0.05");
    EXPECT_EQ(format_significant(-3.4149e-6, 3), "-3.41e-06");
}

TEST(Report, SchemaAndUnits) {
    const auto rep_with = analyze_index(simulated_index(1, true));
    const auto rep_without = analyze_index(simulated_index(2, false));
    const auto doc = json::parse(render_report({rep_with, rep_without}, AnalysisOptions{}));

    EXPECT_EQ(doc["schema"], "marketreg-report/1");
    EXPECT_EQ(doc["settings"]["variance_fit"], "intercept");
    ASSERT_EQ(doc["indices"].size(), 2u);
    const auto& a = doc["indices"][0];
    EXPECT_EQ(a["index"], "sim1");
    EXPECT_EQ(a["a"]["unit"], "percent per day");
    EXPECT_EQ(a["m"]["unit"], "per month");
    EXPECT_EQ(a["w"]["unit"], "per month");
    EXPECT_EQ(a["nu"]["unit"], "percent per day");
    EXPECT_NEAR(a["a"]["value"].get<double>(), rep_with.a, 1e-11);
    EXPECT_NEAR(a["w"]["value"].get<double>(), rep_with.w, 1e-9 * std::abs(rep_with.w));
    EXPECT_EQ(a["diagnostics"]["fits"]["daily_growth"]["n"], rep_with.n_days);
    EXPECT_TRUE(a["variance_spike"].is_object());

    // Column order follows the summary table.
    const auto ordered = nlohmann::ordered_json::parse(render_report({rep_with}, AnalysisOptions{}))["indices"][0];
    std::vector<std::string> keys;
    for (auto it = ordered.begin(); it != ordered.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> order{"a", "mu", "sigma", "f0", "m", "w", "nu"};
    std::size_t last = 0;
    for (const auto& k : order) {
        const auto pos = std::find(keys.begin(), keys.end(), k) - keys.begin();
        EXPECT_GE(static_cast<std::size_t>(pos), last) << k;
        last = static_cast<std::size_t>(pos);
    }

    const auto& b = doc["indices"][1];
    EXPECT_TRUE(b["nu"].is_null());
    EXPECT_TRUE(b["table_row"]["nu"].is_null());
    EXPECT_TRUE(b["diagnostics"]["fits"]["volume_growth"].is_null());
    EXPECT_TRUE(b["diagnostics"]["errors"].contains("nu"));

    // Fewer than three indices: no cross-index correlation.
    EXPECT_TRUE(doc["cross_index"].is_null());
}

TEST(Report, TableRowPrecision) {
    RegularityReport r;
    r.index_name = "NIFTY";
    r.a = 0.04987;
    r.mu = 0.05712;
    r.sigma = 1.49531;
    r.m = 0.010049;
    r.w = -3.4127e-6;
    r.nu = 0.0412;
    const auto doc = json::parse(render_report({r}, AnalysisOptions{}));
    const auto& row = doc["indices"][0]["table_row"];
    EXPECT_DOUBLE_EQ(row["a"].get<double>(), 0.05);
    EXPECT_DOUBLE_EQ(row["mu"].get<double>(), 0.057);
    EXPECT_DOUBLE_EQ(row["sigma"].get<double>(), 1.495);
    EXPECT_DOUBLE_EQ(row["m"].get<double>(), 0.010);
    EXPECT_DOUBLE_EQ(row["w"].get<double>(), -3.41e-6);
    EXPECT_DOUBLE_EQ(row["nu"].get<double>(), 0.04);
    EXPECT_TRUE(doc["indices"][0]["f0"].is_null());
}

TEST(Report, CrossIndexCorrelationFromReferenceRows) {
    const double as[] = {0.03, 0.04, 0.01, 0.03, 0.01, 0.05};
    const double ms[] = {0.006, 0.009, 0.003, 0.006, 0.002, 0.010};
    std::vector<RegularityReport> reps(6);
    for (int i = 0; i < 6; ++i) {
        reps[i].index_name = "i" + std::to_string(i);
        reps[i].a = as[i];
        reps[i].m = ms[i];
    }
    const auto doc = json::parse(render_report(reps, AnalysisOptions{}));
    EXPECT_EQ(doc["cross_index"]["n_indices"], 6);
    EXPECT_NEAR(doc["cross_index"]["pearson_a_m"].get<double>(), 0.987, 0.002);

    for (auto& r : reps) r.a = 0.02;  // constant column
    const auto degenerate = json::parse(render_report(reps, AnalysisOptions{}));
    EXPECT_TRUE(degenerate["cross_index"]["pearson_a_m"].is_null());
    EXPECT_TRUE(degenerate["cross_index"].contains("error"));
}

TEST(Report, ByteDeterministic) {
    const auto s = simulated_index(3, true);
    AnalysisOptions opt;
    opt.variance_fit = VarianceFitMode::Origin;
    const auto first = render_report({analyze_index(s, opt)}, opt);
    const auto second = render_report({analyze_index(s, opt)}, opt);
    EXPECT_EQ(first, second);
    EXPECT_EQ(json::parse(first)["settings"]["variance_fit"], "origin");
}

TEST(Report, EscapesNames) {
    RegularityReport r;
    r.index_name = "S&P \"500\"\n";
    const auto doc = json::parse(render_report({r}, AnalysisOptions{}));
    EXPECT_EQ(doc["indices"][0]["index"], "S&P \"500\"\n");
}

TEST(PlotFiles, SixFilesWithSlopesMatchingReport) {
    const auto s = simulated_index(4, true);
    const auto analysis = analyze_index_detailed(s);
    const auto files = render_plot_files(s, analysis);
    ASSERT_EQ(files.size(), 6u);
    const auto doc = json::parse(render_report({analysis.report}, AnalysisOptions{}));
    const auto& idx = doc["indices"][0];

    EXPECT_EQ(slope_line(files.at("daily_log_price.tsv")), format_number(analysis.report.a));
    EXPECT_EQ(slope_line(files.at("monthly_mean_log.tsv")), format_number(analysis.report.m));
    EXPECT_EQ(slope_line(files.at("monthly_variance.tsv")), format_number(analysis.report.w));
    EXPECT_EQ(slope_line(files.at("daily_log_volume.tsv")), format_number(*analysis.report.nu));
    EXPECT_EQ(json::parse(slope_line(files.at("daily_log_price.tsv"))).get<double>(), idx["a"]["value"].get<double>());
    EXPECT_EQ(json::parse(slope_line(files.at("monthly_variance.tsv"))).get<double>(), idx["w"]["value"].get<double>());
    EXPECT_EQ(json::parse(slope_line(files.at("daily_log_volume.tsv"))).get<double>(), idx["nu"]["value"].get<double>());

    // One data row per record / month / bin.
    auto rows = [](const std::string& text) {
        std::size_t n = 0;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') ++n;
        return n - 1;  // column header
    };
    EXPECT_EQ(rows(files.at("daily_log_price.tsv")), s.size());
    EXPECT_EQ(rows(files.at("fluctuation_series.tsv")), s.size() - 1);
    EXPECT_EQ(rows(files.at("fluctuation_histogram.tsv")), analysis.histogram->bins());
    EXPECT_EQ(rows(files.at("monthly_mean_log.tsv")), analysis.months.size());
    EXPECT_EQ(rows(files.at("monthly_variance.tsv")), analysis.months.size());
    EXPECT_EQ(rows(files.at("daily_log_volume.tsv")), s.size());
}

TEST(PlotFiles, NoVolume) {
    const auto s = simulated_index(5, false);
    const auto files = render_plot_files(s, analyze_index_detailed(s));
    EXPECT_NE(files.at("daily_log_volume.tsv").find("no volume data"), std::string::npos);
}
