#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "marketreg/ingest.hpp"
#include "marketreg/simulator.hpp"
#include "test_util.hpp"

using namespace marketreg;

namespace {

DailySeries parse(const std::string& text, const IngestConfig& config = {}) {
    std::istringstream in(text);
    return parse_daily_file(in, config, "idx");
}

ErrorCode parse_error(const std::string& text, const IngestConfig& config = {},
                      std::optional<std::size_t>* line = nullptr) {
    try {
        parse(text, config);
    } catch (const Error& e) {
        if (line) *line = e.line();
        return e.code();
    }
    ADD_FAILURE() << "parse succeeded unexpectedly";
    return ErrorCode::Io;
}

}  // namespace

TEST(Ingest, MinimalFile) {
    const auto s = parse("Date,Close,Volume\n2019-04-01,100.5,1200000\n2019-04-02,101.0,1250000\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].date, (Date{2019, 4, 1}));
    EXPECT_EQ(s[0].close, 100.5);
    EXPECT_EQ(s[0].volume, 1200000);
    EXPECT_EQ(s[1].volume, 1250000);
    EXPECT_EQ(s.index_name(), "idx");
}

TEST(Ingest, SortsOnIngest) {
    const auto fwd = parse("Date,Close,Volume\n2019-04-01,100.5,1200000\n2019-04-02,101.0,1250000\n");
    const auto rev = parse("Date,Close,Volume\n2019-04-02,101.0,1250000\n2019-04-01,100.5,1200000\n");
    EXPECT_EQ(fwd, rev);
}

TEST(Ingest, MalformedPriceReportsLine) {
    std::optional<std::size_t> line;
    EXPECT_EQ(parse_error("Date,Close,Volume\n2019-04-01,abc,5\n", {}, &line), ErrorCode::MalformedRow);
    EXPECT_EQ(line, 2u);
}

TEST(Ingest, RejectsBadRows) {
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,0\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,-3\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close\n2019-02-30,3\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close,Volume\n2019-04-01,3,-1\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close,Volume\n2019-04-01,3,1.5\n"), ErrorCode::MalformedRow);
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,nan\n"), ErrorCode::MalformedRow);
}

TEST(Ingest, DuplicateDate) {
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,1\n2019-04-02,2\n2019-04-01,3\n"), ErrorCode::DuplicateDate);
}

TEST(Ingest, EmptyAndUnknownColumn) {
    EXPECT_EQ(parse_error(""), ErrorCode::EmptySeries);
    EXPECT_EQ(parse_error("Date,Close\n"), ErrorCode::EmptySeries);
    EXPECT_EQ(parse_error("Day,Close\n2019-04-01,1\n"), ErrorCode::UnknownColumn);
    IngestConfig cfg;
    cfg.volume_column = "Shares";
    EXPECT_EQ(parse_error("Date,Close\n2019-04-01,1\n", cfg), ErrorCode::UnknownColumn);
}

TEST(Ingest, VolumeOptional) {
    const auto s = parse("Date,Close\n2019-04-01,1\n2019-04-02,2\n");
    EXPECT_FALSE(s.has_volume());
    const auto t = parse("Date,Close,Volume\n2019-04-01,1,\n2019-04-02,2,0\n");
    EXPECT_FALSE(t[0].volume);
    EXPECT_EQ(t[1].volume, 0);  // zero-volume days are kept
}

TEST(Ingest, ExchangeStyleFormat) {
    IngestConfig cfg;
    cfg.date_column = "Trade Date";
    cfg.price_column = "Close Price";
    cfg.volume_column = "Shares Traded";
    cfg.date_format = "%d-%b-%Y";
    cfg.delimiter = ';';
    cfg.decimal_comma = true;
    const auto s = parse(
        "\xEF\xBB\xBF\"Trade Date\";\"Close Price\";\"Shares Traded\"\r\n"
        "02-Apr-2019;11713,20;300\r\n01-APR-2019;11669,15;200\r\n\r\n",
        cfg);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].date, (Date{2019, 4, 1}));
    EXPECT_DOUBLE_EQ(s[0].close, 11669.15);
    EXPECT_EQ(s[1].volume, 300);
}

TEST(Ingest, ConfigInvariants) {
    IngestConfig cfg;
    cfg.price_column = cfg.date_column;
    EXPECT_EQ(parse_error("Date,Close\n", cfg), ErrorCode::InvalidConfig);
    cfg = {};
    cfg.delimiter = '\n';
    EXPECT_EQ(parse_error("Date,Close\n", cfg), ErrorCode::InvalidConfig);
    cfg = {};
    cfg.decimal_comma = true;
    EXPECT_EQ(parse_error("Date,Close\n", cfg), ErrorCode::InvalidConfig);
}

TEST(Ingest, DateParsing) {
    EXPECT_EQ(parse_date("2019-04-01", "%Y-%m-%d"), (Date{2019, 4, 1}));
    EXPECT_EQ(parse_date("4/1/2019", "%m/%d/%Y"), (Date{2019, 4, 1}));
    EXPECT_EQ(parse_date("20190401", "%Y%m%d"), (Date{2019, 4, 1}));
    EXPECT_FALSE(parse_date("2019-04-01x", "%Y-%m-%d"));
    EXPECT_FALSE(parse_date("2019-4", "%Y-%m-%d"));
    EXPECT_FALSE(parse_date("19-04-01", "%Y-%m-%d"));
}

TEST(Ingest, RoundTripProperty) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng() % 400;
        auto series = simulate_gbm({0.0004, 0.02, 1.0 + static_cast<double>(rng() % 100000) / 7.0, n, rng(), 1.0});
        if (trial % 2 == 0) {
            auto vols = simulate_volume(0.001, 1e5, 0.5, n, rng());
            std::vector<DailyRecord> recs(series.records().begin(), series.records().end());
            for (std::size_t k = 0; k < n; ++k)
                if (rng() % 5 != 0) recs[k].volume = vols[k];  // some days lack volume
            series = DailySeries(recs, "idx");
        } else {
            series = DailySeries({series.records().begin(), series.records().end()}, "idx");
        }
        std::stringstream file;
        write_daily_file(file, series);
        EXPECT_EQ(parse(file.str()), series);
    }
}

TEST(Ingest, ParseIsTotal) {
    // Arbitrary bytes either parse or raise a structured Error.
    std::mt19937_64 rng(17);
    const std::string alphabet = "Date,Close,Volume\n0123456789-.;\"\r ab\xEF";
    int parsed = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text = trial % 3 == 0 ? "Date,Close,Volume\n" : "";
        const std::size_t len = rng() % 80;
        for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
        try {
            const auto s = parse(text);
            EXPECT_GT(s.size(), 0u);
            ++parsed;
        } catch (const Error&) {
        } catch (...) {
            FAIL() << "non-structured exception for input: " << text;
        }
    }
    // Well-formed inputs are a small minority of random streams.
    EXPECT_LT(parsed, 3000);
}

TEST(ValidateSeries, Summary) {
    const auto clean = marketreg::testing::series_from_closes({1.0, 2.0, 3.0});
    const auto s = validate_series(clean);
    EXPECT_EQ(s.n, 3u);
    EXPECT_EQ(s.bad_prices, 0u);
    EXPECT_EQ(s.missing_volumes, 3u);
    EXPECT_EQ(s.first, (Date{2000, 1, 1}));
    EXPECT_EQ(s.last, (Date{2000, 1, 3}));

    EXPECT_EQ(validate_series(marketreg::testing::series_from_closes({1.0, 0.0, 3.0})).bad_prices, 1u);

    // 100 -> 150 is a 50 percent move.
    EXPECT_DOUBLE_EQ(*validate_series(marketreg::testing::series_from_closes({100.0, 150.0})).max_abs_delta, 50.0);
}
