#include <filesystem>
#include <fstream>
#include <sstream>

#include "csfbench/generators.hpp"
#include "csfbench/io.hpp"
#include "csfbench/oracles.hpp"
#include "support.hpp"

using namespace csfbench;
using csfbench::test::expect_error;

namespace {

std::string csv_rows(int n, bool descending = false, int bad_row = -1) {
    std::ostringstream out;
    out << "Date,Open,Close,Adj Close\n";
    for (int k = 0; k < n; ++k) {
        const int i = descending ? n - 1 - k : k;
        char date[16];
        std::snprintf(date, sizeof date, "2020-01-%02d", i + 1);
        const double close = 100.0 + i * 0.5 + (i % 3 == 0 ? -1.0 : 0.0);
        out << date << ",1," << close << ",";
        if (i == bad_row) out << "N/A";
        else out << close * 0.9;
        out << "\n";
    }
    return out.str();
}

IngestResult ingest_text(const std::string& text, CsvSpec spec = {}) {
    std::istringstream in(text);
    return ingest_csv(in, spec, "sample");
}

Dataset small_csf(std::size_t n) {
    CsfRule rule = sample_csf_rule(PatternVocabulary(), 10, 3);
    calibrate_threshold(rule, 0.8, 1000, 4);
    GenConfig config;
    config.n_windows = n;
    config.seed = 5;
    return generate_csf(rule, config);
}

} // namespace

TEST(Ingest, WellFormedFile) {
    const auto r = ingest_text(csv_rows(25));
    EXPECT_EQ(r.series.size(), 25u);
    EXPECT_TRUE(r.warnings.empty());
    EXPECT_EQ(r.price_column, "Adj Close");
    EXPECT_NEAR(r.series.prices()[1], 100.5 * 0.9, 1e-12);
}

TEST(Ingest, CloseColumnWhenAdjustedDisabled) {
    CsvSpec spec;
    spec.prefer_adjusted = false;
    const auto r = ingest_text(csv_rows(25), spec);
    EXPECT_EQ(r.price_column, "Close");
    EXPECT_EQ(r.series.prices()[1], 100.5);
}

TEST(Ingest, RejectsBadRowWithLineNumber) {
    const auto r = ingest_text(csv_rows(25, false, 4));
    EXPECT_EQ(r.series.size(), 24u);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("line 6"), std::string::npos) << r.warnings[0];
}

TEST(Ingest, DescendingFileIsReversed) {
    const auto asc = ingest_text(csv_rows(25));
    const auto desc = ingest_text(csv_rows(25, true));
    EXPECT_TRUE(desc.reversed);
    EXPECT_FALSE(asc.reversed);
    EXPECT_TRUE(std::equal(asc.series.prices().begin(), asc.series.prices().end(), desc.series.prices().begin(),
                           desc.series.prices().end()));
}

TEST(Ingest, Errors) {
    expect_error(ErrorKind::invalid_input, [] { ingest_text(csv_rows(20)); });
    expect_error(ErrorKind::invalid_input, [] { ingest_text("Date,Open\n2020-01-01,1\n"); });
    expect_error(ErrorKind::io_error, [] {
        CsvSpec spec;
        spec.path = "/nonexistent/prices.csv";
        ingest_csv(spec);
    });
}

TEST(Ingest, SampleFile) {
    CsvSpec spec;
    spec.path = std::filesystem::path(CSFBENCH_DATA_DIR) / "goog_daily.csv";
    const auto a = ingest_csv(spec);
    const auto b = ingest_csv(spec);
    EXPECT_GE(a.series.size(), 500u);
    EXPECT_TRUE(std::equal(a.series.prices().begin(), a.series.prices().end(), b.series.prices().begin(),
                           b.series.prices().end()));
}

TEST(RealToDataset, WindowCountsAndLabels) {
    std::vector<double> up(25);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = 10.0 + static_cast<double>(i);
    const Dataset d = real_to_dataset(PriceSeries("up", up, Family::real), 20);
    EXPECT_EQ(d.size(), 5u);
    EXPECT_EQ(d.family, Family::real);
    EXPECT_TRUE(d.provenance.overlapping);
    for (const auto& w : d.windows) EXPECT_TRUE(w.positive());
    EXPECT_EQ(real_to_dataset(PriceSeries("s", std::vector<double>(up.begin(), up.begin() + 21), Family::real), 20).size(), 1u);
    expect_error(ErrorKind::invalid_input, [&up] {
        real_to_dataset(PriceSeries("s", std::vector<double>(up.begin(), up.begin() + 20), Family::real), 20);
    });
}

TEST(DatasetIo, RoundTripIsBytewiseStable) {
    const Dataset d = small_csf(20000);
    std::ostringstream first;
    write_dataset(first, d);
    std::istringstream in(first.str());
    const Dataset back = read_dataset(in);
    EXPECT_EQ(content_hash(back.windows), content_hash(d.windows));
    EXPECT_EQ(back.provenance.config_hash, d.provenance.config_hash);
    EXPECT_EQ(back.provenance.seed, d.provenance.seed);
    EXPECT_EQ(back.family, d.family);
    std::ostringstream second;
    write_dataset(second, back);
    EXPECT_EQ(first.str(), second.str());
}

TEST(DatasetIo, TruncatedFileNamesLine) {
    std::ostringstream out;
    write_dataset(out, small_csf(5));
    std::string text = out.str();
    text.resize(text.size() - 40);
    std::istringstream in(text);
    try {
        read_dataset(in);
        FAIL() << "expected parse error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse_error);
        EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
    }
}

TEST(DatasetIo, RejectsOtherSchemaVersion) {
    std::ostringstream out;
    write_dataset(out, small_csf(3));
    std::string text = out.str();
    text.replace(text.find("csfbench-v1"), 11, "csfbench-v2");
    std::istringstream in(text);
    expect_error(ErrorKind::schema_error, [&in] { read_dataset(in); });
}

TEST(PredictionIo, RoundTrip) {
    PredictionSet p{"mlp", {{"a", 0.125, true}, {"b", -3.0e-300, false}, {"c", 0.1 + 0.2, true}}};
    std::ostringstream out;
    write_predictions(out, p);
    std::istringstream in(out.str());
    const PredictionSet back = read_predictions(in);
    EXPECT_EQ(back.model, "mlp");
    ASSERT_EQ(back.entries.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.entries[i].window_id, p.entries[i].window_id);
        EXPECT_EQ(back.entries[i].score, p.entries[i].score);
        EXPECT_EQ(back.entries[i].selected, p.entries[i].selected);
    }
}

TEST(PredictionIo, AcceptsIntegerSelectedFlags) {
    std::istringstream in("{\"schema\":\"pred-v1\",\"model\":\"rf\"}\n{\"id\":\"a\",\"score\":0.7,\"selected\":1}\n");
    const PredictionSet p = read_predictions(in);
    ASSERT_EQ(p.entries.size(), 1u);
    EXPECT_TRUE(p.entries[0].selected);
}

TEST(ModelIo, RulesRoundTrip) {
    CsfRule rule = sample_csf_rule(PatternVocabulary(), 10, 8);
    calibrate_threshold(rule, 0.8, 1000, 9);
    const CsfRule back = csf_rule_from_json(to_json(rule));
    EXPECT_EQ(back.weights, rule.weights);
    EXPECT_EQ(back.threshold, rule.threshold);
    EXPECT_EQ(back.vocab, rule.vocab);
    EXPECT_EQ(schema_of(to_json(rule)), kCsfRuleSchema);
    NcsfRule n;
    n.ratio_threshold = 0.8;
    const NcsfRule nb = ncsf_rule_from_json(to_json(n));
    EXPECT_EQ(nb.ratio_threshold, 0.8);
    EXPECT_EQ(nb.window, n.window);
    expect_error(ErrorKind::schema_error, [&rule] { ncsf_rule_from_json(to_json(rule)); });
}

TEST(ModelIo, LearnersRoundTrip) {
    const Dataset d = small_csf(600);
    const FeatureMatrix fm = build_features(d.windows);
    const NaiveBayesModel nb = train_naive_bayes(fm);
    const NaiveBayesModel nb2 = naive_bayes_from_json(to_json(nb));
    EXPECT_EQ(nb2.means, nb.means);
    EXPECT_EQ(nb2.variances, nb.variances);
    EXPECT_EQ(to_json(nb2), to_json(nb));
    const LinearModel svm = train_linear_svm(fm, SvmConfig{});
    EXPECT_EQ(to_json(svm_from_json(to_json(svm))), to_json(svm));
    MlpConfig mc;
    mc.epochs = 2;
    const MlpModel mlp = train_mlp(fm, mc);
    const MlpModel mlp2 = mlp_from_json(to_json(mlp));
    EXPECT_EQ(mlp2.parameters(), mlp.parameters());
    EXPECT_EQ(to_json(mlp2), to_json(mlp));
    const TrainedSmCsf sm = train_smcsf(d, SmCsfConfig{});
    const TrainedSmCsf sm2 = smcsf_from_json(to_json(sm));
    EXPECT_EQ(sm2.weights, sm.weights);
    EXPECT_EQ(sm2.effective_patterns, sm.effective_patterns);
    EXPECT_EQ(sm2.score_threshold, sm.score_threshold);
    EXPECT_EQ(to_json(sm2), to_json(sm));
}

TEST(ReportIo, RoundTrip) {
    ModelReport a{"sm-csf", "csf", 6000, 1200, 0.66, 0.52, std::pair{0.63, 0.69}, 0.76, 0.2, std::nullopt, {"fallback-top-k"}};
    ModelReport b{"gt-ncsf", "ncsf", 15000, 0, std::nullopt, 0.52, std::nullopt, std::nullopt, 0.0, 0.01, {"no-selection"}};
    const std::vector<ModelReport> rs{a, b};
    EXPECT_EQ(reports_from_json(reports_to_json(rs)), rs);
    std::ostringstream csv;
    write_reports_csv(csv, rs);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(SplitIo, RoundTripAndResolve) {
    const Dataset d = small_csf(50);
    const Split s = split_indices(d.size(), 0.3, 1);
    const SplitIds ids = split_ids(d, s);
    const SplitIds back = split_from_json(split_to_json(ids));
    EXPECT_EQ(back.train, ids.train);
    EXPECT_EQ(back.test, ids.test);
    const Split resolved = split_positions(d, back);
    EXPECT_EQ(resolved.train, s.train);
    EXPECT_EQ(resolved.test, s.test);
    SplitIds ghost = ids;
    ghost.test.push_back("nope");
    expect_error(ErrorKind::invalid_input, [&] { split_positions(d, ghost); });
}
