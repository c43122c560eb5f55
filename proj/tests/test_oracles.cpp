#include "csfbench/bench.hpp"
#include "csfbench/oracles.hpp"
#include "support.hpp"

using namespace csfbench;
using csfbench::test::expect_error;
using csfbench::test::window_from_steps;

namespace {

CsfRule single_weight_rule(double threshold) {
    CsfRule rule;
    rule.weights.assign(rule.vocab.size(), 0.0);
    rule.weights[rule.vocab.index_of(SignPattern{3, 0b111})] = 1.0;
    rule.threshold = threshold;
    return rule;
}

} // namespace

TEST(GtCsf, ZeroWeightsNeverSelect) {
    CsfRule rule;
    rule.weights.assign(rule.vocab.size(), 0.0);
    rule.threshold = 0.0;
    const auto p = gt_csf_predict(window_from_steps("a", std::string(19, 'U'), true), rule);
    EXPECT_EQ(p.score, 0.0);
    EXPECT_FALSE(p.selected);
}

TEST(GtCsf, MonotoneUpScoresSeventeen) {
    const auto p = gt_csf_predict(window_from_steps("a", std::string(19, 'U'), true), single_weight_rule(10.0));
    EXPECT_EQ(p.window_id, "a");
    EXPECT_EQ(p.score, 17.0);
    EXPECT_TRUE(p.selected);
}

TEST(GtCsf, StrictThreshold) {
    const auto p = gt_csf_predict(window_from_steps("a", std::string(19, 'U'), true), single_weight_rule(17.0));
    EXPECT_FALSE(p.selected);
}

TEST(GtCsf, UncalibratedRule) {
    CsfRule rule = single_weight_rule(1.0);
    rule.threshold.reset();
    expect_error(ErrorKind::invalid_rule,
                 [&rule] { gt_csf_predict(window_from_steps("a", std::string(19, 'U'), true), rule); });
}

TEST(GtNcsf, MonotoneAndAlternating) {
    const NcsfRule rule;
    const auto up = gt_ncsf_predict(window_from_steps("u", std::string(19, 'U'), true), rule);
    EXPECT_EQ(up.score, 1.0);
    EXPECT_TRUE(up.selected);
    std::string alt;
    for (int i = 0; i < 19; ++i) alt += i % 2 == 0 ? 'D' : 'U';
    const auto a = gt_ncsf_predict(window_from_steps("a", alt, false), rule);
    EXPECT_NEAR(a.score, 9.0 / 19.0, 1e-15);
    EXPECT_FALSE(a.selected);
}

TEST(GtNcsf, PredictionSetCoversEveryWindow) {
    const std::vector<LabeledWindow> ws{window_from_steps("u", std::string(19, 'U'), true),
                                        window_from_steps("d", std::string(19, 'D'), false)};
    const auto set = gt_ncsf_predictions(ws, NcsfRule{});
    EXPECT_EQ(set.model, "gt-ncsf");
    ASSERT_EQ(set.entries.size(), 2u);
    EXPECT_TRUE(set.entries[0].selected);
    EXPECT_FALSE(set.entries[1].selected);
    EXPECT_EQ(set.selected_count(), 1u);
}
