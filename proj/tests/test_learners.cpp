#include <array>
#include <cmath>
#include <random>

#include "csfbench/bench.hpp"
#include "csfbench/generators.hpp"
#include "csfbench/learners.hpp"
#include "csfbench/stats.hpp"
#include "support.hpp"

using namespace csfbench;
using csfbench::test::expect_error;

namespace {

FeatureMatrix gaussian_classes(std::size_t n, double mu, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    FeatureMatrix fm;
    fm.x.resize(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : 0;
        fm.x(static_cast<Eigen::Index>(i), 0) = (label == 1 ? mu : -mu) + n01(rng);
        fm.labels.push_back(label);
        fm.ids.push_back(std::to_string(i));
    }
    return fm;
}

Dataset random_family(std::size_t n, std::uint64_t seed) {
    GenConfig config;
    config.n_windows = n;
    config.seed = seed;
    return generate_random(config);
}

FeatureMatrix xor_set() {
    FeatureMatrix fm;
    fm.x.resize(4, 2);
    fm.x << 0, 0, 0, 1, 1, 0, 1, 1;
    fm.labels = {0, 1, 1, 0};
    fm.ids = {"a", "b", "c", "d"};
    return fm;
}

// Precision of the top 20% by score on a random-family test set, checked
// against the Wilson interval around the base rate.
void expect_null_precision(const std::vector<double>& scores, const std::vector<LabeledWindow>& test) {
    std::vector<std::string> ids;
    for (const auto& w : test) ids.push_back(w.id);
    const ModelReport r = precision_of_selected(select_top_fraction("m", ids, scores, 0.2), test);
    const auto [lo, hi] = wilson_interval(static_cast<std::size_t>(std::llround(r.base_rate * static_cast<double>(r.n_selected))),
                                          r.n_selected);
    EXPECT_GE(*r.precision_pos, lo);
    EXPECT_LE(*r.precision_pos, hi);
}

} // namespace

TEST(Features, ReturnsAndZscore) {
    const std::vector<double> prices{100, 110, 99, 99};
    const auto raw = window_features(prices, false);
    ASSERT_EQ(raw.size(), 3u);
    EXPECT_NEAR(raw[0], 0.1, 1e-15);
    EXPECT_NEAR(raw[1], -0.1, 1e-15);
    EXPECT_EQ(raw[2], 0.0);
    const auto z = window_features(prices, true);
    double mean = 0.0, var = 0.0;
    for (double v : z) mean += v;
    mean /= 3.0;
    for (double v : z) var += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var / 3.0, 1.0, 1e-12);
    const auto flat = window_features(std::vector<double>{5, 5, 5, 5}, true);
    for (double v : flat) EXPECT_EQ(v, 0.0);
}

TEST(NaiveBayes, SeparatedGaussians) {
    const NaiveBayesModel model = train_naive_bayes(gaussian_classes(2000, 3.0, 1));
    const FeatureMatrix test = gaussian_classes(2000, 3.0, 2);
    int correct = 0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        correct += model.predict(test.x.row(static_cast<Eigen::Index>(i)).transpose()) == test.labels[i] ? 1 : 0;
    }
    EXPECT_GE(correct / 2000.0, 0.99);
}

TEST(NaiveBayes, NullDataNearBaseRate) {
    const Dataset train = random_family(5000, 3);
    const Dataset test = random_family(5000, 4);
    const NaiveBayesModel model = train_naive_bayes(build_features(train.windows));
    const FeatureMatrix fm = build_features(test.windows);
    std::vector<double> scores;
    for (std::size_t i = 0; i < fm.rows(); ++i) scores.push_back(model.score(fm.x.row(static_cast<Eigen::Index>(i)).transpose()));
    expect_null_precision(scores, test.windows);
}

TEST(NaiveBayes, ConstantFeatureUsesFloor) {
    FeatureMatrix fm = gaussian_classes(200, 1.0, 5);
    fm.x.conservativeResize(Eigen::NoChange, 2);
    fm.x.col(1).setConstant(4.0);
    const NaiveBayesModel model = train_naive_bayes(fm, 1e-9);
    EXPECT_EQ(model.variances(0, 1), 1e-9);
    EXPECT_TRUE(std::isfinite(model.score(fm.x.row(0).transpose())));
}

TEST(NaiveBayes, FeatureScalingLeavesScoresUnchanged) {
    const Dataset d = random_family(2000, 6);
    FeatureMatrix fm = build_features(d.windows);
    const NaiveBayesModel a = train_naive_bayes(fm);
    FeatureMatrix scaled = fm;
    for (Eigen::Index j = 0; j < scaled.x.cols(); ++j) scaled.x.col(j) *= 0.5 + 0.25 * static_cast<double>(j);
    const NaiveBayesModel b = train_naive_bayes(scaled);
    for (Eigen::Index i = 0; i < 200; ++i) {
        EXPECT_NEAR(a.score(fm.x.row(i).transpose()), b.score(scaled.x.row(i).transpose()), 1e-9);
    }
}

TEST(NaiveBayes, SingleClass) {
    FeatureMatrix fm = gaussian_classes(10, 1.0, 7);
    for (auto& l : fm.labels) l = 1;
    expect_error(ErrorKind::training_error, [&fm] { train_naive_bayes(fm); });
}

TEST(LinearSvm, SeparableToySet) {
    // two clusters with a margin around the line x0 + x1 = 0
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    FeatureMatrix fm;
    std::vector<std::array<double, 2>> pts;
    while (pts.size() < 200) {
        const double a = u(rng), b = u(rng);
        if (std::abs(a + b) / std::sqrt(2.0) < 1.0) continue;
        pts.push_back({a, b});
        fm.labels.push_back(a + b > 0 ? 1 : 0);
        fm.ids.push_back(std::to_string(pts.size()));
    }
    fm.x.resize(200, 2);
    for (Eigen::Index i = 0; i < 200; ++i) fm.x.row(i) << pts[static_cast<std::size_t>(i)][0], pts[static_cast<std::size_t>(i)][1];
    SvmConfig config;
    config.epochs = 500;
    config.c = 10.0;
    const LinearModel model = train_linear_svm(fm, config);
    int violations = 0;
    for (Eigen::Index i = 0; i < 200; ++i) {
        const double y = fm.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        violations += y * model.score(fm.x.row(i).transpose()) <= 0.0 ? 1 : 0;
    }
    EXPECT_EQ(violations, 0);
}

TEST(LinearSvm, FlippedLabelsNegateModel) {
    const Dataset d = random_family(1000, 9);
    FeatureMatrix fm = build_features(d.windows);
    const LinearModel a = train_linear_svm(fm, SvmConfig{});
    for (auto& l : fm.labels) l = 1 - l;
    const LinearModel b = train_linear_svm(fm, SvmConfig{});
    EXPECT_EQ(a.weights, -b.weights);
    EXPECT_EQ(a.bias, -b.bias);
}

TEST(LinearSvm, ZeroCKeepsWeightsAtZero) {
    SvmConfig config;
    config.c = 0.0;
    const LinearModel model = train_linear_svm(gaussian_classes(200, 2.0, 10), config);
    EXPECT_EQ(model.weights.norm(), 0.0);
    EXPECT_EQ(model.bias, 0.0);
}

TEST(LinearSvm, DivergenceIsReported) {
    SvmConfig config;
    config.learning_rate = 1e300;
    config.c = 1e300;
    expect_error(ErrorKind::diverged_training, [&config] { train_linear_svm(gaussian_classes(200, 2.0, 11), config); });
}

TEST(LinearSvm, NullDataNearBaseRate) {
    const Dataset train = random_family(5000, 12);
    const Dataset test = random_family(5000, 13);
    const LinearModel model = train_linear_svm(build_features(train.windows), SvmConfig{});
    const FeatureMatrix fm = build_features(test.windows);
    std::vector<double> scores;
    for (std::size_t i = 0; i < fm.rows(); ++i) scores.push_back(model.score(fm.x.row(static_cast<Eigen::Index>(i)).transpose()));
    expect_null_precision(scores, test.windows);
}

TEST(Mlp, LearnsXor) {
    MlpConfig config;
    config.hidden = 8;
    config.epochs = 5000;
    config.batch_size = 4;
    config.learning_rate = 0.1;
    config.seed = 1;
    const FeatureMatrix fm = xor_set();
    const MlpModel model = train_mlp(fm, config);
    const Eigen::MatrixXd probs = model.probabilities(fm.x);
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_EQ(probs(1, i) > 0.5 ? 1 : 0, fm.labels[static_cast<std::size_t>(i)]) << "row " << i;
    }
}

TEST(Mlp, ZeroEpochsKeepsInitialization) {
    MlpConfig config;
    config.epochs = 0;
    config.seed = 4;
    const Dataset train = random_family(3000, 14);
    const MlpModel trained = train_mlp(build_features(train.windows), config);
    const MlpModel init = MlpModel::initialize(19, config);
    EXPECT_EQ(trained.parameters(), init.parameters());
    const Dataset test = random_family(5000, 15);
    const Eigen::MatrixXd probs = trained.probabilities(build_features(test.windows).x);
    expect_null_precision(std::vector<double>(probs.row(1).begin(), probs.row(1).end()), test.windows);
}

TEST(Mlp, GradientCheckHidden) {
    const Dataset d = random_family(8, 16);
    const FeatureMatrix fm = build_features(d.windows);
    const MlpModel model = MlpModel::initialize(19, MlpConfig{});
    EXPECT_LT(gradient_check(model, fm.x, fm.labels, 1e-5), 1e-4);
}

TEST(Mlp, GradientCheckLinear) {
    const Dataset d = random_family(8, 17);
    const FeatureMatrix fm = build_features(d.windows);
    MlpConfig config;
    config.hidden = 0;
    const MlpModel model = MlpModel::initialize(19, config);
    EXPECT_LT(gradient_check(model, fm.x, fm.labels, 1e-5), 1e-6);
}

TEST(Mlp, ZeroInputGivesZeroFirstLayerGradient) {
    const MlpModel model = MlpModel::initialize(19, MlpConfig{});
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(8, 19);
    const std::vector<int> labels{0, 1, 0, 1, 1, 1, 0, 0};
    const auto g = model.gradient(x, labels);
    EXPECT_EQ(g.w1.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, GradientCheckEpsilonRange) {
    const MlpModel model = MlpModel::initialize(19, MlpConfig{});
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 19);
    const std::vector<int> labels{0, 1};
    expect_error(ErrorKind::invalid_config, [&] { gradient_check(model, x, labels, 1e-2); });
}

TEST(Mlp, DeterministicBySeed) {
    const Dataset d = random_family(600, 18);
    const FeatureMatrix fm = build_features(d.windows);
    MlpConfig config;
    config.epochs = 3;
    config.seed = 5;
    EXPECT_EQ(train_mlp(fm, config).parameters(), train_mlp(fm, config).parameters());
    MlpConfig other = config;
    other.seed = 6;
    EXPECT_NE(train_mlp(fm, config).parameters(), train_mlp(fm, other).parameters());
}

TEST(Mlp, ParameterRoundTrip) {
    MlpModel model = MlpModel::initialize(19, MlpConfig{});
    auto params = model.parameters();
    EXPECT_EQ(params.size(), 32u * 19 + 32 + 2 * 32 + 2);
    for (auto& p : params) p *= 2.0;
    model.set_parameters(params);
    EXPECT_EQ(model.parameters(), params);
}
