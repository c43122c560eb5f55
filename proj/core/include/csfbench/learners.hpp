#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csfbench/dataset.hpp"

namespace csfbench {

/// One row per window: its simple returns, optionally z-scored within the window.
struct FeatureMatrix {
    Eigen::MatrixXd x;
    std::vector<int> labels; // 1 positive, 0 negative
    std::vector<std::string> ids;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
};

std::vector<double> window_features(std::span<const double> prices, bool zscore = true);
FeatureMatrix build_features(std::span<const LabeledWindow> windows, bool zscore = true);

// Gaussian naive Bayes --------------------------------------------------------

struct NaiveBayesModel {
    Eigen::MatrixXd means;     // 2 x d, row 0 negative, row 1 positive
    Eigen::MatrixXd variances; // 2 x d
    double log_prior[2] = {0.0, 0.0};
    double variance_floor = 1e-9;
    bool zscore = true;

    /// log P(pos | x) - log P(neg | x).
    double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return score(x) > 0.0 ? 1 : 0; }
};

NaiveBayesModel train_naive_bayes(const FeatureMatrix& data, double variance_floor = 1e-9);

// Linear SVM ------------------------------------------------------------------

struct SvmConfig {
    std::size_t epochs = 50;
    double learning_rate = 0.01;
    double c = 1.0;
    std::uint64_t seed = 0;
};

struct LinearModel {
    enum class Kind { svm, nb_derived };

    Eigen::VectorXd weights;
    double bias = 0.0;
    Kind kind = Kind::svm;
    bool zscore = true;

    /// Signed margin w.x + b.
    double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
};

/// SGD on 0.5 ||w||^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)), one sample per
/// step with the regularizer spread evenly over the n samples of an epoch.
LinearModel train_linear_svm(const FeatureMatrix& data, const SvmConfig& config = {});

double hinge_loss(const LinearModel& model, const FeatureMatrix& data);

// MLP ------------------------------------------------------------------------

struct MlpConfig {
    /// 0 drops the hidden layer (softmax regression).
    std::size_t hidden = 32;
    double learning_rate = 0.005;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

/// inputs -> ReLU(hidden) -> softmax(2), trained on cross-entropy.
struct MlpModel {
    Eigen::MatrixXd w1; // hidden x inputs (unused when hidden == 0)
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // 2 x hidden, or 2 x inputs without a hidden layer
    Eigen::VectorXd b2;
    MlpConfig config;
    bool zscore = true;

    std::size_t inputs() const noexcept;
    bool has_hidden() const noexcept { return config.hidden > 0; }

    /// He-initialized network.
    static MlpModel initialize(std::size_t inputs, const MlpConfig& config);

    /// Column-wise class probabilities (2 x n) for row-major samples x (n x d).
    Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;
    double positive_probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Mean cross-entropy over the batch.
    double loss(const Eigen::MatrixXd& x, std::span<const int> labels) const;

    struct Gradient {
        Eigen::MatrixXd w1;
        Eigen::VectorXd b1;
        Eigen::MatrixXd w2;
        Eigen::VectorXd b2;
    };
    /// Backpropagated gradient of loss(); returns the loss through `loss_out`.
    Gradient gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                      double* loss_out = nullptr) const;

    /// Flat parameter view, order w1, b1, w2, b2 (column-major).
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);
    static std::vector<double> flatten(const Gradient& g, bool hidden);
};

MlpModel train_mlp(const FeatureMatrix& data, const MlpConfig& config = {});

/// Max relative error between backprop gradients and central differences
/// over every parameter: |a - n| / max(|a|, |n|, 1e-6).
double gradient_check(const MlpModel& model, const Eigen::MatrixXd& x,
                      std::span<const int> labels, double epsilon = 1e-5);

} // namespace csfbench
