#include "csfbench/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "csfbench/error.hpp"
#include "csfbench/rng.hpp"
#include "csfbench/series.hpp"
#include "csfbench/stats.hpp"

namespace csfbench {

std::vector<double> window_features(std::span<const double> prices, bool zscore) {
    std::vector<double> returns = simple_returns(prices);
    if (!zscore) return returns;
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    for (double& r : returns) r = sd > 0.0 ? (r - mean) / sd : 0.0;
    return returns;
}

FeatureMatrix build_features(std::span<const LabeledWindow> windows, bool zscore) {
    FeatureMatrix out;
    if (windows.empty()) return out;
    const std::size_t d = windows.front().prices.size() - 1;
    out.x.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(d));
    out.labels.reserve(windows.size());
    out.ids.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].prices.size() != d + 1) {
            fail(ErrorKind::invalid_input, "window '" + windows[i].id + "' has a different size");
        }
        const auto row = window_features(windows[i].prices, zscore);
        for (std::size_t j = 0; j < d; ++j) {
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        out.labels.push_back(windows[i].positive() ? 1 : 0);
        out.ids.push_back(windows[i].id);
    }
    if (!out.x.allFinite()) fail(ErrorKind::invalid_input, "non-finite feature values");
    return out;
}

namespace {

void require_two_classes(const FeatureMatrix& data) {
    if (data.rows() == 0 || static_cast<std::size_t>(data.labels.size()) != data.rows()) {
        fail(ErrorKind::training_error, "empty or inconsistent training data");
    }
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    if (positives == 0 || static_cast<std::size_t>(positives) == data.rows()) {
        fail(ErrorKind::training_error, "training data holds a single class");
    }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    return permutation(n, substream_seed(seed, epoch, 0xe90c));
}

} // namespace

// Naive Bayes -------------------------------------------------------------------

double NaiveBayesModel::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    double log_ratio = log_prior[1] - log_prior[0];
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        for (int c = 0; c < 2; ++c) {
            const double var = variances(c, j);
            const double diff = x(j) - means(c, j);
            const double log_density = -0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
            log_ratio += c == 1 ? log_density : -log_density;
        }
    }
    return log_ratio;
}

NaiveBayesModel train_naive_bayes(const FeatureMatrix& data, double variance_floor) {
    require_two_classes(data);
    if (!(variance_floor > 0.0)) fail(ErrorKind::invalid_config, "variance floor must be positive");
    const Eigen::Index d = data.x.cols();
    NaiveBayesModel model;
    model.variance_floor = variance_floor;
    model.means = Eigen::MatrixXd::Zero(2, d);
    model.variances = Eigen::MatrixXd::Zero(2, d);
    double counts[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int c = data.labels[i];
        counts[c] += 1.0;
        model.means.row(c) += data.x.row(static_cast<Eigen::Index>(i));
    }
    for (int c = 0; c < 2; ++c) model.means.row(c) /= counts[c];
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int c = data.labels[i];
        const Eigen::RowVectorXd diff = data.x.row(static_cast<Eigen::Index>(i)) - model.means.row(c);
        model.variances.row(c) += diff.cwiseProduct(diff);
    }
    for (int c = 0; c < 2; ++c) {
        model.variances.row(c) /= counts[c];
        model.variances.row(c) = model.variances.row(c).cwiseMax(variance_floor);
        model.log_prior[c] = std::log(counts[c] / static_cast<double>(data.rows()));
    }
    return model;
}

// Linear SVM ----------------------------------------------------------------------

LinearModel train_linear_svm(const FeatureMatrix& data, const SvmConfig& config) {
    require_two_classes(data);
    if (!(config.learning_rate > 0.0)) fail(ErrorKind::invalid_config, "learning rate must be positive");
    if (!(config.c >= 0.0)) fail(ErrorKind::invalid_config, "C must be non-negative");
    const std::size_t n = data.rows();
    LinearModel model;
    model.kind = LinearModel::Kind::svm;
    model.weights = Eigen::VectorXd::Zero(data.x.cols());
    const double shrink = config.learning_rate / static_cast<double>(n);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i : epoch_order(n, config.seed, epoch)) {
            const auto row = data.x.row(static_cast<Eigen::Index>(i)).transpose();
            const double y = data.labels[i] == 1 ? 1.0 : -1.0;
            const double margin = y * (model.weights.dot(row) + model.bias);
            model.weights -= shrink * model.weights;
            if (margin < 1.0) {
                model.weights += config.learning_rate * config.c * y * row;
                model.bias += config.learning_rate * config.c * y;
            }
        }
        if (!model.weights.allFinite() || !std::isfinite(model.bias) ||
            !std::isfinite(hinge_loss(model, data))) {
            fail(ErrorKind::diverged_training, "linear SVM diverged; lower the learning rate");
        }
    }
    return model;
}

double hinge_loss(const LinearModel& model, const FeatureMatrix& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double y = data.labels[i] == 1 ? 1.0 : -1.0;
        total += std::max(0.0, 1.0 - y * model.score(data.x.row(static_cast<Eigen::Index>(i)).transpose()));
    }
    return total / static_cast<double>(std::max<std::size_t>(1, data.rows()));
}

// MLP -------------------------------------------------------------------------------

std::size_t MlpModel::inputs() const noexcept {
    return static_cast<std::size_t>(has_hidden() ? w1.cols() : w2.cols());
}

MlpModel MlpModel::initialize(std::size_t inputs, const MlpConfig& config) {
    if (inputs == 0) fail(ErrorKind::invalid_config, "MLP needs at least one input");
    MlpModel model;
    model.config = config;
    Rng rng = make_rng(config.seed, 0, 0x1417);
    auto he = [&rng](Eigen::Index rows, Eigen::Index cols, std::size_t fan_in) {
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
        }
        return m;
    };
    const auto d = static_cast<Eigen::Index>(inputs);
    const auto h = static_cast<Eigen::Index>(config.hidden);
    if (config.hidden > 0) {
        model.w1 = he(h, d, inputs);
        model.b1 = Eigen::VectorXd::Zero(h);
        model.w2 = he(2, h, config.hidden);
    } else {
        model.w2 = he(2, d, inputs);
    }
    model.b2 = Eigen::VectorXd::Zero(2);
    return model;
}

namespace {

struct Forward {
    Eigen::MatrixXd z1;     // hidden x n
    Eigen::MatrixXd a1;     // hidden x n
    Eigen::MatrixXd logits; // 2 x n
};

Forward forward(const MlpModel& m, const Eigen::MatrixXd& x) {
    Forward f;
    if (m.has_hidden()) {
        f.z1 = (m.w1 * x.transpose()).colwise() + m.b1;
        f.a1 = f.z1.cwiseMax(0.0);
        f.logits = (m.w2 * f.a1).colwise() + m.b2;
    } else {
        f.logits = (m.w2 * x.transpose()).colwise() + m.b2;
    }
    return f;
}

/// Column-wise softmax and per-column log-sum-exp.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits, Eigen::VectorXd* log_norm) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    if (log_norm) log_norm->resize(logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double top = logits.col(c).maxCoeff();
        const Eigen::VectorXd e = (logits.col(c).array() - top).exp();
        const double sum = e.sum();
        p.col(c) = e / sum;
        if (log_norm) (*log_norm)(c) = top + std::log(sum);
    }
    return p;
}

double cross_entropy(const Eigen::MatrixXd& logits, const Eigen::VectorXd& log_norm,
                     std::span<const int> labels) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        total += log_norm(c) - logits(labels[static_cast<std::size_t>(c)], c);
    }
    return total / static_cast<double>(logits.cols());
}

} // namespace

Eigen::MatrixXd MlpModel::probabilities(const Eigen::MatrixXd& x) const {
    return softmax(forward(*this, x).logits, nullptr);
}

double MlpModel::positive_probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::MatrixXd row = x.transpose();
    return probabilities(row)(1, 0);
}

double MlpModel::loss(const Eigen::MatrixXd& x, std::span<const int> labels) const {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        fail(ErrorKind::invalid_input, "batch and label counts differ");
    }
    const Forward f = forward(*this, x);
    Eigen::VectorXd log_norm;
    softmax(f.logits, &log_norm);
    return cross_entropy(f.logits, log_norm, labels);
}

MlpModel::Gradient MlpModel::gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                                      double* loss_out) const {
    if (static_cast<std::size_t>(x.rows()) != labels.size() || x.rows() == 0) {
        fail(ErrorKind::invalid_input, "batch and label counts differ");
    }
    const Forward f = forward(*this, x);
    Eigen::VectorXd log_norm;
    Eigen::MatrixXd delta = softmax(f.logits, &log_norm); // becomes dLoss/dlogits
    if (loss_out) *loss_out = cross_entropy(f.logits, log_norm, labels);
    for (Eigen::Index c = 0; c < delta.cols(); ++c) delta(labels[static_cast<std::size_t>(c)], c) -= 1.0;
    delta /= static_cast<double>(x.rows());

    Gradient g;
    g.b2 = delta.rowwise().sum();
    if (has_hidden()) {
        g.w2 = delta * f.a1.transpose();
        const Eigen::MatrixXd d_hidden =
            (w2.transpose() * delta).cwiseProduct((f.z1.array() > 0.0).cast<double>().matrix());
        g.w1 = d_hidden * x;
        g.b1 = d_hidden.rowwise().sum();
    } else {
        g.w2 = delta * x;
    }
    return g;
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> out;
    auto append = [&out](const auto& m) { out.insert(out.end(), m.data(), m.data() + m.size()); };
    if (has_hidden()) {
        append(w1);
        append(b1);
    }
    append(w2);
    append(b2);
    return out;
}

void MlpModel::set_parameters(std::span<const double> values) {
    std::size_t pos = 0;
    auto assign = [&](auto& m) {
        if (pos + static_cast<std::size_t>(m.size()) > values.size()) {
            fail(ErrorKind::invalid_input, "parameter vector too short");
        }
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), m.size(), m.data());
        pos += static_cast<std::size_t>(m.size());
    };
    if (has_hidden()) {
        assign(w1);
        assign(b1);
    }
    assign(w2);
    assign(b2);
    if (pos != values.size()) fail(ErrorKind::invalid_input, "parameter vector too long");
}

std::vector<double> MlpModel::flatten(const Gradient& g, bool hidden) {
    std::vector<double> out;
    auto append = [&out](const auto& m) { out.insert(out.end(), m.data(), m.data() + m.size()); };
    if (hidden) {
        append(g.w1);
        append(g.b1);
    }
    append(g.w2);
    append(g.b2);
    return out;
}

MlpModel train_mlp(const FeatureMatrix& data, const MlpConfig& config) {
    require_two_classes(data);
    if (!data.x.allFinite()) fail(ErrorKind::training_error, "non-finite features");
    if (!(config.learning_rate > 0.0)) fail(ErrorKind::invalid_config, "learning rate must be positive");
    if (config.batch_size == 0) fail(ErrorKind::invalid_config, "batch size must be positive");
    MlpModel model = MlpModel::initialize(static_cast<std::size_t>(data.x.cols()), config);
    const std::size_t n = data.rows();
    Eigen::MatrixXd batch;
    std::vector<int> batch_labels;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = epoch_order(n, config.seed, epoch);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t size = std::min(config.batch_size, n - start);
            batch.resize(static_cast<Eigen::Index>(size), data.x.cols());
            batch_labels.resize(size);
            for (std::size_t b = 0; b < size; ++b) {
                batch.row(static_cast<Eigen::Index>(b)) = data.x.row(static_cast<Eigen::Index>(order[start + b]));
                batch_labels[b] = data.labels[order[start + b]];
            }
            double loss = 0.0;
            const auto g = model.gradient(batch, batch_labels, &loss);
            if (!std::isfinite(loss)) {
                fail(ErrorKind::diverged_training, "MLP loss became non-finite; lower the learning rate");
            }
            if (model.has_hidden()) {
                model.w1 -= config.learning_rate * g.w1;
                model.b1 -= config.learning_rate * g.b1;
            }
            model.w2 -= config.learning_rate * g.w2;
            model.b2 -= config.learning_rate * g.b2;
        }
    }
    if (!std::isfinite(model.loss(data.x, data.labels))) {
        fail(ErrorKind::diverged_training, "MLP loss became non-finite; lower the learning rate");
    }
    return model;
}

double gradient_check(const MlpModel& model, const Eigen::MatrixXd& x,
                      std::span<const int> labels, double epsilon) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
        fail(ErrorKind::invalid_config, "gradient-check epsilon must lie in [1e-6, 1e-3]");
    }
    const auto analytic = MlpModel::flatten(model.gradient(x, labels), model.has_hidden());
    const auto base = model.parameters();
    MlpModel probe = model;
    std::vector<double> shifted = base;
    double worst = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
        shifted[j] = base[j] + epsilon;
        probe.set_parameters(shifted);
        const double plus = probe.loss(x, labels);
        shifted[j] = base[j] - epsilon;
        probe.set_parameters(shifted);
        const double minus = probe.loss(x, labels);
        shifted[j] = base[j];
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double scale = std::max({std::abs(analytic[j]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[j] - numeric) / scale);
    }
    return worst;
}

} // namespace csfbench
