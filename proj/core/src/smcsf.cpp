#include "csfbench/smcsf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csfbench/error.hpp"
#include "csfbench/parallel.hpp"
#include "csfbench/rng.hpp"
#include "csfbench/stats.hpp"

namespace csfbench {

void SmCsfConfig::validate() const {
    if (window_sizes.empty()) fail(ErrorKind::invalid_config, "empty window-size set");
    if (!(smoothing > 0.0)) fail(ErrorKind::invalid_config, "smoothing must be positive");
    if (!(effectiveness_threshold >= 0.0)) {
        fail(ErrorKind::invalid_config, "effectiveness threshold must be non-negative");
    }
    if (!(ridge_lambda >= 0.0)) fail(ErrorKind::invalid_config, "ridge lambda must be non-negative");
    if (!(selection_rate > 0.0 && selection_rate < 1.0)) {
        fail(ErrorKind::invalid_config, "selection rate must lie in (0, 1)");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        fail(ErrorKind::invalid_config, "validation fraction must lie in (0, 1)");
    }
    if (fallback_top == 0) fail(ErrorKind::invalid_config, "fallback_top must be positive");
}

RidgeFit fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   double lambda) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (n == 0 || targets.size() != n) fail(ErrorKind::invalid_input, "ridge: shape mismatch");
    if (!(lambda >= 0.0)) fail(ErrorKind::invalid_config, "ridge lambda must be non-negative");

    // Normal equations with the intercept as the last, unpenalized unknown.
    Eigen::MatrixXd system(d + 1, d + 1);
    system.topLeftCorner(d, d) = features.transpose() * features;
    system.topLeftCorner(d, d).diagonal().array() += static_cast<double>(n) * lambda;
    const Eigen::VectorXd column_sums = features.colwise().sum().transpose();
    system.topRightCorner(d, 1) = column_sums;
    system.bottomLeftCorner(1, d) = column_sums.transpose();
    system(d, d) = static_cast<double>(n);

    Eigen::VectorXd rhs(d + 1);
    rhs.head(d) = features.transpose() * targets;
    rhs(d) = targets.sum();

    if (lambda == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
        if (!lu.isInvertible()) {
            fail(ErrorKind::training_error,
                 "normal equations are singular at lambda = 0; raise ridge_lambda");
        }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    if (ldlt.info() != Eigen::Success) {
        fail(ErrorKind::training_error, "normal equations could not be factorized; raise ridge_lambda");
    }
    Eigen::VectorXd solution = ldlt.solve(rhs);
    solution += ldlt.solve(rhs - system * solution); // one refinement step
    if (!solution.allFinite()) {
        fail(ErrorKind::training_error, "non-finite ridge solution; raise ridge_lambda");
    }
    return {solution.head(d), solution(d)};
}

namespace {

std::string config_fingerprint(const SmCsfConfig& c) {
    std::ostringstream out;
    out << std::hexfloat;
    for (int s : c.window_sizes) out << s << ',';
    out << ';' << c.smoothing << ';' << c.effectiveness_threshold << ';' << c.ridge_lambda << ';'
        << c.selection_rate << ';' << c.validation_fraction << ';' << c.split_seed << ';'
        << c.fallback_top << ';' << static_cast<int>(c.target) << ';'
        << static_cast<int>(c.encoding);
    return to_hex(fnv1a64(out.str()));
}

double feature_value(std::uint32_t count, SmCsfConfig::Encoding encoding) {
    if (encoding == SmCsfConfig::Encoding::presence) return count > 0 ? 1.0 : 0.0;
    return static_cast<double>(count);
}

Eigen::MatrixXd feature_rows(std::span<const LabeledWindow> windows,
                             const PatternVocabulary& vocab,
                             std::span<const std::size_t> columns,
                             SmCsfConfig::Encoding encoding) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(windows.size()),
                      static_cast<Eigen::Index>(columns.size()));
    parallel_for(windows.size(), [&](std::size_t i) {
        const FeatureVector fv = count_patterns(windows[i].prices, vocab);
        for (std::size_t j = 0; j < columns.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                feature_value(fv.counts[columns[j]], encoding);
        }
    });
    return x;
}

} // namespace

TrainedSmCsf train_smcsf(std::span<const LabeledWindow> windows, const SmCsfConfig& config) {
    config.validate();
    if (windows.size() < 200) {
        fail(ErrorKind::training_error, "SM-CSF needs at least 200 windows, got " +
                                            std::to_string(windows.size()));
    }
    const std::size_t positives = static_cast<std::size_t>(std::count_if(
        windows.begin(), windows.end(), [](const LabeledWindow& w) { return w.positive(); }));
    if (positives == 0 || positives == windows.size()) {
        fail(ErrorKind::training_error, "training data holds a single class");
    }

    TrainedSmCsf model;
    model.vocab = PatternVocabulary(config.window_sizes);
    model.config = config;
    const PatternVocabulary& vocab = model.vocab;

    const auto order = permutation(windows.size(), config.split_seed);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.validation_fraction *
                                                 static_cast<double>(windows.size()))));
    std::vector<std::size_t> val_pos(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_pos(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_pos.begin(), val_pos.end());
    std::sort(train_pos.begin(), train_pos.end());
    const auto train_set = take(windows, train_pos);
    const auto val_set = take(windows, val_pos);

    const OccurrenceTable table = occurrence_table(train_set, vocab);
    if (table.single_class) {
        fail(ErrorKind::training_error, "training split holds a single class");
    }
    const EffectivenessScore effectiveness = effectiveness_scores(
        table, vocab, config.smoothing, config.effectiveness_threshold);

    std::vector<std::size_t> columns;
    for (std::size_t p = 0; p < vocab.size(); ++p) {
        if (effectiveness.is_effective[p]) columns.push_back(p);
    }
    if (columns.empty()) {
        model.fallback_used = true;
        std::vector<std::size_t> ranked(vocab.size());
        std::iota(ranked.begin(), ranked.end(), std::size_t{0});
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(effectiveness.log_odds[a]) > std::abs(effectiveness.log_odds[b]);
        });
        ranked.resize(std::min(config.fallback_top, ranked.size()));
        std::sort(ranked.begin(), ranked.end());
        columns = std::move(ranked);
    }

    const Eigen::MatrixXd x = feature_rows(train_set, vocab, columns, config.encoding);
    Eigen::VectorXd y(static_cast<Eigen::Index>(train_set.size()));
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = config.target == SmCsfConfig::Target::label
                                              ? (train_set[i].positive() ? 1.0 : 0.0)
                                              : train_set[i].realized_return;
    }
    const RidgeFit fit = fit_ridge(x, y, config.ridge_lambda);

    for (std::size_t j = 0; j < columns.size(); ++j) {
        model.effective_patterns.push_back(vocab[columns[j]]);
        model.weights.push_back(fit.weights(static_cast<Eigen::Index>(j)));
    }
    model.intercept = fit.intercept;

    std::vector<double> val_scores(val_set.size());
    for (std::size_t i = 0; i < val_set.size(); ++i) val_scores[i] = score(val_set[i].prices, model);
    model.score_threshold = quantile(val_scores, 1.0 - config.selection_rate);

    model.config_hash = config_fingerprint(config);
    model.dataset_hash = content_hash(windows);
    return model;
}

std::vector<double> smcsf_features(std::span<const double> window, const TrainedSmCsf& model) {
    const FeatureVector fv = count_patterns(window, model.vocab);
    std::vector<double> out;
    out.reserve(model.effective_patterns.size());
    for (const auto& pattern : model.effective_patterns) {
        out.push_back(feature_value(fv.counts[model.vocab.index_of(pattern)], model.config.encoding));
    }
    return out;
}

double score(std::span<const double> window, const TrainedSmCsf& model) {
    const auto features = smcsf_features(window, model);
    double total = model.intercept;
    for (std::size_t j = 0; j < features.size(); ++j) total += model.weights[j] * features[j];
    return total;
}

bool predict(std::span<const double> window, const TrainedSmCsf& model) {
    return score(window, model) > model.score_threshold;
}

} // namespace csfbench
