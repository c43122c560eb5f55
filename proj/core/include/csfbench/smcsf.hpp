#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csfbench/dataset.hpp"
#include "csfbench/patterns.hpp"

namespace csfbench {

struct SmCsfConfig {
    enum class Target { label, realized_return };
    enum class Encoding { counts, presence };

    std::vector<int> window_sizes{4, 5, 6, 7};
    double smoothing = 1.0;
    double effectiveness_threshold = 0.5;
    double ridge_lambda = 1e-3;
    double selection_rate = 0.2;
    double validation_fraction = 0.2;
    std::uint64_t split_seed = 0;
    /// Patterns kept by |log-odds| rank when none passes the threshold.
    std::size_t fallback_top = 10;
    Target target = Target::label;
    Encoding encoding = Encoding::counts;

    void validate() const;
};

struct TrainedSmCsf {
    PatternVocabulary vocab;
    SmCsfConfig config;
    std::vector<SignPattern> effective_patterns;
    std::vector<double> weights; // aligned with effective_patterns
    double intercept = 0.0;
    double score_threshold = 0.0;
    bool fallback_used = false;
    std::string config_hash;
    std::string dataset_hash;
};

struct RidgeFit {
    Eigen::VectorXd weights;
    double intercept = 0.0;
};

/// Minimizes ||X w + c - y||^2 + n * lambda * ||w||^2 (intercept c not
/// penalized) through the normal equations. Scaling the penalty by the row
/// count makes duplicated rows leave the solution unchanged. lambda == 0 with
/// a singular system throws training_error.
RidgeFit fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                   double lambda);

TrainedSmCsf train_smcsf(std::span<const LabeledWindow> windows, const SmCsfConfig& config);
inline TrainedSmCsf train_smcsf(const Dataset& dataset, const SmCsfConfig& config) {
    return train_smcsf(std::span<const LabeledWindow>(dataset.windows), config);
}

/// intercept + sum of weight * feature over effective patterns.
double score(std::span<const double> window, const TrainedSmCsf& model);
/// score > score_threshold.
bool predict(std::span<const double> window, const TrainedSmCsf& model);

/// Feature row restricted to the model's effective patterns.
std::vector<double> smcsf_features(std::span<const double> window, const TrainedSmCsf& model);

} // namespace csfbench
