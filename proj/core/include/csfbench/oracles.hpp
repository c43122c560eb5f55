#pragma once

#include <span>
#include <string>

#include "csfbench/dataset.hpp"
#include "csfbench/generators.hpp"

namespace csfbench {

struct PredictionSet;

struct OraclePrediction {
    std::string window_id;
    bool selected = false;
    double score = 0.0;
};

/// Applies the generating CSF rule: selected iff score > threshold.
OraclePrediction gt_csf_predict(const LabeledWindow& window, const CsfRule& rule);
/// Applies the momentum rule: selected iff up-ratio >= ratio threshold.
OraclePrediction gt_ncsf_predict(const LabeledWindow& window, const NcsfRule& rule);

PredictionSet gt_csf_predictions(std::span<const LabeledWindow> windows, const CsfRule& rule);
PredictionSet gt_ncsf_predictions(std::span<const LabeledWindow> windows, const NcsfRule& rule);

} // namespace csfbench
