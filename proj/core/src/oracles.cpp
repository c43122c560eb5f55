#include "csfbench/oracles.hpp"

#include "csfbench/bench.hpp"
#include "csfbench/error.hpp"

namespace csfbench {

OraclePrediction gt_csf_predict(const LabeledWindow& window, const CsfRule& rule) {
    if (!rule.calibrated()) fail(ErrorKind::invalid_rule, "GT-CSF needs a calibrated rule");
    const double score = rule.score(window.prices);
    return {window.id, score > *rule.threshold, score};
}

OraclePrediction gt_ncsf_predict(const LabeledWindow& window, const NcsfRule& rule) {
    const double ratio = rule.up_ratio(window.prices);
    return {window.id, ratio >= rule.ratio_threshold, ratio};
}

namespace {

template <typename Rule, typename Predict>
PredictionSet oracle_set(std::string name, std::span<const LabeledWindow> windows,
                         const Rule& rule, Predict predict) {
    PredictionSet out;
    out.model = std::move(name);
    out.entries.reserve(windows.size());
    for (const auto& w : windows) {
        const OraclePrediction p = predict(w, rule);
        out.entries.push_back({p.window_id, p.score, p.selected});
    }
    return out;
}

} // namespace

PredictionSet gt_csf_predictions(std::span<const LabeledWindow> windows, const CsfRule& rule) {
    return oracle_set("gt-csf", windows, rule, gt_csf_predict);
}

PredictionSet gt_ncsf_predictions(std::span<const LabeledWindow> windows, const NcsfRule& rule) {
    return oracle_set("gt-ncsf", windows, rule, gt_ncsf_predict);
}

} // namespace csfbench
