#include "csfbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "csfbench/error.hpp"
#include "csfbench/rng.hpp"
#include "csfbench/stats.hpp"

namespace csfbench {

std::size_t PredictionSet::selected_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const Prediction& p) { return p.selected; }));
}

namespace {

std::size_t selection_size(std::size_t n, double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) fail(ErrorKind::invalid_config, "selection rate outside [0, 1]");
    return std::min(n, static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))));
}

void fill_precision(ModelReport& report, std::size_t hits) {
    if (report.n_selected == 0) {
        report.precision_pos.reset();
        report.wilson_ci_95.reset();
        report.flags.emplace_back("no-selection");
        return;
    }
    report.precision_pos =
        static_cast<double>(hits) / static_cast<double>(report.n_selected);
    report.wilson_ci_95 = wilson_interval(hits, report.n_selected);
}

} // namespace

PredictionSet select_top_fraction(std::string model, std::span<const std::string> ids,
                                  std::span<const double> scores, double rate) {
    if (ids.size() != scores.size()) fail(ErrorKind::invalid_input, "ids and scores differ in length");
    const std::size_t k = selection_size(ids.size(), rate);
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    PredictionSet out;
    out.model = std::move(model);
    out.entries.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.entries[i] = {ids[i], scores[i], false};
    for (std::size_t r = 0; r < k; ++r) out.entries[order[r]].selected = true;
    return out;
}

double ModelReport::standard_error() const {
    if (!precision_pos || n_selected == 0) return 0.0;
    const double p = *precision_pos;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_selected));
}

ModelReport precision_of_selected(const PredictionSet& predictions,
                                  std::span<const LabeledWindow> windows, std::string family) {
    std::unordered_map<std::string_view, const LabeledWindow*> by_id;
    by_id.reserve(windows.size());
    for (const auto& w : windows) by_id.emplace(w.id, &w);

    ModelReport report;
    report.model = predictions.model;
    report.family = std::move(family);
    report.n_test = predictions.entries.size();
    std::size_t hits = 0;
    std::size_t positives = 0;
    std::unordered_set<std::string_view> seen;
    for (const auto& p : predictions.entries) {
        const auto it = by_id.find(p.window_id);
        if (it == by_id.end()) {
            fail(ErrorKind::invalid_input, "prediction for unknown window '" + p.window_id + "'");
        }
        if (!seen.insert(p.window_id).second) {
            fail(ErrorKind::invalid_input, "duplicate prediction for window '" + p.window_id + "'");
        }
        const bool positive = it->second->positive();
        positives += positive ? 1 : 0;
        if (p.selected) {
            ++report.n_selected;
            hits += positive ? 1 : 0;
        }
    }
    if (report.n_test > 0) {
        report.base_rate = static_cast<double>(positives) / static_cast<double>(report.n_test);
        report.selection_rate =
            static_cast<double>(report.n_selected) / static_cast<double>(report.n_test);
    }
    fill_precision(report, hits);
    return report;
}

ModelReport random_baseline(std::span<const LabeledWindow> windows, double selection_rate,
                            std::uint64_t seed, std::size_t trials, std::string family) {
    if (windows.empty()) fail(ErrorKind::invalid_input, "random baseline on an empty dataset");
    if (trials == 0) fail(ErrorKind::invalid_config, "random baseline needs at least one trial");
    const std::size_t n = windows.size();
    const std::size_t k = selection_size(n, selection_rate);

    ModelReport report;
    report.model = "random-baseline";
    report.family = std::move(family);
    report.n_test = n;
    report.n_selected = k;
    report.base_rate = base_rate(windows);
    report.selection_rate = static_cast<double>(k) / static_cast<double>(n);
    if (k == 0) {
        fill_precision(report, 0);
        return report;
    }

    std::vector<std::size_t> order(n);
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t total_hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(seed, t, 0xba5e);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(order[i], order[j]);
            hits += windows[order[i]].positive() ? 1 : 0;
        }
        const double precision = static_cast<double>(hits) / static_cast<double>(k);
        sum += precision;
        sum_sq += precision * precision;
        total_hits += hits;
    }
    const double mean = sum / static_cast<double>(trials);
    report.precision_pos = mean;
    report.precision_sd =
        std::sqrt(std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean));
    // Interval of a single selection of size k at the mean precision.
    const auto mean_hits = static_cast<std::size_t>(
        std::llround(static_cast<double>(total_hits) / static_cast<double>(trials)));
    report.wilson_ci_95 = wilson_interval(std::min(mean_hits, k), k);
    if (mean < report.wilson_ci_95->first || mean > report.wilson_ci_95->second) {
        report.wilson_ci_95 = {std::min(mean, report.wilson_ci_95->first),
                               std::max(mean, report.wilson_ci_95->second)};
    }
    return report;
}

void sort_reports(std::vector<ModelReport>& reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const ModelReport& a, const ModelReport& b) {
        if (a.precision_pos.has_value() != b.precision_pos.has_value()) {
            return a.precision_pos.has_value();
        }
        if (a.precision_pos && *a.precision_pos != *b.precision_pos) {
            return *a.precision_pos > *b.precision_pos;
        }
        return a.model < b.model;
    });
}

bool exceeds_by_standard_errors(const ModelReport& candidate, const ModelReport& reference,
                                double k) {
    if (!candidate.precision_pos || !reference.precision_pos) return false;
    const double se = std::hypot(candidate.standard_error(), reference.standard_error());
    return *candidate.precision_pos - *reference.precision_pos > k * se;
}

Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        fail(ErrorKind::invalid_config, "test fraction must lie in (0, 1)");
    }
    const auto order = permutation(n, seed);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    Split split;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

std::vector<Split> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) fail(ErrorKind::invalid_config, "k-fold needs at least 2 folds");
    if (folds > n) fail(ErrorKind::invalid_input, "more folds than windows");
    const auto order = permutation(n, seed);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t r = 0; r < n; ++r) fold_of[order[r]] = r % folds;
    std::vector<Split> out(folds);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < folds; ++f) (f == fold_of[i] ? out[f].test : out[f].train).push_back(i);
    }
    return out;
}

void check_disjoint(std::span<const LabeledWindow> train, std::span<const LabeledWindow> test) {
    std::unordered_set<std::string_view> ids;
    for (const auto& w : train) ids.insert(w.id);
    for (const auto& w : test) {
        if (ids.count(w.id)) {
            fail(ErrorKind::invalid_input, "window '" + w.id + "' is in both train and test");
        }
    }
}

} // namespace csfbench
