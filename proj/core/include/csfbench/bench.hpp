#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csfbench/dataset.hpp"

namespace csfbench {

struct Prediction {
    std::string window_id;
    double score = 0.0;
    bool selected = false;
};

struct PredictionSet {
    std::string model;
    std::vector<Prediction> entries;

    std::size_t selected_count() const noexcept;
};

/// Marks the top round(rate * n) scores as selected. Ties keep input order.
PredictionSet select_top_fraction(std::string model, std::span<const std::string> ids,
                                  std::span<const double> scores, double rate);

struct ModelReport {
    std::string model;
    std::string family;
    std::size_t n_test = 0;
    std::size_t n_selected = 0;
    std::optional<double> precision_pos;
    double base_rate = 0.0;
    std::optional<std::pair<double, double>> wilson_ci_95;
    std::optional<double> oracle_precision;
    double selection_rate = 0.0;
    /// Spread over random-baseline trials; absent for single selections.
    std::optional<double> precision_sd;
    std::vector<std::string> flags;

    /// Standard error of precision_pos (binomial); 0 when undefined.
    double standard_error() const;

    friend bool operator==(const ModelReport&, const ModelReport&) = default;
};

/// Fraction of POSITIVE windows among the selected ones. Every prediction id
/// must exist in `windows`. No selection leaves precision and CI empty and
/// sets the "no-selection" flag.
ModelReport precision_of_selected(const PredictionSet& predictions,
                                  std::span<const LabeledWindow> windows,
                                  std::string family = {});

/// Mean precision of `trials` seeded uniform selections of round(rate * n)
/// windows.
ModelReport random_baseline(std::span<const LabeledWindow> windows, double selection_rate,
                            std::uint64_t seed, std::size_t trials, std::string family = {});

/// Higher precision first; undefined precision last; ties by model name.
void sort_reports(std::vector<ModelReport>& reports);

/// True when `candidate` exceeds `reference` by more than k combined
/// standard errors.
bool exceeds_by_standard_errors(const ModelReport& candidate, const ModelReport& reference,
                                double k = 2.0);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle split; test gets round(test_fraction * n) windows. Both
/// parts keep ascending dataset order.
Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

/// Seeded k-fold partition. Fold i tests every window whose shuffled rank is
/// i mod k, so each window is tested exactly once.
std::vector<Split> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Throws invalid_input if any window id appears on both sides.
void check_disjoint(std::span<const LabeledWindow> train, std::span<const LabeledWindow> test);

} // namespace csfbench
