#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csfbench/dataset.hpp"
#include "csfbench/patterns.hpp"
#include "csfbench/rng.hpp"

namespace csfbench {

inline constexpr const char* kGeneratorVersion = "csfbench-gen-1";

/// Lognormal law of the absolute step return |r|.
struct StepDistribution {
    double mu = std::log(0.01);
    double sigma = 0.5;
};

/// CSF generating rule: score(window) = sum_p weight[p] * count[p]; a window
/// with score > threshold is a signal window.
struct CsfRule {
    PatternVocabulary vocab;
    std::vector<double> weights;
    std::optional<double> threshold;
    double p_signal = 0.75;
    double base_rate = 0.52;
    /// Quantile used by calibrate_threshold; 1 - quantile is the nominal
    /// signal fraction.
    double calibration_quantile = 0.8;

    std::size_t k_effective() const noexcept;
    bool calibrated() const noexcept { return threshold.has_value(); }
    double score(std::span<const double> window) const;
    double score(const FeatureVector& counts) const;
    /// Throws invalid_rule when uncalibrated.
    bool is_signal(std::span<const double> window) const;
    /// Throws invalid_config / invalid_rule on broken invariants.
    void validate() const;
};

/// NCSF (momentum) rule: signal when up-steps / (W - 1) >= ratio_threshold.
struct NcsfRule {
    std::size_t window = 20;
    double ratio_threshold = 0.7;
    double p_signal = 0.75;
    double base_rate = 0.52;

    double up_ratio(std::span<const double> window_prices) const;
    bool is_signal(std::span<const double> window_prices) const;
    /// Signal probability under a symmetric random walk (exact binomial tail).
    double expected_signal_fraction() const;
    void validate() const;
};

struct GenConfig {
    std::size_t n_windows = 20000;
    std::uint64_t seed = 0;
    StepDistribution steps;
    std::size_t window_size = 20;
    double start_price = 100.0;
    /// Slice overlapping windows from one long path instead of generating
    /// independent windows.
    bool long_path = false;

    void validate() const;
};

/// Draws one signed step return with a fair sign.
double draw_step(Rng& rng, const StepDistribution& steps);
/// Draws a step magnitude; capped below 1 so multiplicative steps keep prices positive.
double draw_magnitude(Rng& rng, const StepDistribution& steps);
/// Multiplicative random walk of n_prices levels with fair signs.
std::vector<double> random_walk(Rng& rng, std::size_t n_prices, const StepDistribution& steps,
                                double start_price = 100.0);

CsfRule sample_csf_rule(const PatternVocabulary& vocab, std::size_t k_effective,
                        std::uint64_t seed);

/// Sets rule.threshold to the q-quantile of scores over calibration_n fresh
/// random-walk windows and returns it.
double calibrate_threshold(CsfRule& rule, double q, std::size_t calibration_n,
                           std::uint64_t seed, std::size_t window_size = 20,
                           const StepDistribution& steps = {});

/// Positive-label probability outside the signal set, solved from
/// b = s * p_signal + (1 - s) * q_off. Throws infeasible_calibration when
/// q_off falls outside [0, 1].
double off_signal_probability(double base_rate, double p_signal, double signal_fraction);

Dataset generate_csf(const CsfRule& rule, const GenConfig& config);
Dataset generate_ncsf(const NcsfRule& rule, const GenConfig& config);
Dataset generate_random(const GenConfig& config, double base_rate = 0.52);

/// One long path whose every step after the first `window_size` prices
/// follows the rule (the path behind long_path datasets and ACF plots).
PriceSeries csf_path(const CsfRule& rule, const GenConfig& config, std::size_t n_prices);
PriceSeries ncsf_path(const NcsfRule& rule, const GenConfig& config, std::size_t n_prices);
PriceSeries random_path(const GenConfig& config, std::size_t n_prices, double base_rate = 0.52);

/// Hash identifying a generator configuration (and rule, if any).
std::string generation_hash(Family family, const GenConfig& config, const CsfRule* csf,
                            const NcsfRule* ncsf, double base_rate);

} // namespace csfbench
