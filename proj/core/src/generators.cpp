#include "csfbench/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "csfbench/error.hpp"
#include "csfbench/parallel.hpp"
#include "csfbench/stats.hpp"

namespace csfbench {

namespace {

// Substream tags; each random quantity of a window has its own stream.
constexpr std::uint64_t kWalkTag = 1;
constexpr std::uint64_t kLabelTag = 2;
constexpr std::uint64_t kRuleTag = 3;
constexpr std::uint64_t kCalibrationTag = 4;
constexpr std::uint64_t kPathTag = 5;

constexpr double kMaxMagnitude = 0.99;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool fair_coin(Rng& rng) { return (rng() >> 63) != 0; }

void require_probability_pair(double p_signal, double base_rate) {
    if (!(base_rate > 0.0 && base_rate < 1.0)) {
        fail(ErrorKind::invalid_config, "base rate must lie in (0, 1)");
    }
    if (!(p_signal > base_rate && p_signal <= 1.0)) {
        fail(ErrorKind::invalid_config, "p_signal must lie in (base_rate, 1]");
    }
}

/// Draws the label step of one window given its signal probability.
void draw_label(LabeledWindow& window, Rng& rng, double positive_probability,
                const StepDistribution& steps) {
    const bool positive = uniform01(rng) < positive_probability;
    const double magnitude = draw_magnitude(rng, steps);
    window.realized_return = positive ? magnitude : -magnitude;
    window.label = label_for_return(window.realized_return);
}

using SignalFn = std::function<bool(std::span<const double>)>;

Dataset independent_windows(Family family, const GenConfig& config, const SignalFn& is_signal,
                            double p_signal, double base_rate) {
    Dataset dataset;
    dataset.family = family;
    dataset.provenance.seed = config.seed;
    dataset.provenance.generator_version = kGeneratorVersion;
    dataset.windows.resize(config.n_windows);

    std::vector<char> signal(config.n_windows, 0);
    const std::string prefix(to_string(family));
    parallel_for(config.n_windows, [&](std::size_t i) {
        Rng rng = make_rng(config.seed, i, kWalkTag);
        auto& w = dataset.windows[i];
        w.id = prefix + "-" + std::to_string(i);
        w.prices = random_walk(rng, config.window_size, config.steps, config.start_price);
        signal[i] = is_signal ? static_cast<char>(is_signal(w.prices)) : 0;
    });

    double q_off = base_rate;
    if (is_signal) {
        const auto n_signal = static_cast<double>(std::count(signal.begin(), signal.end(), 1));
        q_off = off_signal_probability(base_rate, p_signal,
                                       n_signal / static_cast<double>(config.n_windows));
    }
    parallel_for(config.n_windows, [&](std::size_t i) {
        Rng rng = make_rng(config.seed, i, kLabelTag);
        draw_label(dataset.windows[i], rng, signal[i] ? p_signal : q_off, config.steps);
    });
    return dataset;
}

/// Path whose steps after the first window follow the rule; the off-signal
/// probability uses the nominal signal fraction since the realized one is
/// unknown until the path exists.
std::vector<double> rule_path(const GenConfig& config, std::size_t n_prices,
                              const SignalFn& is_signal, double p_signal, double base_rate,
                              double nominal_signal_fraction) {
    if (n_prices < config.window_size + 1) {
        fail(ErrorKind::invalid_config, "path must be longer than one window");
    }
    const double q_off =
        is_signal ? off_signal_probability(base_rate, p_signal, nominal_signal_fraction)
                  : base_rate;
    Rng rng = make_rng(config.seed, 0, kPathTag);
    std::vector<double> path = random_walk(rng, config.window_size, config.steps, config.start_price);
    path.reserve(n_prices);
    while (path.size() < n_prices) {
        const std::span<const double> window(path.data() + path.size() - config.window_size,
                                             config.window_size);
        const bool signal = is_signal && is_signal(window);
        const bool positive = uniform01(rng) < (signal ? p_signal : q_off);
        const double magnitude = draw_magnitude(rng, config.steps);
        path.push_back(path.back() * (1.0 + (positive ? magnitude : -magnitude)));
    }
    return path;
}

Dataset path_dataset(Family family, const GenConfig& config, const std::vector<double>& path) {
    Dataset dataset;
    dataset.family = family;
    dataset.provenance.seed = config.seed;
    dataset.provenance.generator_version = kGeneratorVersion;
    dataset.provenance.overlapping = true;
    dataset.windows = sliding_labeled_windows(path, config.window_size, to_string(family));
    return dataset;
}

void append_hex(std::ostringstream& out, double value) { out << std::hexfloat << value << ';'; }

} // namespace

// ---------------------------------------------------------------------------

std::size_t CsfRule::k_effective() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

double CsfRule::score(const FeatureVector& counts) const {
    if (counts.counts.size() != weights.size()) {
        fail(ErrorKind::invalid_input, "feature vector does not match the rule vocabulary");
    }
    double total = 0.0;
    for (std::size_t p = 0; p < weights.size(); ++p) {
        if (weights[p] != 0.0) total += weights[p] * static_cast<double>(counts.counts[p]);
    }
    return total;
}

double CsfRule::score(std::span<const double> window) const {
    return score(count_patterns(window, vocab));
}

bool CsfRule::is_signal(std::span<const double> window) const {
    if (!threshold) fail(ErrorKind::invalid_rule, "CSF rule has no calibrated threshold");
    return score(window) > *threshold;
}

void CsfRule::validate() const {
    if (weights.size() != vocab.size()) {
        fail(ErrorKind::invalid_rule, "weight vector does not match the vocabulary");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) fail(ErrorKind::invalid_rule, "non-finite rule weight");
    }
    if (threshold && !std::isfinite(*threshold)) {
        fail(ErrorKind::invalid_rule, "rule threshold must be finite");
    }
    require_probability_pair(p_signal, base_rate);
}

double NcsfRule::up_ratio(std::span<const double> window_prices) const {
    if (window_prices.size() != window) {
        fail(ErrorKind::invalid_input, "window of " + std::to_string(window_prices.size()) +
                                           " prices, rule expects " + std::to_string(window));
    }
    return static_cast<double>(up_count(window_prices)) / static_cast<double>(window - 1);
}

bool NcsfRule::is_signal(std::span<const double> window_prices) const {
    return up_ratio(window_prices) >= ratio_threshold;
}

double NcsfRule::expected_signal_fraction() const {
    const std::size_t steps = window - 1;
    std::size_t k_min = steps + 1;
    for (std::size_t k = 0; k <= steps; ++k) {
        if (static_cast<double>(k) / static_cast<double>(steps) >= ratio_threshold) {
            k_min = k;
            break;
        }
    }
    return binomial_upper_tail(steps, k_min, 0.5);
}

void NcsfRule::validate() const {
    if (window < 2) fail(ErrorKind::invalid_config, "NCSF window must hold at least 2 prices");
    if (!(ratio_threshold > 0.5 && ratio_threshold <= 1.0)) {
        fail(ErrorKind::invalid_config, "ratio threshold must lie in (0.5, 1]");
    }
    require_probability_pair(p_signal, base_rate);
}

void GenConfig::validate() const {
    if (n_windows == 0) fail(ErrorKind::invalid_config, "n_windows must be positive");
    if (!(steps.sigma > 0.0) || !std::isfinite(steps.mu)) {
        fail(ErrorKind::invalid_config, "step distribution needs finite mu and sigma > 0");
    }
    if (window_size < 2) fail(ErrorKind::invalid_config, "window size must be at least 2");
    if (!(start_price > 0.0)) fail(ErrorKind::invalid_config, "start price must be positive");
}

// ---------------------------------------------------------------------------

double draw_magnitude(Rng& rng, const StepDistribution& steps) {
    const double m = std::lognormal_distribution<double>(steps.mu, steps.sigma)(rng);
    return std::min(m, kMaxMagnitude);
}

double draw_step(Rng& rng, const StepDistribution& steps) {
    const bool up = fair_coin(rng);
    const double m = draw_magnitude(rng, steps);
    return up ? m : -m;
}

std::vector<double> random_walk(Rng& rng, std::size_t n_prices, const StepDistribution& steps,
                                double start_price) {
    std::vector<double> prices;
    prices.reserve(n_prices);
    if (n_prices == 0) return prices;
    prices.push_back(start_price);
    while (prices.size() < n_prices) prices.push_back(prices.back() * (1.0 + draw_step(rng, steps)));
    return prices;
}

CsfRule sample_csf_rule(const PatternVocabulary& vocab, std::size_t k_effective,
                        std::uint64_t seed) {
    if (k_effective < 1 || k_effective > vocab.size()) {
        fail(ErrorKind::invalid_config, "k_effective must lie in [1, " +
                                            std::to_string(vocab.size()) + "]");
    }
    Rng rng = make_rng(seed, 0, kRuleTag);
    std::vector<std::size_t> order(vocab.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Partial Fisher-Yates: the first k entries are a uniform k-subset.
    for (std::size_t i = 0; i < k_effective; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
        std::swap(order[i], order[j]);
    }
    CsfRule rule{vocab, std::vector<double>(vocab.size(), 0.0), std::nullopt};
    std::uniform_real_distribution<double> magnitude(0.2, 1.0);
    for (std::size_t i = 0; i < k_effective; ++i) {
        const double m = magnitude(rng);
        rule.weights[order[i]] = fair_coin(rng) ? m : -m;
    }
    return rule;
}

double calibrate_threshold(CsfRule& rule, double q, std::size_t calibration_n,
                           std::uint64_t seed, std::size_t window_size,
                           const StepDistribution& steps) {
    if (!(q > 0.0 && q < 1.0)) fail(ErrorKind::invalid_config, "quantile must lie in (0, 1)");
    if (calibration_n < 100) {
        fail(ErrorKind::invalid_config, "calibration needs at least 100 windows");
    }
    if (rule.weights.size() != rule.vocab.size()) {
        fail(ErrorKind::invalid_rule, "weight vector does not match the vocabulary");
    }
    std::vector<double> scores(calibration_n);
    parallel_for(calibration_n, [&](std::size_t i) {
        Rng rng = make_rng(seed, i, kCalibrationTag);
        scores[i] = rule.score(random_walk(rng, window_size, steps));
    });
    rule.threshold = quantile(scores, q);
    rule.calibration_quantile = q;
    return *rule.threshold;
}

double off_signal_probability(double base_rate, double p_signal, double signal_fraction) {
    if (!(signal_fraction >= 0.0 && signal_fraction <= 1.0)) {
        fail(ErrorKind::infeasible_calibration, "signal fraction outside [0, 1]");
    }
    if (signal_fraction >= 1.0) {
        if (std::abs(base_rate - p_signal) > 1e-12) {
            fail(ErrorKind::infeasible_calibration,
                 "every window is a signal window, base rate cannot differ from p_signal");
        }
        return base_rate;
    }
    const double q_off = (base_rate - signal_fraction * p_signal) / (1.0 - signal_fraction);
    if (!(q_off >= 0.0 && q_off <= 1.0)) {
        std::ostringstream msg;
        msg << "off-signal probability " << q_off << " outside [0, 1] (base rate " << base_rate
            << ", p_signal " << p_signal << ", signal fraction " << signal_fraction << ")";
        fail(ErrorKind::infeasible_calibration, msg.str());
    }
    return q_off;
}

Dataset generate_csf(const CsfRule& rule, const GenConfig& config) {
    config.validate();
    rule.validate();
    if (!rule.calibrated()) fail(ErrorKind::invalid_rule, "CSF rule has no calibrated threshold");
    if (config.window_size < rule.vocab.min_window()) {
        fail(ErrorKind::invalid_config, "window too short for the rule vocabulary");
    }
    Dataset dataset;
    if (config.long_path) {
        const PriceSeries path = csf_path(rule, config, config.n_windows + config.window_size);
        dataset = path_dataset(Family::csf, config, {path.prices().begin(), path.prices().end()});
    } else {
        dataset = independent_windows(
            Family::csf, config, [&rule](std::span<const double> w) { return rule.is_signal(w); },
            rule.p_signal, rule.base_rate);
    }
    dataset.provenance.config_hash =
        generation_hash(Family::csf, config, &rule, nullptr, rule.base_rate);
    return dataset;
}

Dataset generate_ncsf(const NcsfRule& rule, const GenConfig& config) {
    config.validate();
    rule.validate();
    if (config.window_size != rule.window) {
        fail(ErrorKind::invalid_config, "generator window size differs from the rule window");
    }
    Dataset dataset;
    if (config.long_path) {
        const PriceSeries path = ncsf_path(rule, config, config.n_windows + config.window_size);
        dataset = path_dataset(Family::ncsf, config, {path.prices().begin(), path.prices().end()});
    } else {
        dataset = independent_windows(
            Family::ncsf, config, [&rule](std::span<const double> w) { return rule.is_signal(w); },
            rule.p_signal, rule.base_rate);
    }
    dataset.provenance.config_hash =
        generation_hash(Family::ncsf, config, nullptr, &rule, rule.base_rate);
    return dataset;
}

Dataset generate_random(const GenConfig& config, double base_rate) {
    config.validate();
    if (!(base_rate > 0.0 && base_rate < 1.0)) {
        fail(ErrorKind::invalid_config, "base rate must lie in (0, 1)");
    }
    Dataset dataset;
    if (config.long_path) {
        const PriceSeries path = random_path(config, config.n_windows + config.window_size, base_rate);
        dataset = path_dataset(Family::random, config, {path.prices().begin(), path.prices().end()});
    } else {
        dataset = independent_windows(Family::random, config, nullptr, base_rate, base_rate);
    }
    dataset.provenance.config_hash =
        generation_hash(Family::random, config, nullptr, nullptr, base_rate);
    return dataset;
}

PriceSeries csf_path(const CsfRule& rule, const GenConfig& config, std::size_t n_prices) {
    rule.validate();
    if (!rule.calibrated()) fail(ErrorKind::invalid_rule, "CSF rule has no calibrated threshold");
    auto path = rule_path(
        config, n_prices, [&rule](std::span<const double> w) { return rule.is_signal(w); },
        rule.p_signal, rule.base_rate, 1.0 - rule.calibration_quantile);
    return PriceSeries("csf-path", std::move(path), Family::csf,
                       {{"seed", std::to_string(config.seed)}});
}

PriceSeries ncsf_path(const NcsfRule& rule, const GenConfig& config, std::size_t n_prices) {
    rule.validate();
    if (config.window_size != rule.window) {
        fail(ErrorKind::invalid_config, "generator window size differs from the rule window");
    }
    auto path = rule_path(
        config, n_prices, [&rule](std::span<const double> w) { return rule.is_signal(w); },
        rule.p_signal, rule.base_rate, rule.expected_signal_fraction());
    return PriceSeries("ncsf-path", std::move(path), Family::ncsf,
                       {{"seed", std::to_string(config.seed)}});
}

PriceSeries random_path(const GenConfig& config, std::size_t n_prices, double base_rate) {
    auto path = rule_path(config, n_prices, nullptr, base_rate, base_rate, 0.0);
    return PriceSeries("random-path", std::move(path), Family::random,
                       {{"seed", std::to_string(config.seed)}});
}

std::string generation_hash(Family family, const GenConfig& config, const CsfRule* csf,
                            const NcsfRule* ncsf, double base_rate) {
    std::ostringstream out;
    out << kGeneratorVersion << ';' << to_string(family) << ';' << config.n_windows << ';'
        << config.seed << ';' << config.window_size << ';' << config.long_path << ';';
    append_hex(out, config.steps.mu);
    append_hex(out, config.steps.sigma);
    append_hex(out, config.start_price);
    append_hex(out, base_rate);
    if (csf) {
        for (int size : csf->vocab.window_sizes()) out << size << ',';
        for (double w : csf->weights) append_hex(out, w);
        append_hex(out, csf->threshold.value_or(0.0));
        append_hex(out, csf->p_signal);
        append_hex(out, csf->calibration_quantile);
    }
    if (ncsf) {
        out << ncsf->window << ';';
        append_hex(out, ncsf->ratio_threshold);
        append_hex(out, ncsf->p_signal);
    }
    return to_hex(fnv1a64(out.str()));
}

} // namespace csfbench
