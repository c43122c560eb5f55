#include "csfbench/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "csfbench/dataset.hpp"
#include "csfbench/error.hpp"

namespace csfbench {

namespace {
constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
}

std::string SignPattern::to_binary_string() const {
    std::string out(static_cast<std::size_t>(length), '0');
    for (int i = 0; i < length; ++i) {
        if ((bits >> i) & 1u) out[static_cast<std::size_t>(length - 1 - i)] = '1';
    }
    return out;
}

std::string SignPattern::to_steps_string() const {
    std::string out(static_cast<std::size_t>(length), 'D');
    for (int i = 0; i < length; ++i) {
        if ((bits >> i) & 1u) out[static_cast<std::size_t>(i)] = 'U';
    }
    return out;
}

SignPattern SignPattern::from_binary_string(const std::string& text) {
    if (text.empty() || text.size() > static_cast<std::size_t>(kMaxPatternLength)) {
        fail(ErrorKind::invalid_input, "pattern string length out of range: '" + text + "'");
    }
    SignPattern pattern{static_cast<int>(text.size()), 0};
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[text.size() - 1 - i];
        if (c == '1') {
            pattern.bits |= 1u << i;
        } else if (c != '0') {
            fail(ErrorKind::invalid_input, "pattern string must be binary: '" + text + "'");
        }
    }
    return pattern;
}

PatternVocabulary::PatternVocabulary(std::vector<int> window_sizes)
    : window_sizes_(std::move(window_sizes)) {
    if (window_sizes_.empty()) fail(ErrorKind::invalid_config, "empty window-size set");
    std::sort(window_sizes_.begin(), window_sizes_.end());
    window_sizes_.erase(std::unique(window_sizes_.begin(), window_sizes_.end()),
                        window_sizes_.end());
    for (int size : window_sizes_) {
        if (size < 2 || size > kMaxPatternLength + 1) {
            fail(ErrorKind::invalid_config,
                 "window size " + std::to_string(size) + " outside [2, 20]");
        }
    }
    offsets_.assign(kMaxPatternLength + 1, kAbsent);
    for (int size : window_sizes_) {
        const int length = size - 1;
        lengths_.push_back(length);
        offsets_[static_cast<std::size_t>(length)] = patterns_.size();
        const std::uint32_t count = 1u << length;
        for (std::uint32_t bits = 0; bits < count; ++bits) patterns_.push_back({length, bits});
    }
}

bool PatternVocabulary::contains(const SignPattern& pattern) const noexcept {
    if (pattern.length < 1 || pattern.length > kMaxPatternLength) return false;
    return offsets_[static_cast<std::size_t>(pattern.length)] != kAbsent &&
           pattern.bits < (1u << pattern.length);
}

std::size_t PatternVocabulary::index_of(const SignPattern& pattern) const {
    if (!contains(pattern)) {
        fail(ErrorKind::invalid_input, "pattern " + pattern.to_binary_string() +
                                           " is not in the vocabulary");
    }
    return offsets_[static_cast<std::size_t>(pattern.length)] + pattern.bits;
}

PatternVocabulary enumerate_vocabulary(std::vector<int> window_sizes) {
    return PatternVocabulary(std::move(window_sizes));
}

FeatureVector count_patterns(std::span<const Sign> signs, const PatternVocabulary& vocab,
                             std::string window_ref) {
    if (signs.size() < static_cast<std::size_t>(vocab.max_length())) {
        fail(ErrorKind::invalid_input,
             "window has " + std::to_string(signs.size() + 1) + " prices; vocabulary needs " +
                 std::to_string(vocab.min_window()));
    }
    FeatureVector out;
    out.window_ref = std::move(window_ref);
    out.counts.assign(vocab.size(), 0);
    for (int length : vocab.lengths()) {
        const auto width = static_cast<std::size_t>(length);
        const std::size_t base = vocab.index_of({length, 0});
        std::uint32_t code = 0;
        for (std::size_t i = 0; i < width; ++i) {
            code |= static_cast<std::uint32_t>(signs[i]) << i;
        }
        ++out.counts[base + code];
        for (std::size_t start = 1; start + width <= signs.size(); ++start) {
            code = (code >> 1) |
                   (static_cast<std::uint32_t>(signs[start + width - 1]) << (width - 1));
            ++out.counts[base + code];
        }
    }
    return out;
}

FeatureVector count_patterns(std::span<const double> window, const PatternVocabulary& vocab,
                             std::string window_ref) {
    if (window.size() < vocab.min_window()) {
        fail(ErrorKind::invalid_input, "window has " + std::to_string(window.size()) +
                                           " prices; vocabulary needs " +
                                           std::to_string(vocab.min_window()));
    }
    const SignSequence signs = diff_signs(window);
    return count_patterns(std::span<const Sign>(signs.signs), vocab, std::move(window_ref));
}

OccurrenceTable occurrence_table(std::span<const LabeledWindow> windows,
                                 const PatternVocabulary& vocab) {
    if (windows.empty()) fail(ErrorKind::invalid_input, "occurrence table of an empty dataset");
    const std::size_t width = windows.front().prices.size();
    OccurrenceTable table;
    table.count_pos.assign(vocab.size(), 0);
    table.count_neg.assign(vocab.size(), 0);
    for (const auto& window : windows) {
        if (window.prices.size() != width) {
            fail(ErrorKind::invalid_input, "window '" + window.id + "' has a different size");
        }
        const FeatureVector fv = count_patterns(window.prices, vocab);
        auto& target = window.positive() ? table.count_pos : table.count_neg;
        for (std::size_t p = 0; p < fv.counts.size(); ++p) target[p] += fv.counts[p];
        if (window.positive()) {
            ++table.n_pos_windows;
        } else {
            ++table.n_neg_windows;
        }
    }
    table.single_class = table.n_pos_windows == 0 || table.n_neg_windows == 0;
    return table;
}

EffectivenessScore effectiveness_scores(const OccurrenceTable& table,
                                        const PatternVocabulary& vocab, double smoothing,
                                        double threshold) {
    if (!(smoothing > 0.0)) fail(ErrorKind::invalid_config, "smoothing must be positive");
    if (!(threshold >= 0.0)) fail(ErrorKind::invalid_config, "threshold must be non-negative");
    if (table.count_pos.size() != vocab.size() || table.count_neg.size() != vocab.size()) {
        fail(ErrorKind::invalid_input, "occurrence table does not match the vocabulary");
    }
    if (table.n_pos_windows == 0 || table.n_neg_windows == 0) {
        fail(ErrorKind::undefined_effectiveness, "both classes need at least one window");
    }

    std::vector<std::uint64_t> total_pos(kMaxPatternLength + 1, 0);
    std::vector<std::uint64_t> total_neg(kMaxPatternLength + 1, 0);
    for (std::size_t p = 0; p < vocab.size(); ++p) {
        const auto length = static_cast<std::size_t>(vocab[p].length);
        total_pos[length] += table.count_pos[p];
        total_neg[length] += table.count_neg[p];
    }

    EffectivenessScore out;
    out.smoothing = smoothing;
    out.threshold = threshold;
    out.log_odds.resize(vocab.size());
    out.is_effective.resize(vocab.size());
    for (std::size_t p = 0; p < vocab.size(); ++p) {
        const auto length = static_cast<std::size_t>(vocab[p].length);
        const double pos = (static_cast<double>(table.count_pos[p]) + smoothing) /
                           (static_cast<double>(total_pos[length]) + smoothing);
        const double neg = (static_cast<double>(table.count_neg[p]) + smoothing) /
                           (static_cast<double>(total_neg[length]) + smoothing);
        out.log_odds[p] = std::log(pos) - std::log(neg);
        out.is_effective[p] = std::abs(out.log_odds[p]) >= threshold;
    }
    return out;
}

void write_effectiveness_csv(std::ostream& out, const PatternVocabulary& vocab,
                             const OccurrenceTable& table, const EffectivenessScore& scores) {
    out << "length,bits_binary_string,count_pos,count_neg,log_odds,is_effective\n";
    const auto old_precision = out.precision(17);
    for (std::size_t p = 0; p < vocab.size(); ++p) {
        out << vocab[p].length << ',' << vocab[p].to_binary_string() << ','
            << table.count_pos[p] << ',' << table.count_neg[p] << ',' << scores.log_odds[p]
            << ',' << (scores.is_effective[p] ? 1 : 0) << '\n';
    }
    out.precision(old_precision);
}

} // namespace csfbench
