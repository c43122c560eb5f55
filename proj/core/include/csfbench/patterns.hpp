#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "csfbench/series.hpp"

namespace csfbench {

struct LabeledWindow;

/// Up/down step pattern. Bit i is the i-th step in time order (earliest step
/// is the least significant bit), 1 meaning UP.
struct SignPattern {
    int length = 0;
    std::uint32_t bits = 0;

    friend auto operator<=>(const SignPattern&, const SignPattern&) = default;

    /// MSB-first binary string, as produced by std::bitset::to_string.
    std::string to_binary_string() const;
    /// Chronological U/D rendering, e.g. "UUD".
    std::string to_steps_string() const;
    static SignPattern from_binary_string(const std::string& text);
};

inline constexpr int kMaxPatternLength = 19;

/// Every sign pattern of length (s - 1) for each window size s, in canonical
/// (length, bits) order. Position of a pattern is offset(length) + bits.
class PatternVocabulary {
public:
    explicit PatternVocabulary(std::vector<int> window_sizes = {4, 5, 6, 7});

    const std::vector<int>& window_sizes() const noexcept { return window_sizes_; }
    const std::vector<SignPattern>& patterns() const noexcept { return patterns_; }
    std::size_t size() const noexcept { return patterns_.size(); }
    const SignPattern& operator[](std::size_t i) const { return patterns_[i]; }

    /// Throws invalid_input if the pattern is not in the vocabulary.
    std::size_t index_of(const SignPattern& pattern) const;
    bool contains(const SignPattern& pattern) const noexcept;

    /// Distinct pattern lengths, ascending.
    const std::vector<int>& lengths() const noexcept { return lengths_; }
    int max_length() const noexcept { return lengths_.back(); }
    /// Minimum number of prices a window needs for counting.
    std::size_t min_window() const noexcept { return static_cast<std::size_t>(max_length()) + 1; }

    friend bool operator==(const PatternVocabulary& a, const PatternVocabulary& b) {
        return a.window_sizes_ == b.window_sizes_;
    }

private:
    std::vector<int> window_sizes_;
    std::vector<int> lengths_;
    std::vector<SignPattern> patterns_;
    std::vector<std::size_t> offsets_; // indexed by length, npos when absent
};

PatternVocabulary enumerate_vocabulary(std::vector<int> window_sizes);

struct FeatureVector {
    std::vector<std::uint32_t> counts;
    std::string window_ref;
};

/// Sliding (overlapping) occurrence counts of every vocabulary pattern.
FeatureVector count_patterns(std::span<const double> window, const PatternVocabulary& vocab,
                             std::string window_ref = {});
FeatureVector count_patterns(std::span<const Sign> signs, const PatternVocabulary& vocab,
                             std::string window_ref = {});

struct OccurrenceTable {
    std::vector<std::uint64_t> count_pos;
    std::vector<std::uint64_t> count_neg;
    std::size_t n_pos_windows = 0;
    std::size_t n_neg_windows = 0;
    /// Set when only one class is present; effectiveness is then undefined.
    bool single_class = false;
};

OccurrenceTable occurrence_table(std::span<const LabeledWindow> windows,
                                 const PatternVocabulary& vocab);

struct EffectivenessScore {
    std::vector<double> log_odds;
    std::vector<bool> is_effective;
    double smoothing = 1.0;
    double threshold = 0.5;
};

/// log_odds(p) = ln[(c_pos + a) / (N_pos + a)] - ln[(c_neg + a) / (N_neg + a)],
/// N_class being the class total of all occurrences of patterns with p's length.
EffectivenessScore effectiveness_scores(const OccurrenceTable& table,
                                        const PatternVocabulary& vocab, double smoothing = 1.0,
                                        double threshold = 0.5);

/// CSV with columns length,bits_binary_string,count_pos,count_neg,log_odds,is_effective.
void write_effectiveness_csv(std::ostream& out, const PatternVocabulary& vocab,
                             const OccurrenceTable& table, const EffectivenessScore& scores);

} // namespace csfbench
