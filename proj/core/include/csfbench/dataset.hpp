#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csfbench/series.hpp"

namespace csfbench {

enum class Label : std::uint8_t { negative = 0, positive = 1 };

/// A history window of prices plus the realized return of the step right
/// after it. label is POSITIVE exactly when realized_return > 0.
struct LabeledWindow {
    std::string id;
    std::vector<double> prices;
    Label label = Label::negative;
    double realized_return = 0.0;

    bool positive() const noexcept { return label == Label::positive; }
};

inline Label label_for_return(double ret) noexcept {
    return ret > 0.0 ? Label::positive : Label::negative;
}

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string generator_version;
    /// Windows share prices (sliced from one path); labels are not i.i.d.
    bool overlapping = false;
};

struct Dataset {
    Family family = Family::random;
    std::vector<LabeledWindow> windows;
    Provenance provenance;

    std::size_t size() const noexcept { return windows.size(); }
    bool empty() const noexcept { return windows.empty(); }
    /// Uniform window width; 0 for an empty dataset.
    std::size_t window_size() const noexcept;
    double base_rate() const;
    std::size_t positives() const noexcept;

    /// Checks uniform width, label/return consistency, positive prices and
    /// unique ids. Throws invalid_input.
    void validate() const;
};

double base_rate(std::span<const LabeledWindow> windows);

/// FNV-1a over ids, prices, labels and returns; hex encoded.
std::string content_hash(std::span<const LabeledWindow> windows);

/// Selects windows by position, preserving the given order.
std::vector<LabeledWindow> take(std::span<const LabeledWindow> windows,
                                std::span<const std::size_t> positions);

/// Labeled windows sliced at stride 1 from one path: window i holds
/// path[i, i + width) and is labeled by the return from path[i + width - 1]
/// to path[i + width]. Ids are "<prefix>-<i>".
std::vector<LabeledWindow> sliding_labeled_windows(std::span<const double> path,
                                                   std::size_t width,
                                                   std::string_view id_prefix);

} // namespace csfbench
