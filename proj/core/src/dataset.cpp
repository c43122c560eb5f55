#include "csfbench/dataset.hpp"

#include <bit>
#include <cmath>
#include <unordered_set>

#include "csfbench/error.hpp"
#include "csfbench/rng.hpp"

namespace csfbench {

std::size_t Dataset::window_size() const noexcept {
    return windows.empty() ? 0 : windows.front().prices.size();
}

std::size_t Dataset::positives() const noexcept {
    std::size_t count = 0;
    for (const auto& w : windows) count += w.positive() ? 1 : 0;
    return count;
}

double Dataset::base_rate() const { return csfbench::base_rate(windows); }

double base_rate(std::span<const LabeledWindow> windows) {
    if (windows.empty()) fail(ErrorKind::invalid_input, "base rate of an empty dataset");
    std::size_t positives = 0;
    for (const auto& w : windows) positives += w.positive() ? 1 : 0;
    return static_cast<double>(positives) / static_cast<double>(windows.size());
}

void Dataset::validate() const {
    const std::size_t width = window_size();
    std::unordered_set<std::string> seen;
    for (const auto& w : windows) {
        if (w.prices.size() != width) {
            fail(ErrorKind::invalid_input, "window '" + w.id + "' breaks the uniform window size");
        }
        for (double p : w.prices) {
            if (!(p > 0.0) || !std::isfinite(p)) {
                fail(ErrorKind::invalid_input, "window '" + w.id + "' has a non-positive price");
            }
        }
        if (!std::isfinite(w.realized_return) || w.label != label_for_return(w.realized_return)) {
            fail(ErrorKind::invalid_input,
                 "window '" + w.id + "' label disagrees with its realized return");
        }
        if (!seen.insert(w.id).second) {
            fail(ErrorKind::invalid_input, "duplicate window id '" + w.id + "'");
        }
    }
}

std::string content_hash(std::span<const LabeledWindow> windows) {
    std::uint64_t h = fnv1a64("");
    auto mix_double = [&h](double value) {
        const auto bits = std::bit_cast<std::uint64_t>(value);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        h = fnv1a64(std::string_view(bytes, 8), h);
    };
    for (const auto& w : windows) {
        h = fnv1a64(w.id, h);
        for (double p : w.prices) mix_double(p);
        mix_double(w.realized_return);
        h = fnv1a64(w.positive() ? "+" : "-", h);
    }
    return to_hex(h);
}

std::vector<LabeledWindow> take(std::span<const LabeledWindow> windows,
                                std::span<const std::size_t> positions) {
    std::vector<LabeledWindow> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) {
        if (p >= windows.size()) fail(ErrorKind::invalid_input, "window position out of range");
        out.push_back(windows[p]);
    }
    return out;
}

std::string to_hex(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

} // namespace csfbench

namespace csfbench {

std::vector<LabeledWindow> sliding_labeled_windows(std::span<const double> path,
                                                   std::size_t width,
                                                   std::string_view id_prefix) {
    if (width < 2) fail(ErrorKind::invalid_input, "window width must be at least 2");
    if (path.size() < width + 1) {
        fail(ErrorKind::invalid_input, "series of " + std::to_string(path.size()) +
                                           " prices is too short for one labeled window of " +
                                           std::to_string(width));
    }
    std::vector<LabeledWindow> out;
    out.reserve(path.size() - width);
    for (std::size_t i = 0; i + width < path.size(); ++i) {
        LabeledWindow w;
        w.id = std::string(id_prefix) + "-" + std::to_string(i);
        w.prices.assign(path.begin() + static_cast<std::ptrdiff_t>(i),
                        path.begin() + static_cast<std::ptrdiff_t>(i + width));
        w.realized_return = path[i + width] / path[i + width - 1] - 1.0;
        w.label = label_for_return(w.realized_return);
        out.push_back(std::move(w));
    }
    return out;
}

} // namespace csfbench
