#include "csfbench/series.hpp"

#include <cmath>
#include <numeric>

#include "csfbench/error.hpp"

namespace csfbench {

std::string_view to_string(Family family) noexcept {
    switch (family) {
    case Family::csf: return "csf";
    case Family::ncsf: return "ncsf";
    case Family::random: return "random";
    case Family::real: return "real";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "csf") return Family::csf;
    if (name == "ncsf") return Family::ncsf;
    if (name == "random") return Family::random;
    if (name == "real") return Family::real;
    fail(ErrorKind::invalid_input, "unknown family '" + std::string(name) + "'");
}

namespace {

void require_positive(std::span<const double> prices) {
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            fail(ErrorKind::invalid_input,
                 "price at position " + std::to_string(i) + " is not a positive finite number");
        }
    }
}

void require_length(std::span<const double> prices, std::size_t minimum) {
    if (prices.size() < minimum) {
        fail(ErrorKind::invalid_input, "need at least " + std::to_string(minimum) +
                                           " prices, got " + std::to_string(prices.size()));
    }
}

} // namespace

PriceSeries::PriceSeries(std::string id, std::vector<double> prices, Family source,
                         std::map<std::string, std::string> meta)
    : id_(std::move(id)), prices_(std::move(prices)), source_(source), meta_(std::move(meta)) {
    require_positive(prices_);
}

SignSequence diff_signs(std::span<const double> prices, std::string series_id,
                        std::size_t offset) {
    require_length(prices, 2);
    require_positive(prices);
    SignSequence out;
    out.series_id = std::move(series_id);
    out.offset = offset;
    out.signs.reserve(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        out.signs.push_back(prices[i + 1] - prices[i] > 0.0 ? Sign::up : Sign::down);
    }
    return out;
}

std::vector<double> simple_returns(std::span<const double> prices) {
    require_length(prices, 2);
    require_positive(prices);
    std::vector<double> out(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        out[i] = prices[i + 1] / prices[i] - 1.0;
    }
    return out;
}

std::size_t up_count(std::span<const double> prices) {
    std::size_t ups = 0;
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        if (prices[i + 1] - prices[i] > 0.0) ++ups;
    }
    return ups;
}

std::vector<PriceWindow> windows(const PriceSeries& series, std::size_t width,
                                 std::size_t stride) {
    if (width < 2) fail(ErrorKind::invalid_input, "window width must be at least 2");
    if (stride == 0) fail(ErrorKind::invalid_input, "window stride must be positive");
    std::vector<PriceWindow> out;
    const auto prices = series.prices();
    if (width > prices.size()) return out;
    for (std::size_t offset = 0; offset + width <= prices.size(); offset += stride) {
        out.push_back({prices.subspan(offset, width), offset});
    }
    return out;
}

AcfResult autocorrelation(std::span<const double> values, std::size_t max_lag) {
    if (values.size() <= max_lag) {
        fail(ErrorKind::invalid_input, "series length must exceed the maximum lag");
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    std::vector<double> centered(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) centered[i] = values[i] - mean;

    double denominator = 0.0;
    for (double c : centered) denominator += c * c;
    if (!(denominator > 0.0)) fail(ErrorKind::degenerate_series, "series has zero variance");

    AcfResult out;
    out.values.resize(max_lag + 1);
    out.values[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double numerator = 0.0;
        for (std::size_t t = 0; t + k < centered.size(); ++t) numerator += centered[t] * centered[t + k];
        out.values[k] = numerator / denominator;
    }
    return out;
}

} // namespace csfbench
