#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csfbench {

enum class Family { csf, ncsf, random, real };

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

enum class Sign : std::uint8_t { down = 0, up = 1 };

/// Ordered positive price levels. Validated on construction and immutable
/// afterwards.
class PriceSeries {
public:
    PriceSeries(std::string id, std::vector<double> prices, Family source,
                std::map<std::string, std::string> meta = {});

    const std::string& id() const noexcept { return id_; }
    std::span<const double> prices() const noexcept { return prices_; }
    std::size_t size() const noexcept { return prices_.size(); }
    Family source() const noexcept { return source_; }
    const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

private:
    std::string id_;
    std::vector<double> prices_;
    Family source_;
    std::map<std::string, std::string> meta_;
};

struct SignSequence {
    std::vector<Sign> signs;
    std::string series_id;
    std::size_t offset = 0;
};

/// sign[i] = UP iff prices[i+1] > prices[i]; flat steps map to DOWN.
SignSequence diff_signs(std::span<const double> prices, std::string series_id = {},
                        std::size_t offset = 0);

std::vector<double> simple_returns(std::span<const double> prices);

/// Number of UP steps in a price window.
std::size_t up_count(std::span<const double> prices);

struct PriceWindow {
    std::span<const double> prices;
    std::size_t offset = 0;
};

/// Windows of `width` consecutive prices starting at offsets 0, stride, 2*stride, ...
/// Empty when the series is shorter than `width`.
std::vector<PriceWindow> windows(const PriceSeries& series, std::size_t width,
                                 std::size_t stride = 1);

struct AcfResult {
    std::vector<double> values; // values[k] = rho(k), k = 0..max_lag

    std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Sample autocorrelation rho(k) = sum_t (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2.
AcfResult autocorrelation(std::span<const double> values, std::size_t max_lag);

} // namespace csfbench
