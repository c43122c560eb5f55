#include "csfbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csfbench/error.hpp"
#include "csfbench/rng.hpp"

namespace csfbench {

double quantile(std::span<const double> values, double q) {
    if (values.empty()) fail(ErrorKind::invalid_input, "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::invalid_input, "quantile level outside [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double position = q * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(position));
    const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
    const double fraction = position - static_cast<double>(lower);
    if (fraction == 0.0) return sorted[lower];
    return sorted[lower] + fraction * (sorted[upper] - sorted[lower]);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) fail(ErrorKind::invalid_input, "Wilson interval needs at least one trial");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double binomial_upper_tail(std::size_t n, std::size_t k, double p) {
    if (k > n) return 0.0;
    double total = 0.0;
    for (std::size_t i = k; i <= n; ++i) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(i) + 1.0) -
                                std::lgamma(static_cast<double>(n - i) + 1.0) +
                                static_cast<double>(i) * std::log(p) +
                                static_cast<double>(n - i) * std::log1p(-p);
        total += std::exp(log_term);
    }
    return total;
}

std::vector<std::size_t> permutation(std::size_t n, unsigned long long seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(substream_seed(seed, 0, 0x5eed));
    // Explicit Fisher-Yates: std::shuffle's draw sequence is library-specific.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

} // namespace csfbench
