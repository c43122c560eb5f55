#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace csfbench {

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). q in [0, 1]; values must be non-empty.
double quantile(std::span<const double> values, double q);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials,
                                          double z = 1.959963984540054);

/// P(X >= k) for X ~ Binomial(n, p).
double binomial_upper_tail(std::size_t n, std::size_t k, double p);

/// Seeded permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, unsigned long long seed);

} // namespace csfbench
