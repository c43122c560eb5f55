#include <cmath>
#include <random>

#include "csfbench/series.hpp"
#include "support.hpp"

using namespace csfbench;
using csfbench::test::expect_error;

namespace {

std::vector<Sign> signs_of(std::vector<double> prices) {
    return diff_signs(prices).signs;
}

// Textbook double loop, kept deliberately naive.
double naive_acf(const std::vector<double>& x, std::size_t k) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - mean) * (x[t] - mean);
        if (t + k < x.size()) num += (x[t] - mean) * (x[t + k] - mean);
    }
    return num / den;
}

} // namespace

TEST(DiffSigns, StrictlyIncreasing) {
    EXPECT_EQ(signs_of({1, 2, 3}), (std::vector<Sign>{Sign::up, Sign::up}));
}

TEST(DiffSigns, TiesAreDown) {
    EXPECT_EQ(signs_of({5, 5, 5}), (std::vector<Sign>{Sign::down, Sign::down}));
}

TEST(DiffSigns, Mixed) {
    EXPECT_EQ(signs_of({3, 1, 4, 4}), (std::vector<Sign>{Sign::down, Sign::up, Sign::down}));
}

TEST(DiffSigns, NeedsTwoPrices) {
    expect_error(ErrorKind::invalid_input, [] { diff_signs(std::vector<double>{1.0}); });
}

TEST(SimpleReturns, Examples) {
    auto r = simple_returns(std::vector<double>{100, 110});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0], 0.10, 1e-15);
    EXPECT_EQ(simple_returns(std::vector<double>{100, 100}), std::vector<double>{0.0});
    r = simple_returns(std::vector<double>{100, 90, 99});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0], -0.10, 1e-15);
    EXPECT_NEAR(r[1], 0.10, 1e-15);
}

TEST(UpCount, CountsStrictRises) {
    EXPECT_EQ(up_count(std::vector<double>{1, 2, 2, 3, 1}), 2u);
}

TEST(PriceSeries, RejectsNonPositive) {
    expect_error(ErrorKind::invalid_input, [] { PriceSeries("x", {1.0, 0.0, 2.0}, Family::real); });
    expect_error(ErrorKind::invalid_input, [] { PriceSeries("x", {1.0, -3.0}, Family::real); });
    expect_error(ErrorKind::invalid_input, [] { PriceSeries("x", {1.0, NAN}, Family::real); });
}

TEST(Windows, Counts) {
    auto make = [](std::size_t n) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 + static_cast<double>(i);
        return PriceSeries("s", p, Family::real);
    };
    EXPECT_EQ(windows(make(25), 20).size(), 6u);
    EXPECT_EQ(windows(make(20), 20).size(), 1u);
    EXPECT_EQ(windows(make(19), 20).size(), 0u);
    const auto s = make(30);
    const auto w = windows(s, 20, 5);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[2].offset, 10u);
    EXPECT_EQ(w[2].prices.front(), 11.0);
    EXPECT_EQ(w[2].prices.size(), 20u);
}

TEST(Autocorrelation, LagZeroIsOne) {
    const std::vector<double> x{1.0, 3.0, 2.0, 5.0, 4.0};
    EXPECT_EQ(autocorrelation(x, 2).values[0], 1.0);
}

TEST(Autocorrelation, WhiteNoiseWithinBound) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01;
    std::vector<double> x(10000);
    for (auto& v : x) v = n01(rng);
    const auto acf = autocorrelation(x, 20);
    ASSERT_EQ(acf.values.size(), 21u);
    const double bound = 3.0 / std::sqrt(10000.0);
    for (std::size_t k = 1; k <= 20; ++k) EXPECT_LT(std::abs(acf.values[k]), bound) << "lag " << k;
}

TEST(Autocorrelation, AlternatingSeries) {
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 == 0 ? 1.0 : 2.0;
    EXPECT_NEAR(autocorrelation(x, 1).values[1], -1.0, 0.01);
}

TEST(Autocorrelation, MatchesNaiveDoubleLoop) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(257);
    for (auto& v : x) v = u(rng);
    const auto acf = autocorrelation(x, 30);
    for (std::size_t k = 0; k <= 30; ++k) EXPECT_NEAR(acf.values[k], naive_acf(x, k), 1e-12);
}

TEST(Autocorrelation, ConstantSeriesIsDegenerate) {
    expect_error(ErrorKind::degenerate_series,
                 [] { autocorrelation(std::vector<double>(50, 3.0), 5); });
}

TEST(Family, RoundTripsNames) {
    for (Family f : {Family::csf, Family::ncsf, Family::random, Family::real}) {
        EXPECT_EQ(family_from_string(to_string(f)), f);
    }
    expect_error(ErrorKind::invalid_input, [] { family_from_string("momentum"); });
}
