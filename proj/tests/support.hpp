#pragma once

#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "csfbench/dataset.hpp"
#include "csfbench/error.hpp"
#include "csfbench/series.hpp"

namespace csfbench::test {

inline void expect_error(ErrorKind kind, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(kind) << ", nothing thrown";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

/// Prices whose step directions follow `steps` ('U' or 'D'), starting at 100.
inline std::vector<double> prices_from_steps(const std::string& steps) {
    std::vector<double> p{100.0};
    for (char c : steps) p.push_back(p.back() * (c == 'U' ? 1.01 : 0.99));
    return p;
}

inline LabeledWindow window_from_steps(const std::string& id, const std::string& steps, bool positive) {
    LabeledWindow w;
    w.id = id;
    w.prices = prices_from_steps(steps);
    w.realized_return = positive ? 0.01 : -0.01;
    w.label = positive ? Label::positive : Label::negative;
    return w;
}

} // namespace csfbench::test
