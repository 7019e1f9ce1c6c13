#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subgroup/metrics.hpp"

using namespace subgroup;

TEST(Auc, WorkedExample) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auc_roc(s, y), 0.75);
}

TEST(Auc, PerfectReversedAndTied) {
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_EQ(auc_roc(std::vector<double>{1, 2, 3, 4}, y), 1.0);
    EXPECT_EQ(auc_roc(std::vector<double>{4, 3, 2, 1}, y), 0.0);
    EXPECT_EQ(auc_roc(std::vector<double>{1, 1, 1, 1}, y), 0.5);
}

TEST(Auc, SingleClassIsAnError) {
    try {
        auc_roc(std::vector<double>{1, 2}, std::vector<int>{1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingleClass);
    }
}

TEST(Auc, MatchesPairEnumerationWithTies) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse scores so ties are common.
            s[i] = static_cast<double>(std::uniform_int_distribution<int>(0, 9)(rng));
            y[i] = static_cast<int>(i % 2);
        }
        EXPECT_NEAR(auc_roc(s, y), oracle::auc(s, y), 1e-12);
    }
}

TEST(Auc, InvariantUnderStrictlyIncreasingMaps) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> s(300), t(300);
    std::vector<int> y(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
        y[i] = static_cast<int>(i % 3 == 0);
        s[i] = z(rng) + y[i];
        t[i] = std::exp(3.0 * s[i]) + 7.0;
    }
    EXPECT_DOUBLE_EQ(auc_roc(s, y), auc_roc(t, y));
    for (auto& v : t) v = -v;
    EXPECT_NEAR(auc_roc(t, y), 1.0 - auc_roc(s, y), 1e-12);
}

TEST(Accuracy, FractionCorrect) {
    EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{1, 0, 1, 1}, std::vector<int>{1, 1, 1, 0}), 0.5);
}
