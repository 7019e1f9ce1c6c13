#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subgroup/logistic.hpp"

using namespace subgroup;

namespace {

DesignMatrix design(std::vector<std::vector<double>> rows, std::vector<int> y) {
    DesignMatrix dm;
    dm.x.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) dm.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    for (std::size_t j = 0; j < (rows.empty() ? 0 : rows[0].size()); ++j) dm.column_names.push_back("x" + std::to_string(j));
    dm.response = std::move(y);
    return dm;
}

// Counts rows of a 2x2 table into a one-predictor design.
DesignMatrix table(int x0y0, int x0y1, int x1y0, int x1y1) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    auto add = [&](double x, int label, int count) {
        for (int i = 0; i < count; ++i) {
            rows.push_back({x});
            y.push_back(label);
        }
    };
    add(0, 0, x0y0);
    add(0, 1, x0y1);
    add(1, 0, x1y0);
    add(1, 1, x1y1);
    return design(rows, y);
}

}

TEST(Logistic, TwoByTwoLogOddsRatio) {
    const auto fit = fit_logistic(table(3, 1, 1, 2));
    ASSERT_TRUE(fit.converged);
    // log((2/1) / (1/3)) = log 6; intercept log(1/3).
    EXPECT_NEAR(fit.coefficients(1), std::log(6.0), 1e-9);
    EXPECT_NEAR(fit.coefficients(0), std::log(1.0 / 3.0), 1e-9);
    // Woolf standard error of a log odds ratio.
    EXPECT_NEAR(fit.std_errors(1), std::sqrt(1.0 / 3 + 1.0 + 1.0 + 0.5), 1e-7);
}

TEST(Logistic, UninformativePredictorHasZeroCoefficient) {
    const auto fit = fit_logistic(table(5, 5, 5, 5));
    EXPECT_NEAR(fit.coefficients(1), 0.0, 1e-12);
    EXPECT_NEAR(fit.p_values(1), 1.0, 1e-12);
    EXPECT_EQ(fit.stars[1], "");
}

TEST(Logistic, GradientVanishesAtTheFit) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 300; ++i) {
        const double a = z(rng), b = z(rng);
        rows.push_back({a, b});
        y.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-(0.5 + a - 0.7 * b))))(rng) ? 1 : 0);
    }
    const auto dm = design(rows, y);
    const auto fit = fit_logistic(dm);
    EXPECT_LT(logistic_gradient(dm.x, dm.response, fit.coefficients).lpNorm<Eigen::Infinity>(), 1e-8);
    const auto f = [&](const Eigen::VectorXd& b) { return logistic_log_likelihood(dm.x, dm.response, b); };
    const Eigen::VectorXd probe = Eigen::VectorXd::Constant(3, 0.3);
    EXPECT_LT((oracle::fd_gradient(f, probe) - logistic_gradient(dm.x, dm.response, probe)).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Logistic, SeparationIsFlaggedNotThrown) {
    const auto fit = fit_logistic(design({{0}, {1}, {2}, {3}, {4}, {5}}, {0, 0, 0, 1, 1, 1}));
    EXPECT_TRUE(fit.separation);
    EXPECT_FALSE(fit.converged);
}

TEST(Logistic, CollinearColumnsAreRankDeficient) {
    try {
        fit_logistic(design({{0, 0}, {1, 2}, {2, 4}, {3, 6}, {1, 2}, {0, 0}}, {0, 1, 0, 1, 1, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    }
}

TEST(Logistic, SingleClassIsAnError) {
    try {
        fit_logistic(design({{0}, {1}, {2}}, {1, 1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingleClass);
    }
}

TEST(Stars, Boundaries) {
    EXPECT_EQ(stars(0.0009), "***");
    EXPECT_EQ(stars(0.001), "**");
    EXPECT_EQ(stars(0.049), "**");
    EXPECT_EQ(stars(0.05), "*");
    EXPECT_EQ(stars(0.099), "*");
    EXPECT_EQ(stars(0.1), "");
    EXPECT_EQ(stars(1.0), "");
    EXPECT_THROW(stars(1.5), Error);
    EXPECT_THROW(stars(std::nan("")), Error);
}

namespace {

Dataset cluster_data(std::mt19937_64& rng, std::size_t n_per) {
    Schema s({{"age", ColumnKind::Numeric, {}}, {"male", ColumnKind::Binary, {}}, {"y", ColumnKind::Binary, {}}}, "y");
    std::vector<double> age, male, y;
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < 2 * n_per; ++i) {
        const double a = z(rng);
        age.push_back(a + 3.0);
        // The second cluster is all male, so that column is constant there.
        male.push_back(i < n_per ? static_cast<double>(i % 2) : 1.0);
        y.push_back(std::bernoulli_distribution(1.0 / (1.0 + std::exp(-a)))(rng) ? 1.0 : 0.0);
    }
    return Dataset(s, {age, male, y});
}

}

TEST(Significance, ConstantColumnShowsNotApplicable) {
    std::mt19937_64 rng(5);
    const auto ds = cluster_data(rng, 200);
    std::vector<std::size_t> a(400);
    for (std::size_t i = 0; i < 400; ++i) a[i] = i < 200 ? 0 : 1;
    const auto t = per_cluster_significance(ds, a, 2);
    EXPECT_EQ(t.column_names, (std::vector<std::string>{"(Intercept)", "age", "male"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_NE(t.rows[0].cells[2], "n/a");
    EXPECT_EQ(t.rows[1].cells[2], "n/a");
    EXPECT_EQ(t.rows[1].cells[1], "***");
    EXPECT_FALSE(t.rows[1].notes.empty());
}

TEST(Significance, SingleClusterEqualsPooledFit) {
    std::mt19937_64 rng(6);
    const auto ds = cluster_data(rng, 150);
    const std::vector<std::size_t> a(ds.n_rows(), 0);
    const auto t = per_cluster_significance(ds, a, 1);
    auto dm = one_hot(ds);
    const auto pooled = fit_logistic(dm);
    ASSERT_TRUE(t.rows[0].fit.has_value());
    EXPECT_LT((t.rows[0].fit->coefficients - pooled.coefficients).norm(), 1e-12);
    for (std::size_t j = 0; j < pooled.stars.size(); ++j) EXPECT_EQ(t.rows[0].cells[j], pooled.stars[j]);
}

TEST(Significance, UnfittableClusterIsAllNotApplicable) {
    std::mt19937_64 rng(7);
    auto ds = cluster_data(rng, 50);
    std::vector<std::size_t> a(ds.n_rows(), 0);
    // Cluster 1 gets three rows only, fewer than its coefficients need.
    a[0] = a[1] = a[2] = 1;
    const auto t = per_cluster_significance(ds, a, 2);
    for (const auto& c : t.rows[1].cells) EXPECT_EQ(c, "n/a");
    EXPECT_FALSE(t.rows[1].notes.empty());
}
