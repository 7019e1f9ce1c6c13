#include <gtest/gtest.h>

#include <random>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "subgroup/hotelling.hpp"

using namespace subgroup;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, double shift, std::mt19937_64& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = z(rng) + (j == 0 ? shift : 0.0);
    return m;
}

std::vector<double> as_vector(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

}

TEST(Hotelling, OneDimensionalExample) {
    const auto r = hotelling(column({0, 0, 1, 1}), column({2, 2, 3, 3}));
    // Pooled variance 1/3, mean difference 2: t^2 = 4 / (1/3 * 1/2) = 24.
    EXPECT_NEAR(r.t2, 24.0, 1e-12);
    EXPECT_NEAR(r.f_stat, 24.0, 1e-12);
    EXPECT_EQ(r.df1, 1u);
    EXPECT_EQ(r.df2, 6u);
    const double p = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(6.0), std::sqrt(24.0)));
    EXPECT_NEAR(r.p_value, p, 1e-12);
    EXPECT_TRUE(r.reject_at_90);
}

TEST(Hotelling, IdenticalGroupsGivePValueOne) {
    std::mt19937_64 rng(1);
    const auto a = gaussian(40, 3, 0.0, rng);
    const auto r = hotelling(a, a);
    EXPECT_NEAR(r.t2, 0.0, 1e-20);
    EXPECT_NEAR(r.p_value, 1.0, 1e-12);
    EXPECT_FALSE(r.reject_at_90);
}

TEST(Hotelling, UnivariateMatchesPooledT) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = gaussian(15 + trial, 1, 0.3, rng);
        const auto b = gaussian(25, 1, 0.0, rng);
        const auto r = hotelling(a, b);
        const double t2 = oracle::pooled_t2(as_vector(a), as_vector(b));
        EXPECT_NEAR(r.t2, t2, 1e-10 * t2);
        const double df = static_cast<double>(a.rows() + b.rows() - 2);
        const double p = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::sqrt(t2)));
        EXPECT_NEAR(r.p_value, p, 1e-10);
    }
}

TEST(Hotelling, PValueMatchesFDistribution) {
    std::mt19937_64 rng(3);
    const auto a = gaussian(30, 4, 0.5, rng);
    const auto b = gaussian(35, 4, 0.0, rng);
    const auto r = hotelling(a, b);
    const boost::math::fisher_f f(static_cast<double>(r.df1), static_cast<double>(r.df2));
    EXPECT_NEAR(r.p_value, boost::math::cdf(boost::math::complement(f, r.f_stat)), 1e-12);
    EXPECT_NEAR(r.f_stat, (65.0 - 4.0 - 1.0) / (4.0 * 63.0) * r.t2, 1e-10);
}

TEST(Hotelling, SymmetricInGroupOrder) {
    std::mt19937_64 rng(4);
    const auto a = gaussian(20, 3, 1.0, rng);
    const auto b = gaussian(30, 3, 0.0, rng);
    EXPECT_NEAR(hotelling(a, b).t2, hotelling(b, a).t2, 1e-10);
}

TEST(Hotelling, InvariantUnderInvertibleAffineMaps) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = gaussian(25, 3, 0.7, rng);
        const auto b = gaussian(30, 3, 0.0, rng);
        Eigen::MatrixXd m = gaussian(3, 3, 0.0, rng) + 3 * Eigen::MatrixXd::Identity(3, 3);
        const Eigen::RowVectorXd shift = gaussian(1, 3, 5.0, rng);
        const Eigen::MatrixXd ta = (a * m.transpose()).rowwise() + shift;
        const Eigen::MatrixXd tb = (b * m.transpose()).rowwise() + shift;
        const double t2 = hotelling(a, b).t2;
        EXPECT_NEAR(hotelling(ta, tb).t2, t2, 1e-8 * t2);
    }
}

TEST(Hotelling, ZeroVarianceFeatureIsDropped) {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd a = gaussian(20, 3, 0.5, rng);
    Eigen::MatrixXd b = gaussian(20, 3, 0.0, rng);
    a.col(1).setConstant(1.0);
    b.col(1).setConstant(1.0);
    const std::vector<std::string> names{"f0", "f1", "f2"};
    const auto r = hotelling(a, b, names);
    EXPECT_EQ(r.dropped_features, (std::vector<std::string>{"f1"}));
    EXPECT_EQ(r.df1, 2u);
    Eigen::MatrixXd ra(20, 2), rb(20, 2);
    ra << a.col(0), a.col(2);
    rb << b.col(0), b.col(2);
    EXPECT_NEAR(r.t2, hotelling(ra, rb).t2, 1e-10);
}

TEST(Hotelling, TooFewRowsIsAnError) {
    try {
        hotelling(column({1.0}), column({2.0, 3.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
    }
}

TEST(PairwiseMatrix, SingletonClusterKeepsItsErrorInTheCell) {
    Schema s({{"x", ColumnKind::Numeric, {}}, {"b", ColumnKind::Binary, {}}, {"y", ColumnKind::Binary, {}}}, "y");
    const Dataset ds(s, {{0.1, 0.2, 0.3, 0.9, 1.0, 1.2, 5.0}, {0, 1, 0, 1, 0, 1, 1}, {0, 1, 0, 1, 0, 1, 0}});
    const std::vector<std::size_t> a{0, 0, 0, 1, 1, 1, 2};
    const auto m = pairwise_matrix(ds, a, 3);
    EXPECT_EQ(m.cells.size(), 3u);
    EXPECT_EQ(m.features, (std::vector<std::string>{"x", "b"}));
    EXPECT_TRUE(m.at(0, 1).result.has_value());
    EXPECT_EQ(m.at(0, 2).error, ErrorCode::TooFewRows);
    EXPECT_EQ(m.at(2, 1).error, ErrorCode::TooFewRows);
}
