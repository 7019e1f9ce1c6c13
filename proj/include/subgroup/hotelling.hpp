#ifndef SUBGROUP_HOTELLING_HPP
#define SUBGROUP_HOTELLING_HPP

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "data.hpp"
#include "error.hpp"
#include "special.hpp"

/**
 * @file hotelling.hpp
 * @brief Two-sample Hotelling's T^2 tests between clusters.
 */

namespace subgroup {

struct HotellingResult {
    double t2 = 0.0;
    double f_stat = 0.0;
    std::size_t df1 = 0;
    std::size_t df2 = 0;
    double p_value = 1.0;
    bool reject_at_90 = false;
    std::vector<std::string> dropped_features;
};

/**
 * Two-sample Hotelling's T^2 on the rows of `a` and `b` (observations x features).
 *
 * T^2 = n_a n_b / (n_a + n_b) * d' S_p^{-1} d with d the mean difference and S_p the pooled
 * covariance ((n_a - 1) S_a + (n_b - 1) S_b) / (n_a + n_b - 2). The p-value comes from
 * F = (n_a + n_b - p - 1) / (p (n_a + n_b - 2)) * T^2 on (p, n_a + n_b - p - 1) degrees of freedom.
 * Features with zero pooled variance are removed first and listed in `dropped_features`.
 */
inline HotellingResult hotelling(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 std::span<const std::string> names = {}) {
    const auto na = a.rows();
    const auto nb = b.rows();
    if (a.cols() != b.cols()) {
        throw Error(ErrorCode::SchemaMismatch, "groups have different feature counts");
    }
    if (na < 2 || nb < 2) {
        throw Error(ErrorCode::TooFewRows, "each group needs at least two rows");
    }

    const Eigen::RowVectorXd mean_a = a.colwise().mean();
    const Eigen::RowVectorXd mean_b = b.colwise().mean();
    const Eigen::MatrixXd ca = a.rowwise() - mean_a;
    const Eigen::MatrixXd cb = b.rowwise() - mean_b;
    const double dof = static_cast<double>(na + nb - 2);
    const Eigen::MatrixXd pooled_full = (ca.transpose() * ca + cb.transpose() * cb) / dof;

    HotellingResult out;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double scale = std::max({1.0, mean_a(j) * mean_a(j), mean_b(j) * mean_b(j)});
        if (pooled_full(j, j) <= 1e-14 * scale) {
            out.dropped_features.push_back(j < static_cast<Eigen::Index>(names.size()) ? names[j] : std::to_string(j));
        } else {
            keep.push_back(j);
        }
    }
    const auto p = static_cast<Eigen::Index>(keep.size());
    if (p < 1) {
        throw Error(ErrorCode::SingularCovariance, "no feature has nonzero pooled variance");
    }
    if (na + nb - p - 1 < 1) {
        throw Error(ErrorCode::TooManyFeatures, "n_a + n_b - p - 1 < 1");
    }

    Eigen::MatrixXd pooled(p, p);
    Eigen::VectorXd diff(p);
    for (Eigen::Index r = 0; r < p; ++r) {
        diff(r) = mean_a(keep[r]) - mean_b(keep[r]);
        for (Eigen::Index c = 0; c < p; ++c) {
            pooled(r, c) = pooled_full(keep[r], keep[c]);
        }
    }
    // Work on the correlation scale so the conditioning test is unit-free.
    const Eigen::VectorXd sd = pooled.diagonal().cwiseSqrt();
    const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * pooled * sd.cwiseInverse().asDiagonal();
    const Eigen::VectorXd scaled_diff = diff.cwiseQuotient(sd);
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
        throw Error(ErrorCode::SingularCovariance, "pooled covariance is not invertible");
    }

    const double n_a = static_cast<double>(na);
    const double n_b = static_cast<double>(nb);
    const double quad = scaled_diff.dot(llt.solve(scaled_diff));
    out.t2 = std::max(0.0, n_a * n_b / (n_a + n_b) * quad);
    out.df1 = static_cast<std::size_t>(p);
    out.df2 = static_cast<std::size_t>(na + nb - p - 1);
    out.f_stat = static_cast<double>(out.df2) / (static_cast<double>(p) * dof) * out.t2;
    out.p_value = special::f_upper_tail(out.f_stat, static_cast<double>(out.df1), static_cast<double>(out.df2));
    out.reject_at_90 = out.p_value < 0.10;
    return out;
}

struct HotellingCell {
    std::size_t i = 0;
    std::size_t j = 0;
    std::optional<HotellingResult> result;
    std::optional<ErrorCode> error;
    std::string message;
};

/// Upper triangle (i < j) of pairwise tests, row-major.
struct HotellingMatrix {
    std::size_t k = 0;
    std::vector<std::string> features;
    std::vector<HotellingCell> cells;

    const HotellingCell& at(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        // index of (i, j) in row-major upper-triangle order
        const std::size_t idx = i * k - i * (i + 1) / 2 + (j - i - 1);
        return cells.at(idx);
    }
};

/**
 * Test every cluster pair on the numeric and binary predictors (binary as 0/1). Multi-class
 * columns are not included. A pair that cannot be tested keeps its error instead of a result.
 */
inline HotellingMatrix pairwise_matrix(const Dataset& ds, std::span<const std::size_t> assignment, std::size_t k) {
    if (assignment.size() != ds.n_rows()) {
        throw Error(ErrorCode::SchemaMismatch, "assignment length differs from the row count");
    }
    const auto& schema = ds.schema();
    std::vector<std::size_t> cols;
    HotellingMatrix out;
    out.k = k;
    for (auto c : schema.predictors()) {
        if (schema.column(c).kind != ColumnKind::Categorical) {
            cols.push_back(c);
            out.features.push_back(schema.column(c).name);
        }
    }

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t r = 0; r < assignment.size(); ++r) {
        members.at(assignment[r]).push_back(r);
    }
    auto group = [&](std::size_t c) {
        Eigen::MatrixXd g(static_cast<Eigen::Index>(members[c].size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < members[c].size(); ++r) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = ds.value(members[c][r], cols[j]);
            }
        }
        return g;
    };
    std::vector<Eigen::MatrixXd> groups;
    for (std::size_t c = 0; c < k; ++c) {
        groups.push_back(group(c));
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            HotellingCell cell{i, j, std::nullopt, std::nullopt, {}};
            try {
                cell.result = hotelling(groups[i], groups[j], out.features);
            } catch (const Error& e) {
                cell.error = e.code();
                cell.message = e.what();
            }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

}

#endif
