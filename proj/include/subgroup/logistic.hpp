#ifndef SUBGROUP_LOGISTIC_HPP
#define SUBGROUP_LOGISTIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "data.hpp"
#include "error.hpp"
#include "special.hpp"

/**
 * @file logistic.hpp
 * @brief Maximum-likelihood logistic regression with Wald significance, and per-cluster star tables.
 */

namespace subgroup {

struct LogisticOptions {
    double tolerance = 1e-8;
    std::size_t max_iter = 50;
};

struct LogisticFit {
    /// "(Intercept)" followed by the design column names.
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd z_values;
    Eigen::VectorXd p_values;
    std::vector<std::string> stars;
    bool converged = false;
    bool separation = false;
    std::size_t iterations = 0;
    double log_likelihood = 0.0;
};

/// Significance marks: p < 0.001 "***", p < 0.05 "**", p < 0.1 "*", otherwise blank.
inline std::string stars(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::OutOfRange, "p-value outside [0, 1]");
    }
    if (p < 0.001) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

namespace detail {

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), x.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(x.cols()) = x;
    return out;
}

inline Eigen::VectorXd to_vector(std::span<const int> y) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = y[i];
    }
    return v;
}

// log(1 + e^t) without overflow
inline double softplus(double t) {
    return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
    if (t >= 0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}

/**
 * Bernoulli log-likelihood of `beta` (intercept first) for design `x` (without intercept column).
 */
inline double logistic_log_likelihood(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = (x * beta.tail(x.cols())).array() + beta(0);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += y[static_cast<std::size_t>(i)] * eta(i) - detail::softplus(eta(i));
    }
    return ll;
}

/// Gradient of `logistic_log_likelihood` with respect to `beta`.
inline Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta) {
    const Eigen::MatrixXd xt = detail::with_intercept(x);
    Eigen::VectorXd resid = detail::to_vector(y);
    const Eigen::VectorXd eta = xt * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        resid(i) -= detail::sigmoid(eta(i));
    }
    return xt.transpose() * resid;
}

inline Eigen::VectorXd logistic_predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = (x * beta.tail(x.cols())).array() + beta(0);
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta(i) = detail::sigmoid(eta(i));
    }
    return eta;
}

/**
 * Fit by iteratively reweighted least squares (Newton's method) with step halving.
 * Stops when the largest coefficient change is below `tolerance` or after `max_iter` steps.
 * Standard errors come from the inverse information matrix; p-values are two-sided Wald tests.
 *
 * Complete or quasi-complete separation does not throw: the fit is returned with
 * `separation = true` and `converged = false`. A singular information matrix throws RankDeficient.
 */
inline LogisticFit fit_logistic(const DesignMatrix& dm, const LogisticOptions& opts = {}) {
    const auto n = dm.x.rows();
    const auto d = dm.x.cols();
    if (static_cast<std::size_t>(n) != dm.response.size()) {
        throw Error(ErrorCode::SchemaMismatch, "response length differs from the row count");
    }
    std::size_t n1 = 0;
    for (int v : dm.response) {
        n1 += (v == 1);
    }
    if (n1 == 0 || n1 == static_cast<std::size_t>(n)) {
        throw Error(ErrorCode::SingleClass, "logistic regression needs both response classes");
    }
    if (n <= d + 1) {
        throw Error(ErrorCode::TooFewRows, "need more rows than coefficients");
    }

    const Eigen::MatrixXd xt = detail::with_intercept(dm.x);
    const Eigen::VectorXd y = detail::to_vector(dm.response);
    const auto p = xt.cols();

    auto information = [&](const Eigen::VectorXd& prob) {
        const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
        return Eigen::MatrixXd(xt.transpose() * w.asDiagonal() * xt);
    };
    auto probabilities = [&](const Eigen::VectorXd& beta) {
        Eigen::VectorXd eta = xt * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            eta(i) = detail::sigmoid(eta(i));
        }
        return eta;
    };
    auto separated = [&](const Eigen::VectorXd& prob) {
        bool ones = true;
        bool zeros = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y(i) == 1.0) {
                ones = ones && prob(i) > 1.0 - 1e-10;
            } else {
                zeros = zeros && prob(i) < 1e-10;
            }
        }
        return ones || zeros;
    };
    // Solve on the unit-diagonal scale; returns nullopt when the system is numerically singular.
    auto solve = [&](const Eigen::MatrixXd& info, const Eigen::VectorXd& rhs) -> std::optional<Eigen::VectorXd> {
        const Eigen::VectorXd diag = info.diagonal();
        if ((diag.array() <= 0).any()) {
            return std::nullopt;
        }
        const Eigen::VectorXd s = diag.cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd scaled = s.asDiagonal() * info * s.asDiagonal();
        Eigen::LLT<Eigen::MatrixXd> llt(scaled);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
            return std::nullopt;
        }
        return Eigen::VectorXd(s.asDiagonal() * llt.solve(s.asDiagonal() * rhs));
    };

    LogisticFit fit;
    fit.names.push_back("(Intercept)");
    fit.names.insert(fit.names.end(), dm.column_names.begin(), dm.column_names.end());

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd prob = probabilities(beta);
    double ll = logistic_log_likelihood(dm.x, dm.response, beta);
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        if (it > 0 && separated(prob)) {
            fit.separation = true;
            break;
        }
        const Eigen::VectorXd grad = xt.transpose() * (y - prob);
        auto step = solve(information(prob), grad);
        if (!step) {
            if (it == 0) {
                throw Error(ErrorCode::RankDeficient, "information matrix is singular (collinear or constant columns)");
            }
            fit.separation = true;
            break;
        }
        Eigen::VectorXd next = beta + *step;
        double ll_next = logistic_log_likelihood(dm.x, dm.response, next);
        for (int halvings = 0; halvings < 30 && !(ll_next >= ll - 1e-12 * std::abs(ll)); ++halvings) {
            *step *= 0.5;
            next = beta + *step;
            ll_next = logistic_log_likelihood(dm.x, dm.response, next);
        }
        beta = next;
        ll = ll_next;
        prob = probabilities(beta);
        fit.iterations = it + 1;
        if (step->cwiseAbs().maxCoeff() < opts.tolerance) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged && !fit.separation && separated(prob)) {
        fit.separation = true;
    }

    fit.coefficients = beta;
    fit.log_likelihood = ll;
    const Eigen::MatrixXd info = information(prob);
    Eigen::VectorXd se(p);
    auto inv = solve(info, Eigen::VectorXd::Unit(p, 0));
    if (inv) {
        Eigen::MatrixXd cov(p, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            cov.col(j) = *solve(info, Eigen::VectorXd::Unit(p, j));
        }
        se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else if (fit.separation) {
        se.setConstant(std::numeric_limits<double>::infinity());
    } else {
        throw Error(ErrorCode::RankDeficient, "information matrix is singular at the optimum");
    }
    fit.std_errors = se;
    fit.z_values = beta.cwiseQuotient(se);
    fit.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double z = fit.z_values(j);
        fit.p_values(j) = std::isfinite(z) ? special::normal_two_sided(z) : 1.0;
        fit.stars.push_back(stars(fit.p_values(j)));
    }
    return fit;
}

struct SignificanceRow {
    std::size_t cluster = 0;
    std::size_t n_rows = 0;
    /// One entry per table column: a star string, "" or "n/a".
    std::vector<std::string> cells;
    std::optional<LogisticFit> fit;
    std::vector<std::string> notes;
};

struct SignificanceTable {
    /// "(Intercept)" followed by the design column names.
    std::vector<std::string> column_names;
    std::vector<SignificanceRow> rows;
};

/**
 * Fit one logistic regression per cluster on that cluster's rows and tabulate significance stars.
 * Columns constant within a cluster are left out of that cluster's fit and shown as "n/a"; a cluster
 * that cannot be fitted at all shows "n/a" in every cell, with the reason in `notes`.
 */
inline SignificanceTable per_cluster_significance(const Dataset& ds, std::span<const std::size_t> assignment,
                                                  std::size_t k, const ReferenceLevels& refs = {},
                                                  const LogisticOptions& opts = {}) {
    if (assignment.size() != ds.n_rows()) {
        throw Error(ErrorCode::SchemaMismatch, "assignment length differs from the row count");
    }
    SignificanceTable table;
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t r = 0; r < assignment.size(); ++r) {
        members.at(assignment[r]).push_back(r);
    }

    const auto full = one_hot(ds.select_rows(std::vector<std::size_t>{}), refs);
    table.column_names.push_back("(Intercept)");
    table.column_names.insert(table.column_names.end(), full.column_names.begin(), full.column_names.end());
    const std::size_t width = table.column_names.size();

    for (std::size_t c = 0; c < k; ++c) {
        SignificanceRow row;
        row.cluster = c;
        row.n_rows = members[c].size();
        row.cells.assign(width, "n/a");

        auto dm = one_hot(ds.select_rows(members[c]), refs);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < dm.x.cols(); ++j) {
            const bool constant = dm.x.rows() == 0 || (dm.x.col(j).array() == dm.x(0, j)).all();
            if (constant) {
                row.notes.push_back("RankDeficient: '" + dm.column_names[static_cast<std::size_t>(j)] +
                                    "' is constant in this cluster");
            } else {
                keep.push_back(j);
            }
        }
        DesignMatrix reduced;
        reduced.response = dm.response;
        reduced.x.resize(dm.x.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) {
            reduced.x.col(static_cast<Eigen::Index>(j)) = dm.x.col(keep[j]);
            reduced.column_names.push_back(dm.column_names[static_cast<std::size_t>(keep[j])]);
        }

        try {
            auto fit = fit_logistic(reduced, opts);
            row.cells[0] = fit.stars[0];
            for (std::size_t j = 0; j < keep.size(); ++j) {
                row.cells[static_cast<std::size_t>(keep[j]) + 1] = fit.stars[j + 1];
            }
            if (fit.separation) {
                row.notes.push_back("Separation: fitted probabilities reached 0 or 1; coefficients are not finite estimates");
            } else if (!fit.converged) {
                row.notes.push_back("not converged after " + std::to_string(fit.iterations) + " iterations");
            }
            row.fit = std::move(fit);
        } catch (const Error& e) {
            row.cells.assign(width, "n/a");
            row.notes.push_back(std::string(to_string(e.code())) + ": " + e.what());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}

#endif
