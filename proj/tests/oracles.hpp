#ifndef SUBGROUP_TESTS_ORACLES_HPP
#define SUBGROUP_TESTS_ORACLES_HPP

// Slow, obviously-correct reference computations used to check the library.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "subgroup/data.hpp"
#include "subgroup/kproto.hpp"

namespace oracle {

/// Mean within-cluster over mean between-cluster dissimilarity, by explicit enumeration of pairs i < j.
inline double mcclain_rao(const subgroup::MixedRows& m, std::span<const std::size_t> assignment, double gamma) {
    double sw = 0.0, sb = 0.0;
    double nw = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            const double d = subgroup::pair_dissimilarity(m, i, j, gamma);
            if (assignment[i] == assignment[j]) {
                sw += d;
                nw += 1;
            } else {
                sb += d;
                nb += 1;
            }
        }
    }
    return (sw / nw) / (sb / nb);
}

/// Same index with the dissimilarity spelled out from the dataset cells, independent of MixedRows.
inline double mcclain_rao_cells(const subgroup::Dataset& ds, std::span<const std::size_t> assignment, double gamma) {
    const auto& schema = ds.schema();
    auto dist = [&](std::size_t a, std::size_t b) {
        double d = 0.0;
        for (auto c : schema.predictors()) {
            if (schema.column(c).kind == subgroup::ColumnKind::Numeric) {
                const double diff = ds.value(a, c) - ds.value(b, c);
                d += diff * diff;
            } else if (ds.value(a, c) != ds.value(b, c)) {
                d += gamma;
            }
        }
        return d;
    };
    double sw = 0.0, sb = 0.0, nw = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = i + 1; j < ds.n_rows(); ++j) {
            const double d = dist(i, j);
            if (assignment[i] == assignment[j]) {
                sw += d;
                nw += 1;
            } else {
                sb += d;
                nb += 1;
            }
        }
    }
    return (sw / nw) / (sb / nb);
}

/// AUC by enumerating every positive-negative pair; ties count one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Squared two-sample t statistic with pooled variance.
inline double pooled_t2(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double ma = mean(a), mb = mean(b);
    double ssa = 0.0, ssb = 0.0;
    for (double x : a) ssa += (x - ma) * (x - ma);
    for (double x : b) ssb += (x - mb) * (x - mb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sp2 = (ssa + ssb) / (na + nb - 2.0);
    const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    return t * t;
}

/// Adjusted Rand index from the contingency table.
inline double ari(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::map<std::pair<std::size_t, std::size_t>, double> nij;
    std::map<std::size_t, double> ai, bj;
    for (std::size_t i = 0; i < a.size(); ++i) {
        nij[{a[i], b[i]}] += 1;
        ai[a[i]] += 1;
        bj[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& [key, v] : nij) index += c2(v);
    for (const auto& [key, v] : ai) sa += c2(v);
    for (const auto& [key, v] : bj) sb += c2(v);
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

/// Central finite-difference gradient of f at x.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd up = x, dn = x;
        up(i) += h;
        dn(i) -= h;
        g(i) = (f(up) - f(dn)) / (2 * h);
    }
    return g;
}

/// A random mixed-type dataset with `n` rows: numeric, binary and categorical predictors plus a binary response.
inline subgroup::Dataset random_mixed(std::size_t n, std::size_t n_num, std::size_t n_bin, std::size_t n_cat,
                                      std::size_t levels, std::mt19937_64& rng) {
    using namespace subgroup;
    std::vector<Column> cols;
    std::vector<std::vector<double>> cells;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> lv(0, levels - 1);
    for (std::size_t j = 0; j < n_num; ++j) {
        cols.push_back({"n" + std::to_string(j), ColumnKind::Numeric, {}});
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng);
        cells.push_back(std::move(v));
    }
    for (std::size_t j = 0; j < n_bin; ++j) {
        cols.push_back({"b" + std::to_string(j), ColumnKind::Binary, {}});
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng) < 0.5 ? 0.0 : 1.0;
        cells.push_back(std::move(v));
    }
    std::vector<std::string> names;
    for (std::size_t l = 0; l < levels; ++l) names.push_back("l" + std::to_string(l));
    for (std::size_t j = 0; j < n_cat; ++j) {
        cols.push_back({"c" + std::to_string(j), ColumnKind::Categorical, names});
        std::vector<double> v(n);
        for (auto& x : v) x = static_cast<double>(lv(rng));
        cells.push_back(std::move(v));
    }
    cols.push_back({"y", ColumnKind::Binary, {}});
    std::vector<double> y(n);
    for (auto& x : y) x = u(rng) < 0.5 ? 0.0 : 1.0;
    cells.push_back(std::move(y));
    return Dataset(Schema(std::move(cols), "y"), std::move(cells));
}

}

#endif
