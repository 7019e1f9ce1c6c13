#ifndef SUBGROUP_KPROTO_HPP
#define SUBGROUP_KPROTO_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "random.hpp"

/**
 * @file kproto.hpp
 * @brief K-Prototypes clustering for mixed numeric/categorical rows.
 */

namespace subgroup {

/**
 * Row-major view of a dataset's predictors split by type, the layout every clustering
 * routine works on. Binary predictors are categorical with two levels; the response is excluded.
 */
struct MixedRows {
    std::size_t n = 0;
    std::size_t n_num = 0;
    std::size_t n_cat = 0;
    std::vector<double> num;
    std::vector<int> cat;
    std::vector<std::size_t> num_columns;
    std::vector<std::size_t> cat_columns;
    std::vector<std::size_t> cat_levels;

    std::span<const double> num_row(std::size_t i) const { return {num.data() + i * n_num, n_num}; }
    std::span<const int> cat_row(std::size_t i) const { return {cat.data() + i * n_cat, n_cat}; }
};

inline MixedRows mixed_rows(const Dataset& ds) {
    const auto& schema = ds.schema();
    MixedRows m;
    m.n = ds.n_rows();
    m.num_columns = schema.predictors_of(ColumnKind::Numeric);
    for (auto c : schema.predictors()) {
        if (schema.column(c).kind != ColumnKind::Numeric) {
            m.cat_columns.push_back(c);
            m.cat_levels.push_back(schema.n_levels(c));
        }
    }
    m.n_num = m.num_columns.size();
    m.n_cat = m.cat_columns.size();
    m.num.resize(m.n * m.n_num);
    m.cat.resize(m.n * m.n_cat);
    for (std::size_t j = 0; j < m.n_num; ++j) {
        auto col = ds.column(m.num_columns[j]);
        for (std::size_t i = 0; i < m.n; ++i) {
            m.num[i * m.n_num + j] = col[i];
        }
    }
    for (std::size_t j = 0; j < m.n_cat; ++j) {
        auto col = ds.column(m.cat_columns[j]);
        for (std::size_t i = 0; i < m.n; ++i) {
            m.cat[i * m.n_cat + j] = static_cast<int>(col[i]);
        }
    }
    return m;
}

struct Prototype {
    std::vector<double> numeric_means;
    std::vector<int> categorical_modes;

    bool operator==(const Prototype&) const = default;
};

struct KProtoParams {
    /// Categorical mismatch weight; `std::nullopt` selects it automatically (see `auto_gamma`).
    std::optional<double> gamma;
    std::size_t max_iter = 100;
    std::size_t n_restarts = 10;
    std::uint64_t seed = 0;
};

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Prototype> prototypes;
    std::vector<std::size_t> assignment;
    double total_cost = 0.0;
    double gamma_used = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Cost after each assignment step of the winning restart.
    std::vector<double> cost_history;
    std::size_t restart = 0;
};

/// Squared Euclidean distance over numeric attributes plus `gamma` times the number of categorical mismatches.
inline double dissimilarity(std::span<const double> num, std::span<const int> cat, const Prototype& p, double gamma) {
    if (num.size() != p.numeric_means.size() || cat.size() != p.categorical_modes.size()) {
        throw Error(ErrorCode::SchemaMismatch, "row and prototype have different attribute counts");
    }
    double d = 0.0;
    for (std::size_t j = 0; j < num.size(); ++j) {
        double diff = num[j] - p.numeric_means[j];
        d += diff * diff;
    }
    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < cat.size(); ++j) {
        mismatches += (cat[j] != p.categorical_modes[j]);
    }
    return d + gamma * static_cast<double>(mismatches);
}

/// Same measure between two observations.
inline double pair_dissimilarity(const MixedRows& m, std::size_t a, std::size_t b, double gamma) {
    double d = 0.0;
    const double* x = m.num.data() + a * m.n_num;
    const double* y = m.num.data() + b * m.n_num;
    for (std::size_t j = 0; j < m.n_num; ++j) {
        double diff = x[j] - y[j];
        d += diff * diff;
    }
    const int* u = m.cat.data() + a * m.n_cat;
    const int* v = m.cat.data() + b * m.n_cat;
    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < m.n_cat; ++j) {
        mismatches += (u[j] != v[j]);
    }
    return d + gamma * static_cast<double>(mismatches);
}

/**
 * Half the mean (population) variance of the numeric attributes. Falls back to 1 when there are no
 * numeric attributes, so categorical mismatches still count.
 */
inline double auto_gamma(const MixedRows& m) {
    if (m.n_num == 0 || m.n == 0) {
        return 1.0;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m.n_num; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) {
            mean += m.num[i * m.n_num + j];
        }
        mean /= static_cast<double>(m.n);
        double var = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) {
            double d = m.num[i * m.n_num + j] - mean;
            var += d * d;
        }
        total += var / static_cast<double>(m.n);
    }
    return 0.5 * total / static_cast<double>(m.n_num);
}

inline Prototype prototype_of_row(const MixedRows& m, std::size_t i) {
    auto num = m.num_row(i);
    auto cat = m.cat_row(i);
    return Prototype{{num.begin(), num.end()}, {cat.begin(), cat.end()}};
}

/// Nearest prototype per row; ties go to the lowest cluster index.
inline std::vector<std::size_t> assign(const MixedRows& m, std::span<const Prototype> prototypes, double gamma) {
    std::vector<std::size_t> out(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        auto num = m.num_row(i);
        auto cat = m.cat_row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < prototypes.size(); ++c) {
            double d = dissimilarity(num, cat, prototypes[c], gamma);
            if (d < best) {
                best = d;
                out[i] = c;
            }
        }
    }
    return out;
}

inline double total_cost(const MixedRows& m, std::span<const std::size_t> assignment,
                         std::span<const Prototype> prototypes, double gamma) {
    double cost = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        cost += dissimilarity(m.num_row(i), m.cat_row(i), prototypes[assignment[i]], gamma);
    }
    return cost;
}

namespace detail {

/// Means of numeric attributes and modes (lowest level on ties) of categorical attributes per cluster.
inline void update_prototypes(const MixedRows& m, std::span<const std::size_t> assignment, std::vector<Prototype>& protos) {
    const std::size_t k = protos.size();
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double> sums(k * m.n_num, 0.0);
    std::vector<std::vector<std::size_t>> counts(k * m.n_cat);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < m.n_cat; ++j) {
            counts[c * m.n_cat + j].assign(m.cat_levels[j], 0);
        }
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        auto c = assignment[i];
        ++sizes[c];
        for (std::size_t j = 0; j < m.n_num; ++j) {
            sums[c * m.n_num + j] += m.num[i * m.n_num + j];
        }
        for (std::size_t j = 0; j < m.n_cat; ++j) {
            ++counts[c * m.n_cat + j][static_cast<std::size_t>(m.cat[i * m.n_cat + j])];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < m.n_num; ++j) {
            protos[c].numeric_means[j] = sums[c * m.n_num + j] / static_cast<double>(sizes[c]);
        }
        for (std::size_t j = 0; j < m.n_cat; ++j) {
            const auto& cnt = counts[c * m.n_cat + j];
            protos[c].categorical_modes[j] =
                static_cast<int>(std::max_element(cnt.begin(), cnt.end()) - cnt.begin());
        }
    }
}

/**
 * Give every empty cluster a member: the row farthest from its current prototype among clusters
 * with more than one member becomes the empty cluster's prototype.
 */
inline void repair_empty(const MixedRows& m, std::vector<std::size_t>& assignment, std::vector<Prototype>& protos, double gamma) {
    const std::size_t k = protos.size();
    std::vector<std::size_t> sizes(k, 0);
    for (auto c : assignment) {
        ++sizes[c];
    }
    for (std::size_t e = 0; e < k; ++e) {
        if (sizes[e] != 0) {
            continue;
        }
        std::size_t far_row = m.n;
        double far = -1.0;
        for (std::size_t i = 0; i < m.n; ++i) {
            if (sizes[assignment[i]] < 2) {
                continue;
            }
            double d = dissimilarity(m.num_row(i), m.cat_row(i), protos[assignment[i]], gamma);
            if (d > far) {
                far = d;
                far_row = i;
            }
        }
        if (far_row == m.n) {
            break;
        }
        --sizes[assignment[far_row]];
        assignment[far_row] = e;
        sizes[e] = 1;
        protos[e] = prototype_of_row(m, far_row);
    }
}

}

/**
 * One Lloyd-style run from the given initial prototypes: assign to the nearest prototype, repair
 * empty clusters, recompute means/modes, and stop when the assignment no longer changes or after
 * `max_iter` assignment steps. On return the prototypes are the means/modes of the final assignment.
 */
inline ClusterModel refine(const MixedRows& m, std::vector<Prototype> protos, double gamma, std::size_t max_iter) {
    ClusterModel model;
    model.k = protos.size();
    model.gamma_used = gamma;

    std::vector<std::size_t> previous;
    for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
        auto current = assign(m, protos, gamma);
        detail::repair_empty(m, current, protos, gamma);
        model.cost_history.push_back(total_cost(m, current, protos, gamma));
        model.iterations = it + 1;
        if (current == previous) {
            model.converged = true;
            break;
        }
        previous = std::move(current);
        detail::update_prototypes(m, previous, protos);
    }
    model.assignment = std::move(previous);
    model.prototypes = std::move(protos);
    model.total_cost = total_cost(m, model.assignment, model.prototypes, gamma);
    return model;
}

/**
 * Fit K-Prototypes with `n_restarts` seeded restarts (restart r uses seed + r) and keep the lowest
 * total cost; ties go to the earlier restart. Each restart starts from k distinct rows drawn uniformly.
 */
inline ClusterModel fit(const MixedRows& m, std::size_t k, const KProtoParams& params) {
    if (m.n == 0) {
        throw Error(ErrorCode::EmptyDataset, "cannot cluster an empty dataset");
    }
    if (k < 1) {
        throw Error(ErrorCode::InvalidSpec, "k must be at least 1");
    }
    if (k > m.n) {
        throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds the " + std::to_string(m.n) + " available rows");
    }
    if (params.max_iter < 1 || params.n_restarts < 1) {
        throw Error(ErrorCode::InvalidSpec, "max_iter and n_restarts must be at least 1");
    }
    const double gamma = params.gamma.value_or(auto_gamma(m));
    if (!(gamma >= 0)) {
        throw Error(ErrorCode::InvalidSpec, "gamma must be nonnegative");
    }

    ClusterModel best;
    bool have_best = false;
    for (std::size_t r = 0; r < params.n_restarts; ++r) {
        Rng rng(params.seed + r);
        auto rows = sample_without_replacement(m.n, k, rng);
        std::vector<Prototype> init;
        init.reserve(k);
        for (auto i : rows) {
            init.push_back(prototype_of_row(m, i));
        }
        auto model = refine(m, std::move(init), gamma, params.max_iter);
        model.restart = r;
        if (!have_best || model.total_cost < best.total_cost) {
            best = std::move(model);
            have_best = true;
        }
    }
    return best;
}

inline ClusterModel fit(const Dataset& ds, std::size_t k, const KProtoParams& params) {
    return fit(mixed_rows(ds), k, params);
}

inline std::vector<std::size_t> assign(const Dataset& ds, const ClusterModel& model) {
    auto m = mixed_rows(ds);
    for (const auto& p : model.prototypes) {
        if (p.numeric_means.size() != m.n_num || p.categorical_modes.size() != m.n_cat) {
            throw Error(ErrorCode::SchemaMismatch, "model prototypes do not match the dataset's predictors");
        }
    }
    return assign(m, model.prototypes, model.gamma_used);
}

/**
 * Per-cluster summary in the units of `ds`: the mean response first, then numeric means, binary
 * proportions of 1, and the proportion of each non-reference level of every categorical column.
 */
struct CentroidTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> sizes;
};

inline CentroidTable centroid_table(const Dataset& ds, std::span<const std::size_t> assignment, std::size_t k,
                                    const ReferenceLevels& refs = {}) {
    if (assignment.size() != ds.n_rows()) {
        throw Error(ErrorCode::SchemaMismatch, "assignment length differs from the row count");
    }
    const auto& schema = ds.schema();
    struct Slot {
        std::size_t column;
        long level;
    };
    std::vector<Slot> slots{{schema.response_index(), -1}};
    CentroidTable t;
    t.column_names.push_back(schema.response_name());
    for (auto c : schema.predictors()) {
        const auto& col = schema.column(c);
        if (col.kind != ColumnKind::Categorical) {
            slots.push_back({c, -1});
            t.column_names.push_back(col.name);
            continue;
        }
        auto ref = reference_level(col, refs);
        for (std::size_t l = 0; l < col.levels.size(); ++l) {
            if (col.levels[l] != ref) {
                slots.push_back({c, static_cast<long>(l)});
                t.column_names.push_back(col.name + ":" + col.levels[l]);
            }
        }
    }

    t.sizes.assign(k, 0);
    t.rows.assign(k, std::vector<double>(slots.size(), 0.0));
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        auto c = assignment[i];
        if (c >= k) {
            throw Error(ErrorCode::SchemaMismatch, "assignment refers to cluster " + std::to_string(c));
        }
        ++t.sizes[c];
        for (std::size_t s = 0; s < slots.size(); ++s) {
            double v = ds.value(i, slots[s].column);
            t.rows[c][s] += slots[s].level < 0 ? v : (static_cast<long>(v) == slots[s].level ? 1.0 : 0.0);
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (auto& v : t.rows[c]) {
            v = t.sizes[c] ? v / static_cast<double>(t.sizes[c]) : 0.0;
        }
    }
    return t;
}

}

#endif
