#ifndef SUBGROUP_SELECTION_HPP
#define SUBGROUP_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "kproto.hpp"
#include "random.hpp"

/**
 * @file selection.hpp
 * @brief McClain-Rao validity index and the subsample-median rule for choosing the number of clusters.
 */

namespace subgroup {

/**
 * McClain-Rao index: mean dissimilarity over same-cluster pairs divided by the mean over
 * different-cluster pairs (lower is better). Uses the K-Prototypes measure between observations.
 *
 * Pair sums are computed in O(n) from per-cluster statistics rather than by enumerating pairs:
 * for the numeric part, sum_{i<j in C} |x_i - x_j|^2 = |C| * sum_{i in C} |x_i - mean_C|^2;
 * for each categorical attribute, mismatching pairs = C(|C|, 2) - sum_level C(count_level, 2).
 * Between-cluster sums are the all-rows totals minus the within-cluster sums.
 */
inline double mcclain_rao(const MixedRows& m, std::span<const std::size_t> assignment, double gamma) {
    if (assignment.size() != m.n) {
        throw Error(ErrorCode::SchemaMismatch, "assignment length differs from the row count");
    }
    std::size_t k = 0;
    for (auto c : assignment) {
        k = std::max(k, c + 1);
    }
    std::vector<std::size_t> sizes(k, 0);
    for (auto c : assignment) {
        ++sizes[c];
    }
    const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (nonempty < 2) {
        throw Error(ErrorCode::SingleCluster, "the index needs at least two clusters");
    }

    auto pairs = [](double s) { return s * (s - 1.0) / 2.0; };
    double n_within = 0.0;
    for (auto s : sizes) {
        n_within += pairs(static_cast<double>(s));
    }
    if (n_within == 0.0) {
        throw Error(ErrorCode::NoWithinPairs, "every cluster is a singleton");
    }
    const double n_between = pairs(static_cast<double>(m.n)) - n_within;

    // Numeric: two-pass centered sums per cluster and overall.
    std::vector<double> means((k + 1) * m.n_num, 0.0);
    double* all_mean = means.data() + k * m.n_num;
    for (std::size_t i = 0; i < m.n; ++i) {
        auto c = assignment[i];
        for (std::size_t j = 0; j < m.n_num; ++j) {
            double v = m.num[i * m.n_num + j];
            means[c * m.n_num + j] += v;
            all_mean[j] += v;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < m.n_num; ++j) {
            if (sizes[c]) {
                means[c * m.n_num + j] /= static_cast<double>(sizes[c]);
            }
        }
    }
    for (std::size_t j = 0; j < m.n_num; ++j) {
        all_mean[j] /= static_cast<double>(m.n);
    }
    std::vector<double> scatter(k, 0.0);
    double all_scatter = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        auto c = assignment[i];
        for (std::size_t j = 0; j < m.n_num; ++j) {
            double v = m.num[i * m.n_num + j];
            double dc = v - means[c * m.n_num + j];
            double da = v - all_mean[j];
            scatter[c] += dc * dc;
            all_scatter += da * da;
        }
    }
    double within_num = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        within_num += static_cast<double>(sizes[c]) * scatter[c];
    }
    const double total_num = static_cast<double>(m.n) * all_scatter;

    // Categorical: mismatching pair counts from level frequencies (exact integers).
    std::uint64_t within_mis = 0;
    std::uint64_t total_mis = 0;
    auto ipairs = [](std::uint64_t s) { return s * (s - (s > 0 ? 1 : 0)) / 2; };
    for (std::size_t j = 0; j < m.n_cat; ++j) {
        const std::size_t levels = m.cat_levels[j];
        std::vector<std::uint64_t> counts(k * levels, 0);
        std::vector<std::uint64_t> all(levels, 0);
        for (std::size_t i = 0; i < m.n; ++i) {
            auto l = static_cast<std::size_t>(m.cat[i * m.n_cat + j]);
            ++counts[assignment[i] * levels + l];
            ++all[l];
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::uint64_t same = 0;
            for (std::size_t l = 0; l < levels; ++l) {
                same += ipairs(counts[c * levels + l]);
            }
            within_mis += ipairs(sizes[c]) - same;
        }
        std::uint64_t same = 0;
        for (auto a : all) {
            same += ipairs(a);
        }
        total_mis += ipairs(m.n) - same;
    }

    const double within = within_num + gamma * static_cast<double>(within_mis);
    const double between = (total_num - within_num) + gamma * static_cast<double>(total_mis - within_mis);
    return (within / n_within) / (between / n_between);
}

inline double mcclain_rao(const Dataset& ds, std::span<const std::size_t> assignment, double gamma) {
    return mcclain_rao(mixed_rows(ds), assignment, gamma);
}

struct SelectionParams {
    std::size_t k_min = 2;
    std::size_t k_max = 10;
    std::size_t n_samples = 7;
    /// Rows per subsample; defaults to min(n_rows, 1000).
    std::optional<std::size_t> sample_size;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
};

struct TraceEntry {
    std::size_t k = 0;
    std::vector<double> sample_indices;
    double median_index = 0.0;
    /// median(k) - median(k - 1); absent at k_min.
    std::optional<double> delta;
};

struct IndexTrace {
    std::vector<TraceEntry> entries;
    std::size_t chosen_k = 0;
    std::optional<std::size_t> stop_k;
    double gamma_used = 0.0;
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/**
 * Choose the number of clusters by the subsample-median McClain-Rao rule.
 *
 * For k = k_min, k_min + 1, ...: draw `n_samples` simple random subsamples, fit K-Prototypes on
 * each, score it with the index and take the median. The scan stops after the first k whose change
 * in median |delta(k)| is below `epsilon` (or at k_max). The chosen k is the one with the most
 * negative delta among those evaluated, ties to the smaller k; k_min itself has no delta.
 *
 * Subsample (k, s) draws rows from stream derive_seed(seed, {k, s, 0}) and clusters with base seed
 * derive_seed(seed, {k, s, 1}), so the trace does not depend on evaluation order. An automatic
 * gamma is resolved once on the full dataset and shared by every fit and index evaluation.
 */
inline IndexTrace select_k(const MixedRows& m, const SelectionParams& sel, const KProtoParams& kp) {
    if (sel.k_min < 2 || sel.k_max < sel.k_min || sel.n_samples < 5 || sel.n_samples > 10 || !(sel.epsilon > 0)) {
        throw Error(ErrorCode::InvalidSpec, "selection parameters need 2 <= k_min <= k_max, n_samples in [5, 10], epsilon > 0");
    }
    const std::size_t sample_size = sel.sample_size.value_or(std::min<std::size_t>(m.n, 1000));
    if (sample_size < sel.k_max + 1 || sample_size > m.n) {
        throw Error(ErrorCode::InsufficientRows, "sample size " + std::to_string(sample_size) + " must lie in [k_max + 1, n_rows = " +
                                                     std::to_string(m.n) + "]");
    }

    IndexTrace trace;
    trace.gamma_used = kp.gamma.value_or(auto_gamma(m));
    KProtoParams fit_params = kp;
    fit_params.gamma = trace.gamma_used;

    for (std::size_t k = sel.k_min; k <= sel.k_max; ++k) {
        TraceEntry entry;
        entry.k = k;
        for (std::size_t s = 0; s < sel.n_samples; ++s) {
            Rng rng(derive_seed(sel.seed, {k, s, 0}));
            auto rows = sample_without_replacement(m.n, sample_size, rng);
            std::sort(rows.begin(), rows.end());
            MixedRows sub;
            sub.n = rows.size();
            sub.n_num = m.n_num;
            sub.n_cat = m.n_cat;
            sub.num_columns = m.num_columns;
            sub.cat_columns = m.cat_columns;
            sub.cat_levels = m.cat_levels;
            sub.num.reserve(sub.n * sub.n_num);
            sub.cat.reserve(sub.n * sub.n_cat);
            for (auto r : rows) {
                auto nr = m.num_row(r);
                auto cr = m.cat_row(r);
                sub.num.insert(sub.num.end(), nr.begin(), nr.end());
                sub.cat.insert(sub.cat.end(), cr.begin(), cr.end());
            }
            fit_params.seed = derive_seed(sel.seed, {k, s, 1});
            auto model = fit(sub, k, fit_params);
            entry.sample_indices.push_back(mcclain_rao(sub, model.assignment, trace.gamma_used));
        }
        entry.median_index = median(entry.sample_indices);
        if (!trace.entries.empty()) {
            entry.delta = entry.median_index - trace.entries.back().median_index;
        }
        trace.entries.push_back(entry);
        if (entry.delta && std::abs(*entry.delta) < sel.epsilon) {
            trace.stop_k = k;
            break;
        }
    }

    trace.chosen_k = trace.entries.front().k;
    std::optional<double> best;
    for (const auto& e : trace.entries) {
        if (e.delta && (!best || *e.delta < *best)) {
            best = e.delta;
            trace.chosen_k = e.k;
        }
    }
    return trace;
}

inline IndexTrace select_k(const Dataset& ds, const SelectionParams& sel, const KProtoParams& kp) {
    return select_k(mixed_rows(ds), sel, kp);
}

}

#endif
