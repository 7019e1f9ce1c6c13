#ifndef SUBGROUP_METRICS_HPP
#define SUBGROUP_METRICS_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"

namespace subgroup {

/**
 * Area under the ROC curve as the Mann-Whitney statistic: the probability that a random positive
 * scores above a random negative, ties counting one half. Computed from midranks in O(n log n).
 */
inline double auc_roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::SchemaMismatch, "scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the midrank keeps the sums in integers.
    double rank_sum_pos2 = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double twice_midrank = static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                rank_sum_pos2 += twice_midrank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw Error(ErrorCode::SingleClass, "AUC needs both labels");
    }
    const double np = static_cast<double>(n_pos);
    const double u2 = rank_sum_pos2 - np * (np + 1.0);
    return u2 / (2.0 * np * static_cast<double>(n_neg));
}

inline double accuracy(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size() || labels.empty()) {
        throw Error(ErrorCode::SchemaMismatch, "prediction and label vectors must be non-empty and equal in length");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        hits += (predicted[i] == labels[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}

#endif
