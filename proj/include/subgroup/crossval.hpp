#ifndef SUBGROUP_CROSSVAL_HPP
#define SUBGROUP_CROSSVAL_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "classifiers.hpp"
#include "data.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "random.hpp"

namespace subgroup {

struct RepResult {
    double accuracy = 0.0;
    double auc = 0.0;
    bool excluded = false;
    std::string note;
};

struct EvalResult {
    std::vector<RepResult> per_rep;
    double mean_accuracy = 0.0;
    double mean_auc = 0.0;
    std::size_t n_reps = 0;
    std::size_t n_excluded = 0;
};

/// Row indices of one repetition: the excised tenth is discarded, the rest split 80:20.
struct RepSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> excised;
};

inline RepSplit split_repetition(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_excise = n / 10;
    const std::size_t remaining = n - n_excise;
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(remaining)));
    RepSplit s;
    s.excised.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_excise));
    s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_excise),
                   perm.begin() + static_cast<std::ptrdiff_t>(n_excise + n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_excise + n_train), perm.end());
    return s;
}

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows,
                                 const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                x(static_cast<Eigen::Index>(rows[i]), cols[j]);
        }
    }
    return out;
}

}

/**
 * Repeated holdout over a design matrix. `trainer(x_train, y_train, rep_seed)` must return an
 * object whose `predict(x_test)` yields a Prediction. Columns constant on the training rows are
 * removed for that repetition, since they carry no information and make LR and LDA singular.
 * A repetition whose test rows lack a class (or whose training fails) is flagged and left out of the means.
 */
template <typename Trainer>
EvalResult crossval_with(const DesignMatrix& dm, Trainer&& trainer, std::size_t n_reps, std::uint64_t seed) {
    if (n_reps < 1) {
        throw Error(ErrorCode::InvalidSpec, "n_reps must be at least 1");
    }
    const auto n = dm.n_rows();
    if (n < 10) {
        throw Error(ErrorCode::TooFewRows, "cross-validation needs at least 10 rows");
    }
    EvalResult out;
    out.n_reps = n_reps;
    double acc_sum = 0.0;
    double auc_sum = 0.0;
    for (std::size_t r = 0; r < n_reps; ++r) {
        const auto split = split_repetition(n, derive_seed(seed, {r, 0}));
        RepResult rep;

        std::vector<int> y_train, y_test;
        for (auto i : split.train) y_train.push_back(dm.response[i]);
        for (auto i : split.test) y_test.push_back(dm.response[i]);
        const auto [t0, t1] = detail::count_classes(y_test);

        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < dm.x.cols(); ++j) {
            const double first = dm.x(static_cast<Eigen::Index>(split.train.front()), j);
            for (auto i : split.train) {
                if (dm.x(static_cast<Eigen::Index>(i), j) != first) {
                    cols.push_back(j);
                    break;
                }
            }
        }

        if (t0 == 0 || t1 == 0) {
            rep.excluded = true;
            rep.note = "TooFewRows: test split lacks one class";
        } else {
            try {
                const auto model = trainer(detail::take_rows(dm.x, split.train, cols),
                                           std::span<const int>(y_train), derive_seed(seed, {r, 1}));
                const Prediction p = model.predict(detail::take_rows(dm.x, split.test, cols));
                rep.accuracy = accuracy(p.labels, y_test);
                rep.auc = auc_roc(p.scores, y_test);
            } catch (const Error& e) {
                rep.excluded = true;
                rep.note = std::string(to_string(e.code())) + ": " + e.what();
            }
        }
        if (rep.excluded) {
            ++out.n_excluded;
        } else {
            acc_sum += rep.accuracy;
            auc_sum += rep.auc;
        }
        out.per_rep.push_back(std::move(rep));
    }
    if (out.n_excluded == n_reps) {
        throw Error(ErrorCode::TooFewRows, "every repetition was excluded: " + out.per_rep.front().note);
    }
    const auto used = static_cast<double>(n_reps - out.n_excluded);
    out.mean_accuracy = acc_sum / used;
    out.mean_auc = auc_sum / used;
    return out;
}

/// Evaluate one classifier spec on `ds` (expected to be undersampled already).
inline EvalResult crossval(const Dataset& ds, const ClassifierSpec& spec, std::size_t n_reps, std::uint64_t seed,
                           const ReferenceLevels& refs = {}) {
    const auto dm = one_hot(ds, refs);
    auto trainer = [&spec](const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t rep_seed) {
        ClassifierSpec s = spec;
        s.seed = derive_seed(spec.seed, {rep_seed});
        return TrainedClassifier(s, x, y);
    };
    return crossval_with(dm, trainer, n_reps, seed);
}

}

#endif
