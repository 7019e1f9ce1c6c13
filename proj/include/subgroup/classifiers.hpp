#ifndef SUBGROUP_CLASSIFIERS_HPP
#define SUBGROUP_CLASSIFIERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "logistic.hpp"
#include "random.hpp"

/**
 * @file classifiers.hpp
 * @brief The comparison classifiers: LDA, random forest and linear SVM, plus a common dispatch.
 */

namespace subgroup {

namespace detail {

inline std::pair<std::size_t, std::size_t> count_classes(std::span<const int> y) {
    std::size_t n1 = 0;
    for (int v : y) n1 += (v == 1);
    return {y.size() - n1, n1};
}

}

// ---------------------------------------------------------------------------------------------
// Linear discriminant analysis

/**
 * Two-class LDA with a pooled covariance. `score(x) = w'x + b` is the log posterior odds of
 * class 1 under the shared-covariance Gaussian model, so the class is 1 exactly when the score is positive.
 */
struct LdaModel {
    Eigen::VectorXd weights;
    double bias = 0.0;

    Eigen::VectorXd score(const Eigen::MatrixXd& x) const {
        return (x * weights).array() + bias;
    }
};

inline LdaModel fit_lda(const Eigen::MatrixXd& x, std::span<const int> y) {
    auto [n0, n1] = detail::count_classes(y);
    if (n0 < 2 || n1 < 2) {
        throw Error(ErrorCode::TooFewRows, "LDA needs at least two rows of each class");
    }
    const auto d = x.cols();
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        (y[static_cast<std::size_t>(i)] == 1 ? mu1 : mu0) += x.row(i).transpose();
    }
    mu0 /= static_cast<double>(n0);
    mu1 /= static_cast<double>(n1);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd r = x.row(i).transpose() - (y[static_cast<std::size_t>(i)] == 1 ? mu1 : mu0);
        scatter.noalias() += r * r.transpose();
    }
    const Eigen::MatrixXd pooled = scatter / static_cast<double>(x.rows() - 2);

    const Eigen::VectorXd diag = pooled.diagonal();
    if ((diag.array() <= 0).any()) {
        throw Error(ErrorCode::SingularCovariance, "a feature has zero pooled variance");
    }
    const Eigen::VectorXd s = diag.cwiseSqrt().cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(s.asDiagonal() * pooled * s.asDiagonal());
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
        throw Error(ErrorCode::SingularCovariance, "pooled covariance is not invertible");
    }
    LdaModel model;
    model.weights = s.asDiagonal() * llt.solve(s.asDiagonal() * (mu1 - mu0));
    model.bias = -0.5 * model.weights.dot(mu0 + mu1) +
                 std::log(static_cast<double>(n1) / static_cast<double>(n0));
    return model;
}

// ---------------------------------------------------------------------------------------------
// Random forest

struct ForestParams {
    std::size_t n_trees = 100;
    /// Features tried per split; defaults to round(sqrt(d)).
    std::optional<std::size_t> mtry;
    std::size_t min_split = 2;
    std::optional<std::size_t> max_depth;
    bool bootstrap = true;
};

/// CART classification tree grown on the Gini criterion. Leaves store the fraction of class 1.
class DecisionTree {
public:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double prob = 0.0;
    };

    void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::vector<std::size_t> rows, std::size_t mtry,
             const ForestParams& params, Rng& rng) {
        nodes_.clear();
        grow(x, y, rows, 0, mtry, params, rng);
    }

    double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        int at = 0;
        while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& nd = nodes_[static_cast<std::size_t>(at)];
            at = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(at)].prob;
    }

    std::size_t size() const { return nodes_.size(); }

private:
    int grow(const Eigen::MatrixXd& x, std::span<const int> y, std::vector<std::size_t>& rows, std::size_t depth,
             std::size_t mtry, const ForestParams& params, Rng& rng) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::size_t ones = 0;
        for (auto r : rows) ones += (y[r] == 1);
        const std::size_t n = rows.size();
        nodes_.back().prob = n ? static_cast<double>(ones) / static_cast<double>(n) : 0.0;

        const bool pure = ones == 0 || ones == n;
        if (pure || n < params.min_split || (params.max_depth && depth >= *params.max_depth)) {
            return id;
        }

        // Features are visited in a random order until `mtry` of them have taken more than one value
        // at this node; constant ones do not count against the budget.
        const auto d = static_cast<std::size_t>(x.cols());
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t tried = 0;

        // Gini impurity of a split, weighted by child sizes: n_l g_l + n_r g_r, minimized.
        double best_cost = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> sorted(n);
        for (std::size_t v = 0; v < d && tried < mtry; ++v) {
            std::uniform_int_distribution<std::size_t> pick(v, d - 1);
            std::swap(order[v], order[pick(rng)]);
            const auto f = order[v];
            for (std::size_t i = 0; i < n; ++i) {
                sorted[i] = {x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y[rows[i]]};
            }
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) {
                continue;
            }
            ++tried;
            std::size_t left_n = 0;
            std::size_t left_ones = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left_n;
                left_ones += (sorted[i].second == 1);
                if (sorted[i].first == sorted[i + 1].first) {
                    continue;
                }
                const double ln = static_cast<double>(left_n);
                const double rn = static_cast<double>(n - left_n);
                const double lp = static_cast<double>(left_ones) / ln;
                const double rp = static_cast<double>(ones - left_ones) / rn;
                const double cost = ln * 2.0 * lp * (1.0 - lp) + rn * 2.0 * rp * (1.0 - rp);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        nodes_[static_cast<std::size_t>(id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int l = grow(x, y, left, depth + 1, mtry, params, rng);
        nodes_[static_cast<std::size_t>(id)].left = l;
        const int r = grow(x, y, right, depth + 1, mtry, params, rng);
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::vector<Node> nodes_;
};

/**
 * Bagged CART trees with per-split feature subsampling. Tree t draws its bootstrap sample and
 * feature subsets from stream derive_seed(seed, {t}); the forest probability is the mean leaf fraction.
 */
class RandomForest {
public:
    void fit(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& params, std::uint64_t seed) {
        if (x.rows() < 1) {
            throw Error(ErrorCode::EmptyDataset, "random forest needs at least one row");
        }
        if (params.n_trees < 1 || params.min_split < 1 || (params.mtry && *params.mtry < 1)) {
            throw Error(ErrorCode::InvalidSpec, "forest hyperparameters must be positive");
        }
        const auto n = static_cast<std::size_t>(x.rows());
        const auto d = static_cast<std::size_t>(x.cols());
        const std::size_t mtry = params.mtry.value_or(
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))))));
        trees_.assign(params.n_trees, DecisionTree{});
        for (std::size_t t = 0; t < params.n_trees; ++t) {
            Rng rng(derive_seed(seed, {t}));
            std::vector<std::size_t> rows(n);
            if (params.bootstrap) {
                std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                for (auto& r : rows) r = pick(rng);
            } else {
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
            trees_[t].fit(x, y, std::move(rows), mtry, params, rng);
        }
    }

    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            for (const auto& t : trees_) {
                s += t.predict_proba(x.row(i));
            }
            out(i) = s / static_cast<double>(trees_.size());
        }
        return out;
    }

    std::size_t n_trees() const { return trees_.size(); }

private:
    std::vector<DecisionTree> trees_;
};

// ---------------------------------------------------------------------------------------------
// Linear SVM

struct SvmParams {
    double c = 1.0;
    std::size_t epochs = 50;
};

/**
 * L2-regularized hinge loss, J(w, b) = lambda / 2 |(w, b)|^2 + mean_i max(0, 1 - y_i (w'x_i + b)) with
 * lambda = 1 / (C n) and labels in {-1, +1}. The bias is folded in as a constant feature.
 */
struct LinearSvm {
    Eigen::VectorXd weights;
    double bias = 0.0;
    /// Objective of the returned iterate after each epoch.
    std::vector<double> objective_history;

    Eigen::VectorXd margin(const Eigen::MatrixXd& x) const {
        return (x * weights).array() + bias;
    }
};

inline double svm_objective(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& w, double b,
                            double lambda) {
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double yi = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - yi * (x.row(i).dot(w) + b));
    }
    return 0.5 * lambda * (w.squaredNorm() + b * b) + hinge / static_cast<double>(x.rows());
}

/**
 * Stochastic subgradient descent (Pegasos step size 1 / (lambda t) with projection onto the
 * ball of radius 1 / sqrt(lambda)). Each epoch is one pass in a seeded random order. Subgradient
 * steps do not decrease J monotonically, so the best iterate seen at an epoch boundary is kept and
 * returned.
 */
inline LinearSvm fit_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmParams& params,
                                std::uint64_t seed) {
    if (x.rows() < 1) {
        throw Error(ErrorCode::EmptyDataset, "SVM needs at least one row");
    }
    if (!(params.c > 0) || params.epochs < 1) {
        throw Error(ErrorCode::InvalidSpec, "SVM hyperparameters must be positive");
    }
    auto [n0, n1] = detail::count_classes(y);
    if (n0 == 0 || n1 == 0) {
        throw Error(ErrorCode::SingleClass, "SVM needs both classes");
    }
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = x.cols();
    const double lambda = 1.0 / (params.c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    LinearSvm best{w, b, {}};
    double best_obj = svm_objective(x, y, w, b, lambda);

    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t t = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double yi = y[i] == 1 ? 1.0 : -1.0;
            const double m = yi * (x.row(static_cast<Eigen::Index>(i)).dot(w) + b);
            w *= (1.0 - eta * lambda);
            b *= (1.0 - eta * lambda);
            if (m < 1.0) {
                w += (eta * yi) * x.row(static_cast<Eigen::Index>(i)).transpose();
                b += eta * yi;
            }
            const double norm = std::sqrt(w.squaredNorm() + b * b);
            if (norm > radius) {
                w *= radius / norm;
                b *= radius / norm;
            }
        }
        const double obj = svm_objective(x, y, w, b, lambda);
        if (obj < best_obj) {
            best_obj = obj;
            best.weights = w;
            best.bias = b;
        }
        best.objective_history.push_back(best_obj);
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// Common dispatch

enum class ClassifierKind { LR, LDA, RF, SVM };

inline const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::LR: return "LR";
        case ClassifierKind::LDA: return "LDA";
        case ClassifierKind::RF: return "RF";
        case ClassifierKind::SVM: return "SVM";
    }
    return "?";
}

inline ClassifierKind parse_classifier_kind(const std::string& s) {
    if (s == "LR") return ClassifierKind::LR;
    if (s == "LDA") return ClassifierKind::LDA;
    if (s == "RF") return ClassifierKind::RF;
    if (s == "SVM") return ClassifierKind::SVM;
    throw Error(ErrorCode::InvalidConfig, "unknown classifier kind '" + s + "' (expected LR, LDA, RF or SVM)");
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::LR;
    ForestParams forest;
    SvmParams svm;
    std::uint64_t seed = 0;
};

/// Ranking scores plus hard labels for a batch of rows.
struct Prediction {
    std::vector<double> scores;
    std::vector<int> labels;
};

/**
 * A fitted comparison model. Labels use probability > 0.5 for LR and RF, and a positive
 * score/margin for LDA and SVM (equivalent to posterior > 0.5 for LDA).
 */
class TrainedClassifier {
public:
    TrainedClassifier(const ClassifierSpec& spec, const Eigen::MatrixXd& x, std::span<const int> y) {
        switch (spec.kind) {
            case ClassifierKind::LR: {
                DesignMatrix dm;
                dm.x = x;
                dm.response.assign(y.begin(), y.end());
                model_ = fit_logistic(dm).coefficients;
                break;
            }
            case ClassifierKind::LDA:
                model_ = fit_lda(x, y);
                break;
            case ClassifierKind::RF: {
                RandomForest rf;
                rf.fit(x, y, spec.forest, spec.seed);
                model_ = std::move(rf);
                break;
            }
            case ClassifierKind::SVM:
                model_ = fit_linear_svm(x, y, spec.svm, spec.seed);
                break;
        }
    }

    Prediction predict(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd s;
        double cut = 0.0;
        if (auto* beta = std::get_if<Eigen::VectorXd>(&model_)) {
            s = logistic_predict(x, *beta);
            cut = 0.5;
        } else if (auto* lda = std::get_if<LdaModel>(&model_)) {
            s = lda->score(x);
        } else if (auto* rf = std::get_if<RandomForest>(&model_)) {
            s = rf->predict_proba(x);
            cut = 0.5;
        } else {
            s = std::get<LinearSvm>(model_).margin(x);
        }
        Prediction p;
        p.scores.assign(s.data(), s.data() + s.size());
        for (double v : p.scores) {
            p.labels.push_back(v > cut ? 1 : 0);
        }
        return p;
    }

private:
    std::variant<Eigen::VectorXd, LdaModel, RandomForest, LinearSvm> model_;
};

}

#endif
