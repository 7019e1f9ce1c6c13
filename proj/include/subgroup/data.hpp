#ifndef SUBGROUP_DATA_HPP
#define SUBGROUP_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "random.hpp"

/**
 * @file data.hpp
 * @brief Typed mixed-type tables and the preprocessing operations applied to them.
 */

namespace subgroup {

enum class ColumnKind { Numeric, Binary, Categorical };

inline const char* to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Numeric: return "numeric";
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Categorical: return "categorical";
    }
    return "unknown";
}

/**
 * One column declaration.
 *
 * For `Categorical`, `levels` holds the ordered level names (at least two).
 * For `Binary`, `levels` is either empty (cells are literally 0/1) or holds exactly two
 * labels mapped to 0 and 1 in that order, e.g. `{"Female", "Male"}`.
 */
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<std::string> levels;
};

/// Level name -> chosen reference level, per categorical column. Missing entries default to the first level.
using ReferenceLevels = std::map<std::string, std::string>;

class Schema {
public:
    Schema() = default;

    Schema(std::vector<Column> columns, std::string response)
        : columns_(std::move(columns)), response_(std::move(response)) {
        std::unordered_set<std::string> seen;
        for (const auto& c : columns_) {
            if (c.name.empty()) {
                throw Error(ErrorCode::InvalidSchema, "column with empty name");
            }
            if (!seen.insert(c.name).second) {
                throw Error(ErrorCode::InvalidSchema, "duplicate column name '" + c.name + "'");
            }
            if (c.kind == ColumnKind::Categorical) {
                std::unordered_set<std::string> lv(c.levels.begin(), c.levels.end());
                if (c.levels.size() < 2 || lv.size() != c.levels.size()) {
                    throw Error(ErrorCode::InvalidSchema, "categorical column '" + c.name + "' needs >= 2 distinct levels");
                }
            } else if (c.kind == ColumnKind::Binary) {
                if (!c.levels.empty() && (c.levels.size() != 2 || c.levels[0] == c.levels[1])) {
                    throw Error(ErrorCode::InvalidSchema, "binary column '" + c.name + "' labels must be exactly two distinct names");
                }
            } else if (!c.levels.empty()) {
                throw Error(ErrorCode::InvalidSchema, "numeric column '" + c.name + "' cannot declare levels");
            }
        }
        auto r = index_of(response_);
        if (!r) {
            throw Error(ErrorCode::InvalidSchema, "response column '" + response_ + "' not declared");
        }
        if (columns_[*r].kind != ColumnKind::Binary) {
            throw Error(ErrorCode::InvalidSchema, "response column '" + response_ + "' must be binary");
        }
        response_index_ = *r;
    }

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::size_t i) const { return columns_[i]; }
    std::size_t size() const { return columns_.size(); }
    const std::string& response_name() const { return response_; }
    std::size_t response_index() const { return response_index_; }

    std::optional<std::size_t> index_of(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    /// Column indices of all predictors (every column except the response), in declaration order.
    std::vector<std::size_t> predictors() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i != response_index_) {
                out.push_back(i);
            }
        }
        return out;
    }

    std::vector<std::size_t> predictors_of(ColumnKind kind) const {
        std::vector<std::size_t> out;
        for (auto i : predictors()) {
            if (columns_[i].kind == kind) {
                out.push_back(i);
            }
        }
        return out;
    }

    /// Number of distinct values a categorical-like column can take (2 for binary).
    std::size_t n_levels(std::size_t i) const {
        const auto& c = columns_[i];
        return c.kind == ColumnKind::Categorical ? c.levels.size() : 2;
    }

    bool operator==(const Schema& other) const {
        if (response_ != other.response_ || columns_.size() != other.columns_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            const auto& a = columns_[i];
            const auto& b = other.columns_[i];
            if (a.name != b.name || a.kind != b.kind || a.levels != b.levels) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<Column> columns_;
    std::string response_;
    std::size_t response_index_ = 0;
};

/**
 * Column-major table. Numeric cells are reals, binary cells 0/1 and categorical cells
 * level indices, all stored as `double`. There are no missing cells.
 */
class Dataset {
public:
    Dataset() = default;

    Dataset(Schema schema, std::vector<std::vector<double>> columns)
        : schema_(std::move(schema)), cells_(std::move(columns)) {
        if (cells_.size() != schema_.size()) {
            throw Error(ErrorCode::SchemaMismatch, "column count does not match schema");
        }
        n_rows_ = cells_.empty() ? 0 : cells_.front().size();
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const auto& col = schema_.column(c);
            if (cells_[c].size() != n_rows_) {
                throw Error(ErrorCode::SchemaMismatch, "ragged column '" + col.name + "'");
            }
            for (double v : cells_[c]) {
                if (!std::isfinite(v)) {
                    throw Error(ErrorCode::ParseError, "non-finite value in column '" + col.name + "'");
                }
                if (col.kind == ColumnKind::Binary && v != 0.0 && v != 1.0) {
                    throw Error(ErrorCode::ParseError, "binary column '" + col.name + "' holds a value other than 0/1");
                }
                if (col.kind == ColumnKind::Categorical &&
                    (v < 0 || v != std::floor(v) || v >= static_cast<double>(col.levels.size()))) {
                    throw Error(ErrorCode::UnknownCategoryLevel, "categorical column '" + col.name + "' holds an invalid level index");
                }
            }
        }
    }

    const Schema& schema() const { return schema_; }
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return cells_.size(); }

    std::span<const double> column(std::size_t c) const { return cells_[c]; }
    double value(std::size_t row, std::size_t col) const { return cells_[col][row]; }
    std::size_t level(std::size_t row, std::size_t col) const { return static_cast<std::size_t>(cells_[col][row]); }

    std::vector<int> response() const {
        const auto& col = cells_[schema_.response_index()];
        std::vector<int> out(col.size());
        std::transform(col.begin(), col.end(), out.begin(), [](double v) { return static_cast<int>(v); });
        return out;
    }

    /// Rows in the given order (duplicates allowed).
    Dataset select_rows(std::span<const std::size_t> rows) const {
        std::vector<std::vector<double>> cols(cells_.size());
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            cols[c].reserve(rows.size());
            for (auto r : rows) {
                cols[c].push_back(cells_[c][r]);
            }
        }
        Dataset out;
        out.schema_ = schema_;
        out.cells_ = std::move(cols);
        out.n_rows_ = rows.size();
        return out;
    }

    Dataset with_column(std::size_t c, std::vector<double> values) const {
        auto cols = cells_;
        cols[c] = std::move(values);
        return Dataset(schema_, std::move(cols));
    }

    bool operator==(const Dataset& other) const {
        return schema_ == other.schema_ && cells_ == other.cells_;
    }

private:
    Schema schema_;
    std::size_t n_rows_ = 0;
    std::vector<std::vector<double>> cells_;
};

struct ColumnScale {
    std::string column;
    double divisor = 1.0;
    /// The column was identically zero; it was left as-is with divisor 1.
    bool zero_column = false;
};

struct PreprocessReport {
    std::size_t rows_dropped_missing = 0;
    std::vector<ColumnScale> normalization;
    std::size_t rows_removed_undersampling = 0;
    std::size_t class_count_0 = 0;
    std::size_t class_count_1 = 0;
};

struct Normalized {
    Dataset data;
    std::vector<ColumnScale> scales;
};

/**
 * Divide every numeric column by its maximum so values land in [0, 1].
 * Binary and categorical columns are untouched. An all-zero column keeps divisor 1
 * and is flagged in the returned scale rather than rejected.
 */
inline Normalized normalize_numeric(const Dataset& ds) {
    Normalized out{ds, {}};
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        const auto& col = ds.schema().column(c);
        if (col.kind != ColumnKind::Numeric) {
            continue;
        }
        auto values = ds.column(c);
        double mx = 0.0;
        for (double v : values) {
            if (v < 0) {
                throw Error(ErrorCode::NegativeValue, "numeric column '" + col.name + "' has a negative value");
            }
            mx = std::max(mx, v);
        }
        ColumnScale scale{col.name, 1.0, false};
        if (mx == 0.0) {
            scale.zero_column = true;
        } else if (mx != 1.0) {
            scale.divisor = mx;
            std::vector<double> scaled(values.begin(), values.end());
            for (auto& v : scaled) {
                v /= mx;
            }
            out.data = out.data.with_column(c, std::move(scaled));
        }
        out.scales.push_back(std::move(scale));
    }
    return out;
}

inline std::pair<std::size_t, std::size_t> class_counts(const Dataset& ds) {
    std::size_t n1 = 0;
    for (double v : ds.column(ds.schema().response_index())) {
        n1 += (v == 1.0);
    }
    return {ds.n_rows() - n1, n1};
}

/**
 * Remove majority-class rows uniformly at random until the majority share is at most 55%.
 * Keeps the largest majority count m with m / (m + minority) <= 0.55, i.e. m <= 11 * minority / 9.
 * Surviving rows keep their original relative order.
 */
inline Dataset undersample(const Dataset& ds, std::uint64_t seed) {
    auto [n0, n1] = class_counts(ds);
    if (n0 == 0 || n1 == 0) {
        throw Error(ErrorCode::SingleClass, "undersampling needs both response classes");
    }
    const int majority = n1 > n0 ? 1 : 0;
    const std::size_t n_min = std::min(n0, n1);
    const std::size_t n_maj = std::max(n0, n1);
    const std::size_t keep = (11 * n_min) / 9;
    if (n_maj <= keep) {
        return ds;
    }

    std::vector<std::size_t> maj_rows;
    std::vector<std::size_t> rows;
    auto resp = ds.column(ds.schema().response_index());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        if (static_cast<int>(resp[r]) == majority) {
            maj_rows.push_back(r);
        } else {
            rows.push_back(r);
        }
    }
    Rng rng(seed);
    auto picks = sample_without_replacement(maj_rows.size(), keep, rng);
    for (auto p : picks) {
        rows.push_back(maj_rows[p]);
    }
    std::sort(rows.begin(), rows.end());
    return ds.select_rows(rows);
}

/**
 * Dense predictor matrix for the supervised models. Categorical columns are expanded to
 * indicator columns named "<col>:<level>" with the reference level omitted.
 */
struct DesignMatrix {
    std::vector<std::string> column_names;
    Eigen::MatrixXd x;
    std::vector<int> response;

    std::size_t n_rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t n_cols() const { return static_cast<std::size_t>(x.cols()); }
};

inline std::string reference_level(const Column& col, const ReferenceLevels& refs) {
    auto it = refs.find(col.name);
    if (it == refs.end()) {
        return col.levels.front();
    }
    if (std::find(col.levels.begin(), col.levels.end(), it->second) == col.levels.end()) {
        throw Error(ErrorCode::UnknownReferenceLevel,
                    "reference level '" + it->second + "' not in column '" + col.name + "'");
    }
    return it->second;
}

inline DesignMatrix one_hot(const Dataset& ds, const ReferenceLevels& refs = {}) {
    const auto& schema = ds.schema();
    for (const auto& [name, level] : refs) {
        auto idx = schema.index_of(name);
        if (!idx || schema.column(*idx).kind != ColumnKind::Categorical) {
            throw Error(ErrorCode::UnknownReferenceLevel, "reference level given for non-categorical column '" + name + "'");
        }
    }

    // (source column, level index or -1 for pass-through)
    std::vector<std::pair<std::size_t, long>> layout;
    DesignMatrix out;
    for (auto c : schema.predictors()) {
        const auto& col = schema.column(c);
        if (col.kind != ColumnKind::Categorical) {
            layout.emplace_back(c, -1);
            out.column_names.push_back(col.name);
            continue;
        }
        auto ref = reference_level(col, refs);
        for (std::size_t l = 0; l < col.levels.size(); ++l) {
            if (col.levels[l] != ref) {
                layout.emplace_back(c, static_cast<long>(l));
                out.column_names.push_back(col.name + ":" + col.levels[l]);
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(ds.n_rows());
    out.x.resize(n, static_cast<Eigen::Index>(layout.size()));
    for (std::size_t j = 0; j < layout.size(); ++j) {
        auto [c, lvl] = layout[j];
        auto values = ds.column(c);
        for (Eigen::Index r = 0; r < n; ++r) {
            double v = values[r];
            out.x(r, static_cast<Eigen::Index>(j)) = lvl < 0 ? v : (static_cast<long>(v) == lvl ? 1.0 : 0.0);
        }
    }
    out.response = ds.response();
    return out;
}

/// Raw parsed table before typing; `std::nullopt` marks a missing cell.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<std::string>>> rows;
};

/**
 * Remove every row with at least one missing cell. Returns the cleaned table and the number of
 * rows dropped. A non-empty table whose rows are all incomplete is an error.
 */
inline std::pair<RawTable, std::size_t> drop_missing(const RawTable& raw) {
    RawTable out{raw.header, {}};
    for (const auto& row : raw.rows) {
        bool complete = std::all_of(row.begin(), row.end(), [](const auto& cell) { return cell.has_value(); });
        if (complete) {
            out.rows.push_back(row);
        }
    }
    std::size_t dropped = raw.rows.size() - out.rows.size();
    if (!raw.rows.empty() && out.rows.empty()) {
        throw Error(ErrorCode::AllRowsDropped, "every row has a missing cell");
    }
    return {std::move(out), dropped};
}

}

#endif
