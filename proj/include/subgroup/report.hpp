#ifndef SUBGROUP_REPORT_HPP
#define SUBGROUP_REPORT_HPP

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "classifiers.hpp"
#include "crossval.hpp"
#include "csv.hpp"
#include "data.hpp"
#include "hotelling.hpp"
#include "kproto.hpp"
#include "logistic.hpp"
#include "selection.hpp"

// JSON and CSV/markdown renderings of every result type. JSON is canonical; the
// tabular files are projections of it.

namespace subgroup {

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson vec_json(const Eigen::VectorXd& v) {
    return ojson(std::vector<double>(v.data(), v.data() + v.size()));
}

}

inline ojson to_json(const PreprocessReport& r) {
    ojson scales = ojson::array();
    for (const auto& s : r.normalization) {
        scales.push_back({{"column", s.column}, {"divisor", s.divisor}, {"zero_column", s.zero_column}});
    }
    return {{"rows_dropped_missing", r.rows_dropped_missing},
            {"normalization", std::move(scales)},
            {"rows_removed_undersampling", r.rows_removed_undersampling},
            {"class_count_0", r.class_count_0},
            {"class_count_1", r.class_count_1}};
}

inline ojson to_json(const IndexTrace& t) {
    ojson entries = ojson::array();
    for (const auto& e : t.entries) {
        entries.push_back({{"k", e.k},
                           {"sample_indices", e.sample_indices},
                           {"median_index", e.median_index},
                           {"delta", e.delta ? ojson(*e.delta) : ojson(nullptr)}});
    }
    return {{"entries", std::move(entries)},
            {"chosen_k", t.chosen_k},
            {"stop_k", t.stop_k ? ojson(*t.stop_k) : ojson(nullptr)},
            {"gamma_used", t.gamma_used}};
}

/// Everything needed to reassign rows: prototypes live in normalized feature units.
inline ojson model_to_json(const ClusterModel& m, const MixedRows& layout, const Schema& schema) {
    std::vector<std::string> num_names, cat_names;
    for (auto c : layout.num_columns) num_names.push_back(schema.column(c).name);
    for (auto c : layout.cat_columns) cat_names.push_back(schema.column(c).name);
    ojson protos = ojson::array();
    for (const auto& p : m.prototypes) {
        protos.push_back({{"numeric_means", p.numeric_means}, {"categorical_modes", p.categorical_modes}});
    }
    return {{"k", m.k},
            {"gamma", m.gamma_used},
            {"numeric_columns", num_names},
            {"categorical_columns", cat_names},
            {"prototypes", std::move(protos)},
            {"total_cost", m.total_cost},
            {"iterations", m.iterations},
            {"converged", m.converged},
            {"restart", m.restart}};
}

/// Inverse of model_to_json; checks that the column layout matches `schema`.
inline ClusterModel model_from_json(const nlohmann::json& j, const Schema& schema) {
    try {
        ClusterModel m;
        m.k = j.at("k").get<std::size_t>();
        m.gamma_used = j.at("gamma").get<double>();
        m.total_cost = j.value("total_cost", 0.0);
        m.iterations = j.value("iterations", std::size_t{0});
        m.converged = j.value("converged", false);
        m.restart = j.value("restart", std::size_t{0});
        std::vector<std::string> num_names, cat_names;
        for (auto c : schema.predictors()) {
            (schema.column(c).kind == ColumnKind::Numeric ? num_names : cat_names).push_back(schema.column(c).name);
        }
        if (j.at("numeric_columns").get<std::vector<std::string>>() != num_names ||
            j.at("categorical_columns").get<std::vector<std::string>>() != cat_names) {
            throw Error(ErrorCode::SchemaMismatch, "model columns do not match the data schema");
        }
        for (const auto& jp : j.at("prototypes")) {
            Prototype p{jp.at("numeric_means").get<std::vector<double>>(),
                        jp.at("categorical_modes").get<std::vector<int>>()};
            if (p.numeric_means.size() != num_names.size() || p.categorical_modes.size() != cat_names.size()) {
                throw Error(ErrorCode::SchemaMismatch, "prototype width does not match the data schema");
            }
            m.prototypes.push_back(std::move(p));
        }
        if (m.prototypes.size() != m.k) {
            throw Error(ErrorCode::SchemaMismatch, "model lists " + std::to_string(m.prototypes.size()) +
                                                       " prototypes for k=" + std::to_string(m.k));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("malformed model file: ") + e.what());
    }
}

inline ojson to_json(const CentroidTable& t) {
    ojson rows = ojson::array();
    for (std::size_t c = 0; c < t.rows.size(); ++c) {
        rows.push_back({{"cluster", c}, {"size", t.sizes[c]}, {"values", t.rows[c]}});
    }
    return {{"columns", t.column_names}, {"rows", std::move(rows)}};
}

inline ojson to_json(const HotellingMatrix& m) {
    ojson cells = ojson::array();
    for (const auto& c : m.cells) {
        ojson jc{{"i", c.i}, {"j", c.j}};
        if (c.result) {
            const auto& r = *c.result;
            jc["t2"] = r.t2;
            jc["f"] = r.f_stat;
            jc["df1"] = r.df1;
            jc["df2"] = r.df2;
            jc["p"] = r.p_value;
            jc["reject_at_90"] = r.reject_at_90;
            jc["dropped"] = r.dropped_features;
        } else {
            jc["error"] = std::string(to_string(*c.error));
            jc["message"] = c.message;
        }
        cells.push_back(std::move(jc));
    }
    return {{"k", m.k}, {"features", m.features}, {"pairs", std::move(cells)}};
}

inline ojson to_json(const LogisticFit& f) {
    return {{"names", f.names},
            {"coefficients", detail::vec_json(f.coefficients)},
            {"std_errors", detail::vec_json(f.std_errors)},
            {"p_values", detail::vec_json(f.p_values)},
            {"stars", f.stars},
            {"converged", f.converged},
            {"separation", f.separation},
            {"iterations", f.iterations},
            {"log_likelihood", f.log_likelihood}};
}

inline ojson to_json(const SignificanceTable& t) {
    ojson rows = ojson::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"cluster", r.cluster},
                        {"n_rows", r.n_rows},
                        {"stars", r.cells},
                        {"fit", r.fit ? to_json(*r.fit) : ojson(nullptr)},
                        {"notes", r.notes}});
    }
    return {{"columns", t.column_names}, {"rows", std::move(rows)}};
}

inline ojson to_json(const EvalResult& e) {
    ojson reps = ojson::array();
    for (const auto& r : e.per_rep) {
        ojson jr{{"accuracy", r.accuracy}, {"auc", r.auc}, {"excluded", r.excluded}};
        if (!r.note.empty()) {
            jr["note"] = r.note;
        }
        reps.push_back(std::move(jr));
    }
    return {{"per_rep", std::move(reps)},
            {"mean_accuracy", e.mean_accuracy},
            {"mean_auc", e.mean_auc},
            {"n_reps", e.n_reps},
            {"n_excluded", e.n_excluded}};
}

struct ComparisonRow {
    ClassifierSpec spec;
    EvalResult result;
};

inline ojson to_json(const std::vector<ComparisonRow>& rows) {
    ojson out = ojson::array();
    for (const auto& r : rows) {
        ojson j{{"model", to_string(r.spec.kind)}};
        j.update(to_json(r.result));
        out.push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Tabular projections

inline void write_trace_csv(std::ostream& out, const IndexTrace& t) {
    csv::write_row(out, {"k", "median_index", "delta", "sample_indices"});
    for (const auto& e : t.entries) {
        std::string samples;
        for (std::size_t s = 0; s < e.sample_indices.size(); ++s) {
            samples += (s ? ";" : "") + csv::format_double(e.sample_indices[s]);
        }
        csv::write_row(out, {std::to_string(e.k), csv::format_double(e.median_index),
                             e.delta ? csv::format_double(*e.delta) : "", samples});
    }
}

inline void write_centroids_csv(std::ostream& out, const CentroidTable& t) {
    std::vector<std::string> header{"cluster", "size"};
    header.insert(header.end(), t.column_names.begin(), t.column_names.end());
    csv::write_row(out, header);
    for (std::size_t c = 0; c < t.rows.size(); ++c) {
        std::vector<std::string> row{std::to_string(c), std::to_string(t.sizes[c])};
        for (double v : t.rows[c]) row.push_back(csv::format_double(v));
        csv::write_row(out, row);
    }
}

inline void write_hotelling_csv(std::ostream& out, const HotellingMatrix& m) {
    csv::write_row(out, {"i", "j", "t2", "f", "df1", "df2", "p", "reject", "dropped"});
    for (const auto& c : m.cells) {
        if (!c.result) {
            csv::write_row(out, {std::to_string(c.i), std::to_string(c.j), "", "", "", "", "", "",
                                 std::string(to_string(*c.error))});
            continue;
        }
        const auto& r = *c.result;
        std::string dropped;
        for (std::size_t d = 0; d < r.dropped_features.size(); ++d) {
            dropped += (d ? ";" : "") + r.dropped_features[d];
        }
        csv::write_row(out, {std::to_string(c.i), std::to_string(c.j), csv::format_double(r.t2),
                             csv::format_double(r.f_stat), std::to_string(r.df1), std::to_string(r.df2),
                             csv::format_double(r.p_value), r.reject_at_90 ? "true" : "false", dropped});
    }
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    csv::write_row(out, {"model", "mean_accuracy", "mean_auc", "n_reps", "n_excluded"});
    for (const auto& r : rows) {
        csv::write_row(out, {to_string(r.spec.kind), csv::format_double(r.result.mean_accuracy),
                             csv::format_double(r.result.mean_auc), std::to_string(r.result.n_reps),
                             std::to_string(r.result.n_excluded)});
    }
}

/// Clusters as rows, intercept and features as columns, cells holding the star strings.
inline void write_significance_markdown(std::ostream& out, const SignificanceTable& t) {
    out << "| Cluster | n |";
    for (const auto& c : t.column_names) out << ' ' << c << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < t.column_names.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& r : t.rows) {
        out << "| " << r.cluster << " | " << r.n_rows << " |";
        for (const auto& cell : r.cells) out << ' ' << cell << " |";
        out << '\n';
    }
    out << "\nSignificance: *** p < 0.001, ** p < 0.05, * p < 0.1\n";
    bool any = false;
    for (const auto& r : t.rows) {
        for (const auto& note : r.notes) {
            if (!any) {
                out << "\nNotes:\n\n";
                any = true;
            }
            out << "- cluster " << r.cluster << ": " << note << '\n';
        }
    }
}

}

#endif
