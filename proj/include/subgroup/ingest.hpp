#ifndef SUBGROUP_INGEST_HPP
#define SUBGROUP_INGEST_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "data.hpp"
#include "error.hpp"
#include "random.hpp"

/**
 * @file ingest.hpp
 * @brief CSV loading against declared schemas, built-in state profiles, and the synthetic generator.
 */

namespace subgroup {

struct SchemaProfile {
    std::string name;
    Schema schema;
    ReferenceLevels reference_levels;
    std::map<std::string, std::string> encoding_notes;
};

namespace detail {

inline Column numeric(std::string name) { return Column{std::move(name), ColumnKind::Numeric, {}}; }
inline Column binary(std::string name, std::vector<std::string> labels = {}) {
    return Column{std::move(name), ColumnKind::Binary, std::move(labels)};
}
inline Column categorical(std::string name, std::vector<std::string> levels) {
    return Column{std::move(name), ColumnKind::Categorical, std::move(levels)};
}

inline ColumnKind parse_kind(const std::string& s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "binary") return ColumnKind::Binary;
    if (s == "categorical") return ColumnKind::Categorical;
    throw Error(ErrorCode::InvalidSchema, "unknown column kind '" + s + "'");
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where,
                               ErrorCode code = ErrorCode::InvalidConfig) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; })) {
            throw Error(code, "unknown key '" + it.key() + "' in " + where);
        }
    }
}

}

/**
 * Field layouts of the four state datasets. Predictor counts by type:
 * Florida 4/2/0, North Carolina 5/6/1, California 4/5/1, Michigan 5/5/0 (numeric/binary/multi-class).
 */
inline SchemaProfile builtin_profile(const std::string& name) {
    using detail::binary;
    using detail::categorical;
    using detail::numeric;

    if (name == "florida") {
        // Column names follow the public ProPublica compas-scores-two-years.csv header.
        return SchemaProfile{
            "florida",
            Schema({numeric("age"), numeric("juv_fel_count"), numeric("juv_misd_count"), numeric("priors_count"),
                    binary("sex", {"Female", "Male"}), binary("c_charge_degree", {"M", "F"}), binary("two_year_recid")},
                   "two_year_recid"),
            {},
            {{"sex", "female=0, male=1"},
             {"c_charge_degree", "misdemeanor (M)=0, felony (F)=1"},
             {"juv_fel_count", "juvenile major (felony) priors"},
             {"juv_misd_count", "juvenile minor (misdemeanor) priors"},
             {"two_year_recid", "recidivated within two years=1"}}};
    }
    if (name == "north_carolina") {
        return SchemaProfile{
            "north_carolina",
            Schema({binary("recidivism"), numeric("priors"), numeric("schooling"), numeric("prison_violations"),
                    numeric("age"), numeric("prison_time"), binary("alcohol"), binary("hard_drugs"), binary("parole"),
                    binary("married"), binary("felony"), binary("male"),
                    categorical("crime_type", {"other", "property", "personal"})},
                   "recidivism"),
            {{"crime_type", "other"}},
            {{"parole", "unsupervised release=0, supervised parole=1"},
             {"felony", "misdemeanor=0, felony=1"},
             {"male", "female=0, male=1"},
             {"crime_type", "personal and property crimes; other crimes are the reference group"}}};
    }
    if (name == "california") {
        return SchemaProfile{
            "california",
            Schema({binary("recidivism"), numeric("age"), numeric("priors"), numeric("aliases"), numeric("prison_time"),
                    binary("crime_category"), binary("economic_gain"), binary("arrest_free_5yr"), binary("opiate_use"),
                    binary("theft"), categorical("crime_type", {"other", "nuisance", "personal", "property"})},
                   "recidivism"),
            {{"crime_type", "other"}},
            {{"crime_category", "violator is equal to 0 and original commitment is equal to 1"},
             {"economic_gain", "crime did not involve economic gain=0, did=1"},
             {"theft", "crime did not involve theft=0, did=1"},
             {"arrest_free_5yr", "did not reach a five-year arrest-free period=0, did=1"},
             {"crime_type", "nuisance, personal and property crimes; other crimes are the reference group"}}};
    }
    if (name == "michigan") {
        return SchemaProfile{
            "michigan",
            Schema({binary("recidivism"), numeric("arrests"), numeric("probations"), numeric("jailings"),
                    numeric("juvenile_priors"), numeric("adult_priors"), binary("male"), binary("married"),
                    binary("drug_use"), binary("escape_attempt"), binary("prison_misconduct")},
                   "recidivism"),
            {},
            {{"male", "female=0, male=1"},
             {"escape_attempt", "no recorded escape attempt while incarcerated=0, recorded=1"},
             {"prison_misconduct", "no recorded misconduct while incarcerated=0, recorded=1"}}};
    }
    throw Error(ErrorCode::UnknownProfile, "unknown profile '" + name + "' (expected florida, north_carolina, california or michigan)");
}

inline nlohmann::ordered_json profile_to_json(const SchemaProfile& p) {
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : p.schema.columns()) {
        nlohmann::ordered_json jc{{"name", c.name}, {"kind", to_string(c.kind)}};
        if (!c.levels.empty()) {
            jc["levels"] = c.levels;
        }
        cols.push_back(std::move(jc));
    }
    nlohmann::ordered_json j{{"name", p.name}, {"columns", std::move(cols)}, {"response", p.schema.response_name()}};
    if (!p.reference_levels.empty()) {
        j["reference_levels"] = p.reference_levels;
    }
    if (!p.encoding_notes.empty()) {
        j["encoding_notes"] = p.encoding_notes;
    }
    return j;
}

inline SchemaProfile profile_from_json(const nlohmann::json& j) {
    try {
        detail::reject_unknown_keys(j, {"name", "columns", "response", "reference_levels", "encoding_notes"}, "profile",
                                    ErrorCode::InvalidSchema);
        SchemaProfile p;
        p.name = j.value("name", std::string("custom"));
        std::vector<Column> cols;
        for (const auto& jc : j.at("columns")) {
            detail::reject_unknown_keys(jc, {"name", "kind", "levels"}, "profile column", ErrorCode::InvalidSchema);
            Column c{jc.at("name").get<std::string>(), detail::parse_kind(jc.at("kind").get<std::string>()), {}};
            if (jc.contains("levels")) {
                c.levels = jc.at("levels").get<std::vector<std::string>>();
            }
            cols.push_back(std::move(c));
        }
        p.schema = Schema(std::move(cols), j.at("response").get<std::string>());
        if (j.contains("reference_levels")) {
            p.reference_levels = j.at("reference_levels").get<ReferenceLevels>();
            for (const auto& [col, level] : p.reference_levels) {
                auto idx = p.schema.index_of(col);
                if (!idx || p.schema.column(*idx).kind != ColumnKind::Categorical) {
                    throw Error(ErrorCode::UnknownReferenceLevel, "reference level for non-categorical column '" + col + "'");
                }
                reference_level(p.schema.column(*idx), p.reference_levels);
            }
        }
        if (j.contains("encoding_notes")) {
            p.encoding_notes = j.at("encoding_notes").get<std::map<std::string, std::string>>();
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSchema, std::string("malformed profile: ") + e.what());
    }
}

struct LoadResult {
    Dataset data;
    PreprocessReport report;
};

namespace detail {

// `row` is the 1-based record number in the file, header included.
inline double parse_cell(const Column& col, std::string_view token, std::size_t row, const std::string& header) {
    auto where = [&] {
        return " at record " + std::to_string(row) + ", column '" + header + "': '" + std::string(token) + "'";
    };
    auto t = csv::trim(token);
    switch (col.kind) {
        case ColumnKind::Numeric: {
            auto v = csv::parse_double(t);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::ParseError, "not a number" + where());
            }
            return *v;
        }
        case ColumnKind::Binary: {
            for (std::size_t l = 0; l < col.levels.size(); ++l) {
                if (t == col.levels[l]) {
                    return static_cast<double>(l);
                }
            }
            auto v = csv::parse_double(t);
            if (v && (*v == 0.0 || *v == 1.0)) {
                return *v;
            }
            throw Error(col.levels.empty() ? ErrorCode::ParseError : ErrorCode::UnknownCategoryLevel,
                        "binary value expected" + where());
        }
        case ColumnKind::Categorical: {
            for (std::size_t l = 0; l < col.levels.size(); ++l) {
                if (t == col.levels[l]) {
                    return static_cast<double>(l);
                }
            }
            throw Error(ErrorCode::UnknownCategoryLevel, "unknown level" + where());
        }
    }
    return 0.0;
}

}

/**
 * Parse a typed table from CSV text. The header must name exactly the profile's columns
 * (any order); rows with a missing cell ("" or NA) are dropped and counted.
 */
inline LoadResult parse_csv(std::istream& in, const SchemaProfile& profile) {
    const auto& schema = profile.schema;
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    if (!csv::read_record(in, fields, quoted)) {
        throw Error(ErrorCode::HeaderMismatch, "empty input: no header row");
    }

    RawTable raw;
    for (auto& f : fields) {
        raw.header.emplace_back(csv::trim(f));
    }
    std::set<std::string> have(raw.header.begin(), raw.header.end());
    std::set<std::string> want;
    for (const auto& c : schema.columns()) {
        want.insert(c.name);
    }
    std::vector<std::string> missing, extra;
    std::set_difference(want.begin(), want.end(), have.begin(), have.end(), std::back_inserter(missing));
    std::set_difference(have.begin(), have.end(), want.begin(), want.end(), std::back_inserter(extra));
    if (!missing.empty() || !extra.empty() || have.size() != raw.header.size()) {
        std::string msg = "header does not match profile '" + profile.name + "'";
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
            return s;
        };
        if (!missing.empty()) msg += "; missing: " + join(missing);
        if (!extra.empty()) msg += "; extra: " + join(extra);
        if (have.size() != raw.header.size()) msg += "; duplicate header names";
        throw Error(ErrorCode::HeaderMismatch, msg);
    }

    std::size_t line = 1;
    std::vector<std::size_t> lines;
    while (csv::read_record(in, fields, quoted)) {
        ++line;
        if (fields.size() == 1 && csv::trim(fields[0]).empty() && !quoted[0]) {
            continue;
        }
        if (fields.size() != raw.header.size()) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                                                   " fields, expected " + std::to_string(raw.header.size()));
        }
        std::vector<std::optional<std::string>> row;
        row.reserve(fields.size());
        for (auto& f : fields) {
            if (csv::is_missing(f)) {
                row.emplace_back(std::nullopt);
            } else {
                row.emplace_back(std::move(f));
            }
        }
        raw.rows.push_back(std::move(row));
        lines.push_back(line);
    }

    auto [clean, dropped] = drop_missing(raw);
    std::vector<std::size_t> kept_lines;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (std::all_of(raw.rows[r].begin(), raw.rows[r].end(), [](const auto& c) { return c.has_value(); })) {
            kept_lines.push_back(lines[r]);
        }
    }

    std::vector<std::size_t> position(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        position[c] = static_cast<std::size_t>(
            std::find(clean.header.begin(), clean.header.end(), schema.column(c).name) - clean.header.begin());
    }
    std::vector<std::vector<double>> cols(schema.size(), std::vector<double>(clean.rows.size()));
    for (std::size_t r = 0; r < clean.rows.size(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            cols[c][r] = detail::parse_cell(schema.column(c), *clean.rows[r][position[c]], kept_lines[r], schema.column(c).name);
        }
    }

    LoadResult out{Dataset(schema, std::move(cols)), {}};
    out.report.rows_dropped_missing = dropped;
    auto [n0, n1] = class_counts(out.data);
    out.report.class_count_0 = n0;
    out.report.class_count_1 = n1;
    return out;
}

inline LoadResult load_csv(const std::filesystem::path& path, const SchemaProfile& profile) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
    }
    return parse_csv(in, profile);
}

/// Emit a dataset as CSV. Categorical cells are written as level names, numbers in shortest round-trip form.
inline void write_csv(std::ostream& out, const Dataset& ds) {
    const auto& schema = ds.schema();
    std::vector<std::string> fields;
    for (const auto& c : schema.columns()) {
        fields.push_back(c.name);
    }
    csv::write_row(out, fields);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        fields.clear();
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto& col = schema.column(c);
            if (col.kind == ColumnKind::Categorical) {
                fields.push_back(col.levels[ds.level(r, c)]);
            } else {
                fields.push_back(csv::format_double(ds.value(r, c)));
            }
        }
        csv::write_row(out, fields);
    }
}

/**
 * Parameters of the synthetic mixed-type generator.
 * `separation` is the minimum distance between numeric cluster centers in units of the
 * (unit) within-cluster standard deviation.
 */
struct SyntheticSpec {
    std::size_t k_true = 3;
    std::size_t rows_per_cluster = 200;
    std::size_t n_numeric = 4;
    std::size_t n_categorical = 2;
    std::size_t levels_per_categorical = 4;
    double separation = 6.0;
    double flip_prob = 0.05;
    std::uint64_t seed = 0;
};

struct Synthetic {
    Dataset data;
    std::vector<std::size_t> labels;
    /// Per cluster: intercept followed by one coefficient per numeric feature.
    std::vector<std::vector<double>> coefficients;
    SchemaProfile profile;
};

inline nlohmann::ordered_json to_json(const SyntheticSpec& s) {
    return {{"k_true", s.k_true},
            {"rows_per_cluster", s.rows_per_cluster},
            {"n_numeric", s.n_numeric},
            {"n_categorical", s.n_categorical},
            {"levels_per_categorical", s.levels_per_categorical},
            {"separation", s.separation},
            {"flip_prob", s.flip_prob},
            {"seed", s.seed}};
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    try {
        detail::reject_unknown_keys(j, {"k_true", "rows_per_cluster", "n_numeric", "n_categorical",
                                        "levels_per_categorical", "separation", "flip_prob", "seed"},
                                    "synthetic spec", ErrorCode::InvalidSpec);
        SyntheticSpec s;
        s.k_true = j.value("k_true", s.k_true);
        s.rows_per_cluster = j.value("rows_per_cluster", s.rows_per_cluster);
        s.n_numeric = j.value("n_numeric", s.n_numeric);
        s.n_categorical = j.value("n_categorical", s.n_categorical);
        s.levels_per_categorical = j.value("levels_per_categorical", s.levels_per_categorical);
        s.separation = j.value("separation", s.separation);
        s.flip_prob = j.value("flip_prob", s.flip_prob);
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("malformed synthetic spec: ") + e.what());
    }
}

/**
 * Numeric center of cluster `c`. When n_numeric >= k_true - 1 the centers are the vertices of a
 * regular simplex, so every pair of centers is exactly `separation` apart. Coordinates use the
 * Helmert basis of the sum-zero subspace: vertex c is e_c projected there, scaled by separation / sqrt(2).
 * With fewer numeric columns the clusters are placed on the coordinate axes at multiples of
 * `separation` from an origin cluster, which keeps `separation` as the minimum distance.
 */
inline std::vector<double> synthetic_center(std::size_t c, std::size_t k_true, std::size_t n_numeric, double separation) {
    std::vector<double> center(n_numeric, 0.0);
    if (n_numeric + 1 >= k_true) {
        const double scale = separation / std::sqrt(2.0);
        for (std::size_t m = 1; m < k_true; ++m) {
            const double norm = std::sqrt(static_cast<double>(m * (m + 1)));
            double h = 0.0;
            if (c < m) {
                h = 1.0 / norm;
            } else if (c == m) {
                h = -static_cast<double>(m) / norm;
            }
            center[m - 1] = scale * h;
        }
        return center;
    }
    if (c > 0 && n_numeric > 0) {
        std::size_t axis = (c - 1) % n_numeric;
        std::size_t step = (c - 1) / n_numeric + 1;
        center[axis] = separation * static_cast<double>(step);
    }
    return center;
}

/**
 * Generate `k_true` clusters of mixed-type rows with known labels and a per-cluster logistic response.
 *
 * Numeric features are the cluster center plus unit Gaussian noise, shifted per column so the
 * minimum is 0. Each categorical cell takes the cluster's modal level ((c + j) mod levels), except
 * that with probability 2 * flip_prob it is redrawn uniformly over all levels; at flip_prob = 0.5 the
 * column carries no cluster information. The response is Bernoulli(sigmoid(b0 + sum_d beta_d * z_d)),
 * with z the row's Gaussian deviation from its center.
 */
inline Synthetic gen_synthetic(const SyntheticSpec& spec) {
    if (spec.k_true < 1 || spec.rows_per_cluster < 1 || !(spec.separation >= 0) || !(spec.flip_prob >= 0) ||
        spec.flip_prob > 0.5 || (spec.n_categorical > 0 && spec.levels_per_categorical < 2) ||
        spec.n_numeric + spec.n_categorical == 0) {
        throw Error(ErrorCode::InvalidSpec, "synthetic spec violates its invariants");
    }

    const std::size_t n = spec.k_true * spec.rows_per_cluster;
    Rng rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_level(0, std::max<std::size_t>(spec.levels_per_categorical, 1) - 1);

    Synthetic out;
    out.coefficients.resize(spec.k_true);
    for (std::size_t c = 0; c < spec.k_true; ++c) {
        auto& beta = out.coefficients[c];
        beta.push_back(-0.5 + 0.25 * static_cast<double>(c % 5));
        for (std::size_t d = 0; d < spec.n_numeric; ++d) {
            beta.push_back((c + d) % 2 == 0 ? 2.0 : 0.0);
        }
    }

    std::vector<std::vector<double>> num(spec.n_numeric, std::vector<double>(n));
    std::vector<std::vector<double>> cat(spec.n_categorical, std::vector<double>(n));
    std::vector<double> y(n);
    out.labels.resize(n);

    std::vector<double> z(spec.n_numeric);
    for (std::size_t c = 0, r = 0; c < spec.k_true; ++c) {
        auto center = synthetic_center(c, spec.k_true, spec.n_numeric, spec.separation);
        for (std::size_t i = 0; i < spec.rows_per_cluster; ++i, ++r) {
            out.labels[r] = c;
            double logit = out.coefficients[c][0];
            for (std::size_t d = 0; d < spec.n_numeric; ++d) {
                z[d] = gauss(rng);
                num[d][r] = center[d] + z[d];
                logit += out.coefficients[c][d + 1] * z[d];
            }
            for (std::size_t j = 0; j < spec.n_categorical; ++j) {
                std::size_t level = (c + j) % spec.levels_per_categorical;
                if (unif(rng) < 2.0 * spec.flip_prob) {
                    level = any_level(rng);
                }
                cat[j][r] = static_cast<double>(level);
            }
            y[r] = unif(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1.0 : 0.0;
        }
    }
    for (auto& col : num) {
        double mn = *std::min_element(col.begin(), col.end());
        for (auto& v : col) {
            v -= mn;
        }
    }

    std::vector<Column> columns;
    std::vector<std::vector<double>> cells;
    for (std::size_t d = 0; d < spec.n_numeric; ++d) {
        columns.push_back(detail::numeric("x" + std::to_string(d + 1)));
        cells.push_back(std::move(num[d]));
    }
    std::vector<std::string> levels;
    for (std::size_t l = 0; l < spec.levels_per_categorical; ++l) {
        levels.push_back("L" + std::to_string(l));
    }
    for (std::size_t j = 0; j < spec.n_categorical; ++j) {
        columns.push_back(detail::categorical("c" + std::to_string(j + 1), levels));
        cells.push_back(std::move(cat[j]));
    }
    columns.push_back(detail::binary("y"));
    cells.push_back(std::move(y));

    Schema schema(std::move(columns), "y");
    out.profile = SchemaProfile{"custom", schema, {}, {{"y", "synthetic per-cluster logistic response"}}};
    out.data = Dataset(std::move(schema), std::move(cells));
    return out;
}

}

#endif
