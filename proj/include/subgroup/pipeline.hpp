#ifndef SUBGROUP_PIPELINE_HPP
#define SUBGROUP_PIPELINE_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "classifiers.hpp"
#include "crossval.hpp"
#include "data.hpp"
#include "error.hpp"
#include "hotelling.hpp"
#include "ingest.hpp"
#include "kproto.hpp"
#include "logistic.hpp"
#include "random.hpp"
#include "report.hpp"
#include "selection.hpp"

namespace subgroup {

inline constexpr const char* version = "0.1.0";

struct ClusteringConfig {
    std::optional<double> gamma;
    std::size_t max_iter = 100;
    std::size_t n_restarts = 10;
    std::optional<std::size_t> fixed_k;
    /// Saved model read by the `test` subcommand; defaults to <output_dir>/model.json.
    std::optional<std::filesystem::path> model_path;
};

struct ComparisonConfig {
    bool enabled = false;
    std::size_t n_reps = 5;
    std::vector<ClassifierSpec> specs;
};

struct RunConfig {
    std::filesystem::path csv_path;
    SchemaProfile profile;
    SelectionParams selection;
    ClusteringConfig clustering;
    ComparisonConfig comparison;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    bool json = true;
    bool csv = true;
    bool markdown = true;
    /// The configuration document as given, echoed into the report.
    nlohmann::ordered_json source;

    std::filesystem::path model_path() const {
        return clustering.model_path.value_or(output_dir / "model.json");
    }
};

// Independent seed streams for each stochastic stage.
namespace stream {
inline constexpr std::uint64_t selection = 1;
inline constexpr std::uint64_t clustering = 2;
inline constexpr std::uint64_t undersample = 3;
inline constexpr std::uint64_t crossval = 4;
inline constexpr std::uint64_t classifier = 5;
}

namespace detail {

inline ClassifierSpec spec_from_json(const nlohmann::json& j, std::uint64_t seed) {
    ClassifierSpec s;
    if (j.is_string()) {
        s.kind = parse_classifier_kind(j.get<std::string>());
    } else {
        reject_unknown_keys(j, {"kind", "n_trees", "mtry", "min_split", "max_depth", "bootstrap", "c", "epochs"},
                            "classifier spec");
        s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
        s.forest.n_trees = j.value("n_trees", s.forest.n_trees);
        if (j.contains("mtry")) s.forest.mtry = j.at("mtry").get<std::size_t>();
        s.forest.min_split = j.value("min_split", s.forest.min_split);
        if (j.contains("max_depth")) s.forest.max_depth = j.at("max_depth").get<std::size_t>();
        s.forest.bootstrap = j.value("bootstrap", s.forest.bootstrap);
        s.svm.c = j.value("c", s.svm.c);
        s.svm.epochs = j.value("epochs", s.svm.epochs);
    }
    if (s.forest.n_trees < 1 || s.forest.min_split < 1 || (s.forest.mtry && *s.forest.mtry < 1) ||
        (s.forest.max_depth && *s.forest.max_depth < 1) || !(s.svm.c > 0) || s.svm.epochs < 1) {
        throw Error(ErrorCode::InvalidConfig, "classifier hyperparameters must be positive");
    }
    s.seed = seed;
    return s;
}

}

/**
 * Parse and validate a run configuration. Relative paths are resolved against `base_dir`
 * (normally the directory holding the config file). Nothing is read from disk here.
 */
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::reject_unknown_keys;
    try {
        if (!j.is_object()) {
            throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
        }
        reject_unknown_keys(j, {"data", "selection", "clustering", "comparison", "output_dir", "seed", "formats"},
                            "config");
        if (!j.contains("seed")) {
            throw Error(ErrorCode::InvalidConfig, "config.seed is required");
        }
        RunConfig c;
        c.source = nlohmann::ordered_json::parse(j.dump());
        c.seed = j.at("seed").get<std::uint64_t>();

        const auto& d = j.at("data");
        reject_unknown_keys(d, {"csv_path", "profile", "reference_levels"}, "data");
        c.csv_path = base_dir / d.at("csv_path").get<std::string>();
        const auto& p = d.at("profile");
        c.profile = p.is_string() ? builtin_profile(p.get<std::string>()) : profile_from_json(p);
        if (d.contains("reference_levels")) {
            for (const auto& [col, level] : d.at("reference_levels").items()) {
                c.profile.reference_levels[col] = level.get<std::string>();
            }
            for (const auto& [col, level] : c.profile.reference_levels) {
                auto idx = c.profile.schema.index_of(col);
                if (!idx || c.profile.schema.column(*idx).kind != ColumnKind::Categorical) {
                    throw Error(ErrorCode::UnknownReferenceLevel,
                                "reference level given for '" + col + "', which is not a categorical column");
                }
                reference_level(c.profile.schema.column(*idx), c.profile.reference_levels);
            }
        }

        if (j.contains("selection")) {
            const auto& s = j.at("selection");
            reject_unknown_keys(s, {"k_min", "k_max", "n_samples", "sample_size", "epsilon"}, "selection");
            c.selection.k_min = s.value("k_min", c.selection.k_min);
            c.selection.k_max = s.value("k_max", c.selection.k_max);
            c.selection.n_samples = s.value("n_samples", c.selection.n_samples);
            if (s.contains("sample_size")) c.selection.sample_size = s.at("sample_size").get<std::size_t>();
            c.selection.epsilon = s.value("epsilon", c.selection.epsilon);
        }
        if (c.selection.k_min < 2 || c.selection.k_max < c.selection.k_min || c.selection.n_samples < 1 ||
            !(c.selection.epsilon >= 0)) {
            throw Error(ErrorCode::InvalidConfig, "selection needs 2 <= k_min <= k_max, n_samples >= 1, epsilon >= 0");
        }
        c.selection.seed = derive_seed(c.seed, {stream::selection});

        if (j.contains("clustering")) {
            const auto& k = j.at("clustering");
            reject_unknown_keys(k, {"gamma", "max_iter", "n_restarts", "fixed_k", "model_path"}, "clustering");
            if (k.contains("gamma")) {
                const auto& g = k.at("gamma");
                if (g.is_string()) {
                    if (g.get<std::string>() != "auto") {
                        throw Error(ErrorCode::InvalidConfig, "clustering.gamma must be \"auto\" or a number");
                    }
                } else {
                    c.clustering.gamma = g.get<double>();
                    if (!(*c.clustering.gamma >= 0)) {
                        throw Error(ErrorCode::InvalidConfig, "clustering.gamma must be nonnegative");
                    }
                }
            }
            c.clustering.max_iter = k.value("max_iter", c.clustering.max_iter);
            c.clustering.n_restarts = k.value("n_restarts", c.clustering.n_restarts);
            if (k.contains("fixed_k")) {
                c.clustering.fixed_k = k.at("fixed_k").get<std::size_t>();
                if (*c.clustering.fixed_k < 2) {
                    throw Error(ErrorCode::InvalidConfig, "clustering.fixed_k must be at least 2");
                }
            }
            if (k.contains("model_path")) c.clustering.model_path = base_dir / k.at("model_path").get<std::string>();
        }
        if (c.clustering.max_iter < 1 || c.clustering.n_restarts < 1) {
            throw Error(ErrorCode::InvalidConfig, "clustering.max_iter and n_restarts must be at least 1");
        }

        if (j.contains("comparison")) {
            const auto& cmp = j.at("comparison");
            reject_unknown_keys(cmp, {"enabled", "n_reps", "specs"}, "comparison");
            c.comparison.enabled = cmp.value("enabled", true);
            c.comparison.n_reps = cmp.value("n_reps", c.comparison.n_reps);
            if (c.comparison.n_reps < 1) {
                throw Error(ErrorCode::InvalidConfig, "comparison.n_reps must be at least 1");
            }
            if (cmp.contains("specs")) {
                std::uint64_t i = 0;
                for (const auto& s : cmp.at("specs")) {
                    c.comparison.specs.push_back(
                        detail::spec_from_json(s, derive_seed(c.seed, {stream::classifier, i++})));
                }
            }
        }
        if (c.comparison.specs.empty()) {
            std::uint64_t i = 0;
            for (const char* kind : {"LR", "RF", "SVM", "LDA"}) {
                c.comparison.specs.push_back(
                    detail::spec_from_json(kind, derive_seed(c.seed, {stream::classifier, i++})));
            }
        }

        c.output_dir = base_dir / j.value("output_dir", std::string("out"));
        if (j.contains("formats")) {
            c.json = c.csv = c.markdown = false;
            for (const auto& f : j.at("formats")) {
                const auto name = f.get<std::string>();
                if (name == "json") c.json = true;
                else if (name == "csv") c.csv = true;
                else if (name == "markdown") c.markdown = true;
                else throw Error(ErrorCode::InvalidConfig, "unknown format '" + name + "' (expected json, csv or markdown)");
            }
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed config: ") + e.what());
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

/// Error raised by run_pipeline, carrying the stage that failed and those that completed before it.
class StageError : public Error {
public:
    StageError(const Error& cause, std::string stage, std::vector<std::string> completed)
        : Error(cause.code(), cause.what()), stage_(std::move(stage)), completed_(std::move(completed)) {}

    const std::string& stage() const { return stage_; }
    const std::vector<std::string>& completed() const { return completed_; }

private:
    std::string stage_;
    std::vector<std::string> completed_;
};

struct ReportBundle {
    PreprocessReport preprocess;
    std::optional<IndexTrace> trace;
    ClusterModel model;
    ojson model_json;
    CentroidTable centroids;
    HotellingMatrix hotelling;
    SignificanceTable significance;
    std::optional<std::vector<ComparisonRow>> comparison;
    std::vector<std::string> completed_stages;
    std::string started_at;
    std::string finished_at;
};

namespace detail {

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}

/// Everything the stages share: the cleaned raw data and its normalized copy.
struct PreparedData {
    Dataset raw;
    Normalized normalized;
    PreprocessReport report;
};

inline PreparedData prepare(const RunConfig& cfg) {
    auto loaded = load_csv(cfg.csv_path, cfg.profile);
    PreparedData p{loaded.data, normalize_numeric(loaded.data), loaded.report};
    p.report.normalization = p.normalized.scales;
    return p;
}

inline KProtoParams kproto_params(const RunConfig& cfg) {
    return KProtoParams{cfg.clustering.gamma, cfg.clustering.max_iter, cfg.clustering.n_restarts,
                        derive_seed(cfg.seed, {stream::clustering})};
}

/// Run every enabled classifier on the undersampled data. Updates the undersampling fields of `report`.
inline std::vector<ComparisonRow> run_comparison(const RunConfig& cfg, const Dataset& normalized,
                                                 PreprocessReport& report) {
    const auto balanced = undersample(normalized, derive_seed(cfg.seed, {stream::undersample}));
    report.rows_removed_undersampling = normalized.n_rows() - balanced.n_rows();
    std::tie(report.class_count_0, report.class_count_1) = class_counts(balanced);
    std::vector<ComparisonRow> rows;
    for (const auto& spec : cfg.comparison.specs) {
        rows.push_back({spec, crossval(balanced, spec, cfg.comparison.n_reps,
                                       derive_seed(cfg.seed, {stream::crossval}), cfg.profile.reference_levels)});
    }
    return rows;
}

inline ojson bundle_to_json(const RunConfig& cfg, const ReportBundle& b) {
    ojson j;
    j["preprocess"] = to_json(b.preprocess);
    j["trace"] = b.trace ? to_json(*b.trace) : ojson(nullptr);
    j["model"] = b.model_json;
    j["centroids"] = to_json(b.centroids);
    j["hotelling"] = to_json(b.hotelling);
    j["significance"] = to_json(b.significance);
    j["comparison"] = b.comparison ? to_json(*b.comparison) : ojson(nullptr);
    j["provenance"] = {{"config", cfg.source},
                       {"seed", cfg.seed},
                       {"version", version},
                       {"profile", cfg.profile.name},
                       {"stages", b.completed_stages},
                       {"centroid_units", "raw"},
                       {"feature_units", "numeric columns divided by their maximum"},
                       {"started_at", b.started_at},
                       {"finished_at", b.finished_at}};
    return j;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    body(out);
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

}

inline void write_json_file(const std::filesystem::path& path, const ojson& j) {
    detail::write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

inline void ensure_output_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
        throw Error(ErrorCode::Io, "output directory " + cfg.output_dir.string() + " is not writable");
    }
}

/// Write the bundle in every requested format. model.json is always written.
inline void write_bundle(const RunConfig& cfg, const ReportBundle& b) {
    ensure_output_dir(cfg);
    const auto& dir = cfg.output_dir;
    write_json_file(dir / "model.json", b.model_json);
    if (cfg.json) {
        write_json_file(dir / "report.json", bundle_to_json(cfg, b));
    }
    if (cfg.csv) {
        if (b.trace) {
            detail::write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, *b.trace); });
        }
        detail::write_file(dir / "centroids.csv", [&](std::ostream& o) { write_centroids_csv(o, b.centroids); });
        detail::write_file(dir / "hotelling.csv", [&](std::ostream& o) { write_hotelling_csv(o, b.hotelling); });
        if (b.comparison) {
            detail::write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, *b.comparison); });
        }
    }
    if (cfg.markdown) {
        detail::write_file(dir / "significance.md",
                           [&](std::ostream& o) { write_significance_markdown(o, b.significance); });
    }
}

/**
 * The whole analysis: load, normalize, choose k (unless fixed), cluster, summarize clusters in raw
 * units, test cluster pairs, fit per-cluster regressions and, if enabled, compare classifiers on an
 * undersampled copy. Clustering and regressions use every cleaned row. Does not write files.
 */
inline ReportBundle run_pipeline(const RunConfig& cfg) {
    ReportBundle b;
    b.started_at = detail::utc_now();
    std::string stage;
    auto run = [&](const std::string& name, auto&& body) {
        stage = name;
        try {
            body();
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            throw StageError(e, stage, b.completed_stages);
        }
        b.completed_stages.push_back(name);
    };

    std::optional<PreparedData> data;
    run("load", [&] { data = prepare(cfg); });
    b.preprocess = data->report;
    const Dataset& norm = data->normalized.data;
    const auto kp = kproto_params(cfg);

    std::size_t k = 0;
    if (cfg.clustering.fixed_k) {
        k = *cfg.clustering.fixed_k;
    } else {
        run("select_k", [&] {
            b.trace = select_k(norm, cfg.selection, kp);
            k = b.trace->chosen_k;
        });
    }
    run("fit", [&] {
        b.model = fit(norm, k, kp);
        b.model_json = model_to_json(b.model, mixed_rows(norm), norm.schema());
    });
    run("centroids", [&] {
        b.centroids = centroid_table(data->raw, b.model.assignment, k, cfg.profile.reference_levels);
    });
    run("hotelling", [&] { b.hotelling = pairwise_matrix(norm, b.model.assignment, k); });
    run("significance", [&] {
        b.significance = per_cluster_significance(norm, b.model.assignment, k, cfg.profile.reference_levels);
    });
    if (cfg.comparison.enabled) {
        run("comparison", [&] { b.comparison = run_comparison(cfg, norm, b.preprocess); });
    }
    b.finished_at = detail::utc_now();
    return b;
}

}

#endif
