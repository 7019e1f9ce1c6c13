// Command-line front end: one subcommand per pipeline stage plus `pipeline` for the full run.
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime or stage failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "subgroup/subgroup.hpp"

namespace fs = std::filesystem;
using namespace subgroup;

namespace {

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidSpec:
        case ErrorCode::InvalidSchema:
        case ErrorCode::UnknownProfile:
        case ErrorCode::UnknownReferenceLevel:
        case ErrorCode::KTooLarge:
        case ErrorCode::OutOfRange:
        case ErrorCode::FileNotFound:
        case ErrorCode::HeaderMismatch:
        case ErrorCode::ParseError:
        case ErrorCode::UnknownCategoryLevel:
        case ErrorCode::NegativeValue:
            return true;
        default:
            return false;
    }
}

int report_error(const Error& e) {
    ojson j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    if (const auto* se = dynamic_cast<const StageError*>(&e)) {
        j["stage"] = se->stage();
        j["completed_stages"] = se->completed();
    }
    std::cerr << j.dump() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
}

void emit(const ojson& j) { std::cout << j.dump(2) << '\n'; }

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    body(out);
}

std::size_t resolve_k(const RunConfig& cfg, const Dataset& norm, std::optional<IndexTrace>& trace) {
    if (cfg.clustering.fixed_k) {
        return *cfg.clustering.fixed_k;
    }
    trace = select_k(norm, cfg.selection, kproto_params(cfg));
    return trace->chosen_k;
}

ClusterModel load_model(const RunConfig& cfg, const Dataset& norm) {
    const auto path = cfg.model_path();
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ModelNotFound, "no saved model at " + path.string() + " (run `cluster` first)");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("model file is not valid JSON: ") + e.what());
    }
    auto model = model_from_json(j, norm.schema());
    model.assignment = assign(norm, model);
    return model;
}

int cmd_validate(const std::string& path) {
    auto cfg = load_run_config(path);
    emit({{"valid", true},
          {"csv_path", cfg.csv_path.string()},
          {"profile", cfg.profile.name},
          {"output_dir", cfg.output_dir.string()}});
    return 0;
}

int cmd_select_k(const std::string& path) {
    auto cfg = load_run_config(path);
    auto data = prepare(cfg);
    auto trace = select_k(data.normalized.data, cfg.selection, kproto_params(cfg));
    ensure_output_dir(cfg);
    const auto j = to_json(trace);
    if (cfg.json) write_json_file(cfg.output_dir / "trace.json", j);
    if (cfg.csv) write_text(cfg.output_dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
    emit(j);
    return 0;
}

int cmd_cluster(const std::string& path) {
    auto cfg = load_run_config(path);
    auto data = prepare(cfg);
    const auto& norm = data.normalized.data;
    std::optional<IndexTrace> trace;
    const auto k = resolve_k(cfg, norm, trace);
    const auto model = fit(norm, k, kproto_params(cfg));
    const auto centroids = centroid_table(data.raw, model.assignment, k, cfg.profile.reference_levels);
    ensure_output_dir(cfg);
    const auto mj = model_to_json(model, mixed_rows(norm), norm.schema());
    write_json_file(cfg.model_path(), mj);
    if (cfg.json) write_json_file(cfg.output_dir / "centroids.json", to_json(centroids));
    if (cfg.csv) {
        write_text(cfg.output_dir / "centroids.csv", [&](std::ostream& o) { write_centroids_csv(o, centroids); });
        if (trace) write_text(cfg.output_dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, *trace); });
    }
    emit({{"model", mj}, {"centroids", to_json(centroids)}});
    return 0;
}

int cmd_test(const std::string& path) {
    auto cfg = load_run_config(path);
    auto data = prepare(cfg);
    const auto& norm = data.normalized.data;
    const auto model = load_model(cfg, norm);
    const auto matrix = pairwise_matrix(norm, model.assignment, model.k);
    ensure_output_dir(cfg);
    const auto j = to_json(matrix);
    if (cfg.json) write_json_file(cfg.output_dir / "hotelling.json", j);
    if (cfg.csv) write_text(cfg.output_dir / "hotelling.csv", [&](std::ostream& o) { write_hotelling_csv(o, matrix); });
    emit(j);
    return 0;
}

int cmd_explain(const std::string& path) {
    auto cfg = load_run_config(path);
    auto data = prepare(cfg);
    const auto& norm = data.normalized.data;
    ClusterModel model;
    if (fs::exists(cfg.model_path())) {
        model = load_model(cfg, norm);
    } else {
        std::optional<IndexTrace> trace;
        model = fit(norm, resolve_k(cfg, norm, trace), kproto_params(cfg));
    }
    const auto table = per_cluster_significance(norm, model.assignment, model.k, cfg.profile.reference_levels);
    ensure_output_dir(cfg);
    const auto j = to_json(table);
    if (cfg.json) write_json_file(cfg.output_dir / "significance.json", j);
    if (cfg.markdown) {
        write_text(cfg.output_dir / "significance.md", [&](std::ostream& o) { write_significance_markdown(o, table); });
    }
    write_significance_markdown(std::cout, table);
    return 0;
}

int cmd_compare(const std::string& path) {
    auto cfg = load_run_config(path);
    auto data = prepare(cfg);
    auto rows = run_comparison(cfg, data.normalized.data, data.report);
    ensure_output_dir(cfg);
    const auto j = to_json(rows);
    if (cfg.json) write_json_file(cfg.output_dir / "comparison.json", j);
    if (cfg.csv) write_text(cfg.output_dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows); });
    write_comparison_csv(std::cout, rows);
    return 0;
}

int cmd_pipeline(const std::string& path) {
    auto cfg = load_run_config(path);
    const auto bundle = run_pipeline(cfg);
    write_bundle(cfg, bundle);
    ojson summary{{"output_dir", cfg.output_dir.string()}, {"k", bundle.model.k}, {"stages", bundle.completed_stages}};
    emit(summary);
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
    std::ifstream in(spec_path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "cannot open synthetic spec " + spec_path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("synthetic spec is not valid JSON: ") + e.what());
    }
    const auto spec = synthetic_spec_from_json(j);
    const auto syn = gen_synthetic(spec);

    const fs::path out(out_path);
    auto sidecar = [&](const std::string& suffix) {
        return out.parent_path() / (out.stem().string() + suffix);
    };
    write_text(out, [&](std::ostream& o) { write_csv(o, syn.data); });
    write_text(sidecar(".labels.csv"), [&](std::ostream& o) {
        o << "cluster\n";
        for (auto l : syn.labels) o << l << '\n';
    });
    ojson truth{{"spec", to_json(spec)}, {"coefficients", syn.coefficients}};
    write_json_file(sidecar(".truth.json"), truth);
    write_json_file(sidecar(".profile.json"), profile_to_json(syn.profile));
    emit({{"rows", syn.data.n_rows()},
          {"csv", out.string()},
          {"labels", sidecar(".labels.csv").string()},
          {"profile", sidecar(".profile.json").string()}});
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Subgroup discovery in mixed-type tabular data"};
    app.require_subcommand(1);
    std::string config, spec, out;
    int status = 0;

    auto add = [&](const char* name, const char* help, int (*fn)(const std::string&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "run configuration (JSON)")->required();
        sub->callback([&status, fn, &config] { status = fn(config); });
    };
    add("validate", "check a run configuration", cmd_validate);
    add("select-k", "choose the number of clusters and emit the index trace", cmd_select_k);
    add("cluster", "fit clusters and emit centroids plus model.json", cmd_cluster);
    add("test", "pairwise Hotelling T^2 matrix from the saved model", cmd_test);
    add("explain", "per-cluster logistic regression significance table", cmd_explain);
    add("compare", "cross-validated accuracy and AUC for each classifier", cmd_compare);
    add("pipeline", "run every stage and write all reports", cmd_pipeline);

    auto* synth = app.add_subcommand("synth", "generate a synthetic mixed-type dataset");
    synth->add_option("spec", spec, "generator spec (JSON)")->required();
    synth->add_option("out", out, "output CSV")->required();
    synth->callback([&] { status = cmd_synth(spec, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << ojson{{"error", "Usage"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << ojson{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return status;
}
