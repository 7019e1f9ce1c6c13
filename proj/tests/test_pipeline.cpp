#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "subgroup/subgroup.hpp"

namespace fs = std::filesystem;
using namespace subgroup;

namespace {

const std::string kCli = SUBGROUP_CLI;

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& name) : path(fs::temp_directory_path() / ("subgroup_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    fs::path operator/(const std::string& s) const { return path / s; }
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI and returns its exit status; stderr lands in `err`.
int run_cli(const std::string& args, const fs::path& err) {
    const int status = std::system((kCli + " " + args + " > /dev/null 2> " + err.string()).c_str());
    return WEXITSTATUS(status);
}

const char* kSyntheticProfile = R"({"columns": [
    {"name": "x1", "kind": "numeric"}, {"name": "x2", "kind": "numeric"},
    {"name": "x3", "kind": "numeric"}, {"name": "x4", "kind": "numeric"},
    {"name": "c1", "kind": "categorical", "levels": ["L0", "L1", "L2", "L3"]},
    {"name": "c2", "kind": "categorical", "levels": ["L0", "L1", "L2", "L3"]},
    {"name": "y", "kind": "binary"}], "response": "y"})";

void write_synthetic(const Workdir& w, std::uint64_t seed) {
    SyntheticSpec s;
    s.seed = seed;
    std::ofstream out(w / "synthetic.csv");
    write_csv(out, gen_synthetic(s).data);
}

}

TEST(Config, MissingSeedExitsWithValidationError) {
    Workdir w("noseed");
    write(w / "config.json", R"({"data": {"csv_path": "x.csv", "profile": "florida"}})");
    EXPECT_EQ(run_cli("validate " + (w / "config.json").string(), w / "err"), 1);
    const auto err = nlohmann::json::parse(slurp(w / "err"));
    EXPECT_EQ(err["error"], "InvalidConfig");
    EXPECT_NE(err["message"].get<std::string>().find("seed"), std::string::npos);
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
    auto code = [](const char* text) {
        try {
            parse_run_config(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "florida"}, "colour": 1})"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "texas"}})"), ErrorCode::UnknownProfile);
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "florida"}, "clustering": {"gamma": "big"}})"),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "florida"}, "clustering": {"fixed_k": 1}})"),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "north_carolina",
                       "reference_levels": {"crime_type": "arson"}}})"),
              ErrorCode::UnknownReferenceLevel);
    EXPECT_EQ(code(R"({"seed": 1, "data": {"csv_path": "a", "profile": "florida"}, "formats": ["pdf"]})"),
              ErrorCode::InvalidConfig);
}

TEST(Config, DefaultsAndSeedStreams) {
    const auto c = parse_run_config(nlohmann::json::parse(R"({"seed": 5, "data": {"csv_path": "d.csv", "profile": "florida"}})"),
                                    "/base");
    EXPECT_EQ(c.csv_path, fs::path("/base/d.csv"));
    EXPECT_EQ(c.output_dir, fs::path("/base/out"));
    EXPECT_EQ(c.selection.seed, derive_seed(5, {stream::selection}));
    EXPECT_FALSE(c.clustering.gamma.has_value());
    ASSERT_EQ(c.comparison.specs.size(), 4u);
    EXPECT_EQ(c.comparison.specs[0].kind, ClassifierKind::LR);
    EXPECT_EQ(c.comparison.specs[3].kind, ClassifierKind::LDA);
    EXPECT_EQ(c.comparison.specs[2].seed, derive_seed(5, {stream::classifier, 2}));
    EXPECT_TRUE(c.json && c.csv && c.markdown);
}

TEST(Cli, FixedKLargerThanRowsIsKTooLarge) {
    Workdir w("ktoolarge");
    fs::copy_file(fs::path(SUBGROUP_SOURCE_DIR) / "samples" / "nc_sample.csv", w / "nc.csv");
    write(w / "config.json",
          R"({"seed": 1, "data": {"csv_path": "nc.csv", "profile": "north_carolina"}, "clustering": {"fixed_k": 5}})");
    EXPECT_EQ(run_cli("pipeline " + (w / "config.json").string(), w / "err"), 1);
    const auto err = nlohmann::json::parse(slurp(w / "err"));
    EXPECT_EQ(err["error"], "KTooLarge");
    EXPECT_EQ(err["stage"], "fit");
    EXPECT_EQ(err["completed_stages"], nlohmann::json::array({"load"}));
}

TEST(Cli, TestWithoutSavedModelFails) {
    Workdir w("nomodel");
    write_synthetic(w, 3);
    write(w / "config.json", std::string(R"({"seed": 1, "data": {"csv_path": "synthetic.csv", "profile": )") +
                                 kSyntheticProfile + "}}");
    EXPECT_EQ(run_cli("test " + (w / "config.json").string(), w / "err"), 2);
    EXPECT_EQ(nlohmann::json::parse(slurp(w / "err"))["error"], "ModelNotFound");
}

TEST(Pipeline, SyntheticThreeClusterRun) {
    Workdir w("synthetic");
    write_synthetic(w, 31);
    write(w / "config.json", std::string(R"({"seed": 9, "data": {"csv_path": "synthetic.csv", "profile": )") +
                                 kSyntheticProfile + R"(}, "comparison": {"enabled": true, "n_reps": 3}})");
    const auto cfg = load_run_config(w / "config.json");
    const auto b = run_pipeline(cfg);
    ASSERT_TRUE(b.trace.has_value());
    EXPECT_EQ(b.model.k, 3u);
    for (const auto& cell : b.hotelling.cells) {
        ASSERT_TRUE(cell.result.has_value());
        EXPECT_TRUE(cell.result->reject_at_90);
    }
    ASSERT_EQ(b.significance.rows.size(), 3u);
    // The planted effects are strong; every cluster should flag at least one numeric predictor.
    for (const auto& row : b.significance.rows) {
        bool any = false;
        for (std::size_t j = 1; j <= 4; ++j) any = any || row.cells[j] == "***";
        EXPECT_TRUE(any) << "cluster " << row.cluster;
    }
    ASSERT_TRUE(b.comparison.has_value());
    std::vector<std::string> names;
    for (const auto& r : *b.comparison) {
        names.push_back(to_string(r.spec.kind));
        EXPECT_GE(r.result.mean_auc, 0.5);
    }
    EXPECT_EQ(names, (std::vector<std::string>{"LR", "RF", "SVM", "LDA"}));
    EXPECT_EQ(b.completed_stages,
              (std::vector<std::string>{"load", "select_k", "fit", "centroids", "hotelling", "significance", "comparison"}));

    write_bundle(cfg, b);
    for (const char* f : {"model.json", "report.json", "trace.csv", "centroids.csv", "hotelling.csv", "comparison.csv",
                          "significance.md"}) {
        EXPECT_TRUE(fs::exists(w / "out" / f)) << f;
    }
    const auto report = nlohmann::json::parse(slurp(w / "out" / "report.json"));
    EXPECT_EQ(report["provenance"]["seed"], 9);
    EXPECT_EQ(report["provenance"]["version"], version);
}

TEST(Pipeline, SavedModelReproducesCentroids) {
    Workdir w("reload");
    write_synthetic(w, 32);
    write(w / "config.json", std::string(R"({"seed": 4, "data": {"csv_path": "synthetic.csv", "profile": )") +
                                 kSyntheticProfile + R"(}, "clustering": {"fixed_k": 3}})");
    ASSERT_EQ(run_cli("cluster " + (w / "config.json").string(), w / "err"), 0) << slurp(w / "err");
    ASSERT_EQ(run_cli("test " + (w / "config.json").string(), w / "err"), 0) << slurp(w / "err");
    EXPECT_TRUE(fs::exists(w / "out" / "hotelling.csv"));

    const auto cfg = load_run_config(w / "config.json");
    const auto data = prepare(cfg);
    const auto model = model_from_json(nlohmann::json::parse(slurp(w / "out" / "model.json")), data.raw.schema());
    const auto a = assign(data.normalized.data, model);
    const auto table = centroid_table(data.raw, a, model.k, cfg.profile.reference_levels);
    std::stringstream recomputed;
    write_centroids_csv(recomputed, table);
    EXPECT_EQ(recomputed.str(), slurp(w / "out" / "centroids.csv"));
}

TEST(Pipeline, NorthCarolinaLayoutWithFixedK) {
    Workdir w("nc");
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::ofstream csv(w / "nc.csv");
    csv << "recidivism,priors,schooling,prison_violations,age,prison_time,alcohol,hard_drugs,parole,married,felony,male,"
           "crime_type\n";
    const char* crimes[] = {"other", "property", "personal"};
    for (int i = 0; i < 600; ++i) {
        const double priors = std::floor(10 * u(rng));
        const double logit = -1.0 + 0.25 * priors;
        csv << (u(rng) < 1 / (1 + std::exp(-logit)) ? 1 : 0) << ',' << priors << ',' << std::floor(6 + 8 * u(rng)) << ','
            << std::floor(4 * u(rng)) << ',' << 18 + 40 * u(rng) << ',' << 5 * u(rng);
        for (int b = 0; b < 6; ++b) csv << ',' << (u(rng) < 0.5 ? 1 : 0);
        csv << ',' << crimes[i % 3] << '\n';
    }
    csv.close();
    write(w / "config.json", R"({"seed": 2, "data": {"csv_path": "nc.csv", "profile": "north_carolina"},
                                 "clustering": {"fixed_k": 6}, "formats": ["csv"]})");
    ASSERT_EQ(run_cli("pipeline " + (w / "config.json").string(), w / "err"), 0) << slurp(w / "err");

    std::ifstream in(w / "out" / "centroids.csv");
    std::string line;
    std::getline(in, line);
    // cluster, size, then the response and 13 predictor columns with crime_type expanded to two indicators.
    EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, 2 + 14);
    EXPECT_NE(line.find("crime_type:property"), std::string::npos);
    EXPECT_EQ(line.find("crime_type:other"), std::string::npos);
    int rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 6);
    EXPECT_FALSE(fs::exists(w / "out" / "report.json"));
    EXPECT_TRUE(fs::exists(w / "out" / "model.json"));
}
