// dlab — seeded experiment runner for the disagreement-bound certification
// library. One subcommand per experiment family; every run is reproducible
// from its config file (hash recorded in the report JSON).

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "dlab/harness.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw dlab::harness::ConfigError("config: cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw dlab::harness::ConfigError("config: parse error in '" + path + "': " + e.what());
    }
}

int write_artifacts(const dlab::harness::Artifacts& art, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : art.files) {
        std::ofstream f(std::filesystem::path(out_dir) / name, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write " << name << " under " << out_dir << "\n";
            return 2;
        }
        f << content;
    }
    std::cout << art.summary;
    return art.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dlab: disagreement-bound experiments over exact finite-support populations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    long long seed_override = -1;
    int jobs = 0;
    std::set<std::string> disabled;

    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--jobs", jobs, "parallelism degree (0 = library default)");
    app.add_option("--disable-check", disabled, "drop a bound from the trace matrix (coverage demo)");

    auto* sub_selftest = app.add_subcommand("selftest", "randomized identity and anchor suite");
    auto* sub_stacking = app.add_subcommand("stacking", "stacked-aggregation learning curve");
    auto* sub_tightness = app.add_subcommand("tightness", "near-tightness construction and ratio bracket");
    auto* sub_boost = app.add_subcommand("boost", "gradient boosting certificates");
    auto* sub_fw = app.add_subcommand("fw", "conditional-gradient certificates over the atomic ball");
    auto* sub_trees = app.add_subcommand("trees", "regression-tree agreement certificates");
    auto* sub_nn = app.add_subcommand("nn", "relu-network closure and proxy certificates");
    auto* sub_trace = app.add_subcommand("trace-matrix", "bound-to-check coverage table");
    for (auto* s : {sub_selftest, sub_stacking, sub_tightness, sub_boost, sub_fw, sub_trees, sub_nn, sub_trace})
        s->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (jobs > 0) {
            omp_set_dynamic(0);
            omp_set_num_threads(jobs);
        }

        nlohmann::json cfg = load_config(config_path);
        if (seed_override >= 0) cfg["seed"] = static_cast<std::uint64_t>(seed_override);
        if (const char* env_seed = std::getenv("DLAB_SEED"); env_seed && seed_override < 0)
            cfg["seed"] = static_cast<std::uint64_t>(std::strtoull(env_seed, nullptr, 10));

        using dlab::harness::Artifacts;
        Artifacts art;
        if (*sub_selftest) art = dlab::harness::run_selftest(cfg);
        else if (*sub_stacking) art = dlab::harness::run_stacking(cfg);
        else if (*sub_tightness) art = dlab::harness::run_tightness(cfg);
        else if (*sub_boost) art = dlab::harness::run_boost(cfg);
        else if (*sub_fw) art = dlab::harness::run_fw(cfg);
        else if (*sub_trees) art = dlab::harness::run_trees(cfg);
        else if (*sub_nn) art = dlab::harness::run_nn(cfg);
        else if (*sub_trace) art = dlab::harness::run_trace_matrix(disabled);
        return write_artifacts(art, out_dir);
    } catch (const dlab::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
