#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlab/atoms.hpp"
#include "dlab/population.hpp"
#include "dlab/stacking.hpp"
#include "json.hpp"

namespace dlab::harness {

// --- instance generators -----------------------------------------------------

struct PopulationSpec {
    std::string kind = "random";  // random | grid2d | path
    std::size_t points = 16;
    int feature_dim = 1;
    int label_dim = 1;
    bool unit_labels = true;     // labels in [0,1]^d
    bool simplex_labels = false; // label vectors on the probability simplex
    int grid_x = 4, grid_y = 4;
    std::string path;
};

Population make_population(const PopulationSpec& spec, std::uint64_t seed);
Predictor random_predictor(std::uint64_t seed, std::size_t n, int dim, double scale = 1.0);
// base models y + gaussian noise, uniform mixture
BaseModelSource noisy_target_mixture(const Population& p, std::size_t models, double noise, std::uint64_t seed);
WeakLearnerClass random_atom_class(const Population& p, std::size_t base_atoms, std::uint64_t seed);

// --- bound registry and reports ----------------------------------------------

enum class VerdictKind { proved_per_instance, monte_carlo_pass, proxy_consistent };
std::string to_string(VerdictKind kind);

struct RegistryEntry {
    std::string bound;
    std::string module_name;
    VerdictKind kind;
    std::string check;  // subcommand / suite that exercises it
};

// Every in-scope lemma/theorem-level result with its certification route.
const std::vector<RegistryEntry>& bound_registry();

struct BoundRow {
    std::string bound;
    std::string module_name;
    VerdictKind kind = VerdictKind::proved_per_instance;
    long instances = 0;
    double min_slack = 0.0;
    long failures = 0;
    bool passed = false;
};

struct Artifacts {
    std::map<std::string, std::string> files;  // filename -> contents
    std::vector<BoundRow> rows;
    std::string summary;
    // 0 iff every proved-per-instance and monte-carlo-pass row passed;
    // proxy-consistent rows never gate.
    int exit_code() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t config_hash(const nlohmann::json& cfg);

// --- experiment runners (one per subcommand) ----------------------------------

Artifacts run_selftest(const nlohmann::json& cfg);
Artifacts run_stacking(const nlohmann::json& cfg);
Artifacts run_tightness(const nlohmann::json& cfg);
Artifacts run_boost(const nlohmann::json& cfg);
Artifacts run_fw(const nlohmann::json& cfg);
Artifacts run_trees(const nlohmann::json& cfg);
Artifacts run_nn(const nlohmann::json& cfg);
Artifacts run_trace_matrix(const std::set<std::string>& disabled_checks = {});

}  // namespace dlab::harness
