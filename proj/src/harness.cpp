#include "dlab/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dlab/boosting.hpp"
#include "dlab/closure.hpp"
#include "dlab/csv.hpp"
#include "dlab/frankwolfe.hpp"
#include "dlab/losses.hpp"
#include "dlab/relunet.hpp"
#include "dlab/rng.hpp"
#include "dlab/trees.hpp"

namespace dlab::harness {

namespace {

using nlohmann::json;

// --- config access with field-path diagnostics --------------------------------

json get_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError("config: missing field '" + path + "'");
    return j.at(key);
}

template <class T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field '" + path + "' has the wrong type");
    }
}

template <class T>
T get_req(const json& j, const std::string& key, const std::string& path) {
    json v = get_field(j, key, path);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field '" + path + "' has the wrong type");
    }
}

PopulationSpec parse_population_spec(const json& cfg, const std::string& path) {
    PopulationSpec spec;
    if (!cfg.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    spec.kind = get_or<std::string>(cfg, "kind", path + ".kind", "random");
    spec.points = get_or<std::size_t>(cfg, "points", path + ".points", 16);
    spec.feature_dim = get_or<int>(cfg, "feature_dim", path + ".feature_dim", 1);
    spec.label_dim = get_or<int>(cfg, "label_dim", path + ".label_dim", 1);
    spec.unit_labels = get_or<bool>(cfg, "unit_labels", path + ".unit_labels", true);
    spec.simplex_labels = get_or<bool>(cfg, "simplex_labels", path + ".simplex_labels", false);
    spec.grid_x = get_or<int>(cfg, "grid_x", path + ".grid_x", 4);
    spec.grid_y = get_or<int>(cfg, "grid_y", path + ".grid_y", 4);
    spec.path = get_or<std::string>(cfg, "path", path + ".path", "");
    if (spec.kind != "random" && spec.kind != "grid2d" && spec.kind != "path")
        throw ConfigError("config: '" + path + ".kind' must be random, grid2d or path");
    if (spec.kind == "path" && spec.path.empty())
        throw ConfigError("config: '" + path + ".path' required for kind=path");
    return spec;
}

std::vector<double> parse_eps_schedule(const json& cfg, const std::string& path) {
    if (cfg.contains("eps_schedule")) {
        try {
            return cfg.at("eps_schedule").get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError("config: field '" + path + "eps_schedule' must be an array of numbers");
        }
    }
    const double eps = get_or<double>(cfg, "eps", path + "eps", 0.0);
    if (eps > 0.0) return {eps};
    return {};
}

OracleMode parse_mode(const std::string& name, const std::string& path) {
    if (name == "exact") return OracleMode::exact;
    if (name == "adversarial_floor") return OracleMode::adversarial_floor;
    if (name == "random_feasible") return OracleMode::random_feasible;
    throw ConfigError("config: '" + path + "' must be exact, adversarial_floor or random_feasible");
}

// --- report helpers ------------------------------------------------------------

json row_to_json(const BoundRow& r) {
    json j;
    j["bound"] = r.bound;
    j["module"] = r.module_name;
    j["verdict"] = to_string(r.kind);
    j["instances"] = r.instances;
    j["min_slack"] = r.min_slack;
    j["failures"] = r.failures;
    j["passed"] = r.passed;
    return j;
}

void emit_report(Artifacts& art, const std::string& name, const json& cfg) {
    json rep;
    rep["subcommand"] = name;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    rep["config_hash"] = hash;
    json rows = json::array();
    for (const auto& r : art.rows) rows.push_back(row_to_json(r));
    rep["bounds"] = std::move(rows);
    rep["exit_code"] = art.exit_code();
    art.files[name + "_report.json"] = rep.dump(2) + "\n";

    std::ostringstream sum;
    sum << name << " (config " << hash << ")\n";
    for (const auto& r : art.rows) {
        sum << "  [" << (r.passed ? "ok" : (r.kind == VerdictKind::proxy_consistent ? "--" : "FAIL")) << "] "
            << r.bound << " (" << to_string(r.kind) << ", " << r.instances << " instances, min slack "
            << CsvWriter::num(r.min_slack) << ", " << r.failures << " failures)\n";
    }
    sum << "exit " << art.exit_code() << "\n";
    art.summary = sum.str();
    art.files[name + "_summary.txt"] = art.summary;
}

// min-slack / failure bookkeeping for a family of per-instance checks
struct SlackTally {
    long instances = 0;
    double min_slack = 1e300;
    long failures = 0;

    void add(double slack, double tol) {
        ++instances;
        min_slack = std::min(min_slack, slack);
        if (slack < -tol) ++failures;
    }
    BoundRow row(const std::string& bound, const std::string& module_name, VerdictKind kind) const {
        BoundRow r;
        r.bound = bound;
        r.module_name = module_name;
        r.kind = kind;
        r.instances = instances;
        r.min_slack = instances ? min_slack : 0.0;
        r.failures = failures;
        r.passed = failures == 0;
        return r;
    }
};

ReluNetwork random_dag_net(int input_dim, int size, int output_dim, std::uint64_t seed) {
    Rng rng(seed);
    ReluNetwork net;
    net.input_dim = input_dim;
    net.output_dim = output_dim;
    for (int j = 0; j < size; ++j) {
        ReluNode n;
        const int avail = input_dim + j;
        const int fanin = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::min(3, avail))));
        for (int a = 0; a < fanin; ++a) {
            n.inputs.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(avail))));
            n.weights.push_back(rng.gaussian());
        }
        n.bias = 0.3 * rng.gaussian();
        net.nodes.push_back(std::move(n));
    }
    const std::size_t width = static_cast<std::size_t>(input_dim + size);
    net.output_weights.resize(static_cast<std::size_t>(output_dim) * width);
    net.output_bias.resize(static_cast<std::size_t>(output_dim));
    for (auto& v : net.output_weights) v = rng.gaussian();
    for (auto& v : net.output_bias) v = 0.3 * rng.gaussian();
    return net;
}

}  // namespace

// --- generators ----------------------------------------------------------------

Population make_population(const PopulationSpec& spec, std::uint64_t seed) {
    if (spec.kind == "path") return load_population_json(spec.path);
    Rng rng(derive_seed(seed, {0x9090}));
    Population p;
    if (spec.kind == "grid2d") {
        p.feature_dim = 2;
        p.label_dim = 1;
        const int total = spec.grid_x * spec.grid_y;
        p.w.assign(static_cast<std::size_t>(total), 1.0 / total);
        for (int i = 0; i < spec.grid_x; ++i)
            for (int j = 0; j < spec.grid_y; ++j) {
                p.x.push_back(i);
                p.x.push_back(j);
                p.y.push_back(rng.uniform(0.0, 1.0));
            }
        return p;
    }
    p.feature_dim = spec.feature_dim;
    p.label_dim = spec.label_dim;
    const std::size_t n = spec.points;
    const std::size_t ld = static_cast<std::size_t>(spec.label_dim);
    p.x.resize(n * static_cast<std::size_t>(spec.feature_dim));
    p.y.resize(n * ld);
    p.w.resize(n);
    for (auto& v : p.x) v = rng.uniform(0.0, 1.0);
    if (spec.simplex_labels) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < ld; ++c) {
                const double e = -std::log(1.0 - rng.uniform());
                p.y[i * ld + c] = e;
                s += e;
            }
            for (std::size_t c = 0; c < ld; ++c) p.y[i * ld + c] /= s;
        }
    } else if (spec.unit_labels) {
        for (auto& v : p.y) v = rng.uniform(0.0, 1.0);
    } else {
        for (auto& v : p.y) v = rng.gaussian();
    }
    double s = 0.0;
    for (auto& v : p.w) {
        v = rng.uniform(0.2, 1.0);
        s += v;
    }
    for (auto& v : p.w) v /= s;
    return p;
}

Predictor random_predictor(std::uint64_t seed, std::size_t n, int dim, double scale) {
    Rng rng(seed);
    Predictor f = Predictor::zeros(n, dim);
    for (auto& v : f.values) v = scale * rng.gaussian();
    return f;
}

BaseModelSource noisy_target_mixture(const Population& p, std::size_t models, double noise, std::uint64_t seed) {
    std::vector<Predictor> ms;
    ms.reserve(models);
    for (std::size_t j = 0; j < models; ++j) {
        Rng rng(derive_seed(seed, {0x1417, j}));
        Predictor g = Predictor::from_labels(p);
        for (auto& v : g.values) v += noise * rng.gaussian();
        ms.push_back(std::move(g));
    }
    return BaseModelSource::explicit_mixture(std::move(ms),
                                             std::vector<double>(models, 1.0 / static_cast<double>(models)));
}

WeakLearnerClass random_atom_class(const Population& p, std::size_t base_atoms, std::uint64_t seed) {
    std::vector<Predictor> atoms;
    atoms.reserve(base_atoms);
    for (std::size_t j = 0; j < base_atoms; ++j)
        atoms.push_back(random_predictor(derive_seed(seed, {0xa70, j}), p.size(), p.label_dim));
    return WeakLearnerClass(std::move(atoms), p);
}

// --- registry -------------------------------------------------------------------

std::string to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::proved_per_instance: return "proved-per-instance";
        case VerdictKind::monte_carlo_pass: return "monte-carlo-pass";
        case VerdictKind::proxy_consistent: return "proxy-consistent";
    }
    return "?";
}

const std::vector<RegistryEntry>& bound_registry() {
    static const std::vector<RegistryEntry> entries = {
        {"midpoint-identity", "population-core", VerdictKind::proved_per_instance, "selftest"},
        {"midpoint-anchor", "population-core", VerdictKind::proved_per_instance, "selftest,stacking"},
        {"local-curve-bound", "population-core", VerdictKind::proved_per_instance, "trees"},
        {"stacking-agreement", "stacking", VerdictKind::monte_carlo_pass, "stacking"},
        {"stacking-near-tightness", "stacking", VerdictKind::monte_carlo_pass, "tightness"},
        {"gb-single-step-progress", "boosting", VerdictKind::proved_per_instance, "boost"},
        {"gb-correlation-lower-bound", "boosting", VerdictKind::proved_per_instance, "boost"},
        {"gb-gap-recurrence", "boosting", VerdictKind::proved_per_instance, "boost"},
        {"gb-anchor-gap-rate", "boosting", VerdictKind::proved_per_instance, "boost"},
        {"gb-two-run-agreement", "boosting", VerdictKind::proved_per_instance, "boost"},
        {"tree-midpoint-closure", "closure-classes", VerdictKind::proved_per_instance, "trees"},
        {"tree-agreement", "closure-classes", VerdictKind::proved_per_instance, "trees"},
        {"nn-midpoint-closure", "closure-classes", VerdictKind::proved_per_instance, "nn"},
        {"nn-agreement", "closure-classes", VerdictKind::proxy_consistent, "nn"},
        {"sc-midpoint-anchor", "frankwolfe", VerdictKind::proved_per_instance, "selftest,fw"},
        {"stacking-agreement-generalized", "stacking", VerdictKind::monte_carlo_pass, "stacking"},
        {"fw-single-step-progress", "frankwolfe", VerdictKind::proved_per_instance, "fw"},
        {"fw-correlation-lower-bound", "frankwolfe", VerdictKind::proved_per_instance, "fw"},
        {"fw-gap-recurrence", "frankwolfe", VerdictKind::proved_per_instance, "fw"},
        {"fw-anchor-gap-rate", "frankwolfe", VerdictKind::proved_per_instance, "fw"},
        {"fw-two-run-agreement", "frankwolfe", VerdictKind::proved_per_instance, "fw"},
        {"closure-agreement-sc-tree", "closure-classes", VerdictKind::proved_per_instance, "trees"},
        {"closure-agreement-sc-nn", "closure-classes", VerdictKind::proxy_consistent, "nn"},
    };
    return entries;
}

int Artifacts::exit_code() const {
    for (const auto& r : rows)
        if (r.kind != VerdictKind::proxy_consistent && !r.passed) return 1;
    return 0;
}

std::uint64_t config_hash(const json& cfg) {
    const std::string s = cfg.dump();
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// --- selftest --------------------------------------------------------------------

Artifacts run_selftest(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const long instances = get_or<long>(cfg, "instances", "instances", 1000);
    const long probes = get_or<long>(cfg, "probes", "probes", 1000);
    const std::string fixture = get_or<std::string>(cfg, "fixture", "fixture", "");

    Artifacts art;
    struct InstanceResult {
        std::size_t n = 0;
        int dim = 0;
        double identity_defect = 0.0;
        double anchor_tight_slack = 0.0;
        double anchor_below_slack = 0.0;
        double triangle_slack = 0.0;
        bool identity_pass = false;
    };
    std::vector<InstanceResult> results(static_cast<std::size_t>(instances));

#pragma omp parallel for schedule(static)
    for (long i = 0; i < instances; ++i) {
        Rng rng(derive_seed(seed, {0x5e1f, static_cast<std::uint64_t>(i)}));
        const std::size_t n = 2 + rng.index(11);
        const int dim = 1 + static_cast<int>(rng.index(3));
        Population p;
        p.feature_dim = 1;
        p.label_dim = dim;
        p.x.resize(n);
        p.y.resize(n * static_cast<std::size_t>(dim));
        p.w.resize(n);
        for (std::size_t q = 0; q < n; ++q) p.x[q] = static_cast<double>(q);
        for (auto& v : p.y) v = rng.uniform(-1.0, 1.0);
        double s = 0.0;
        for (auto& v : p.w) {
            v = rng.uniform(0.1, 1.0);
            s += v;
        }
        for (auto& v : p.w) v /= s;

        Predictor f1 = Predictor::zeros(n, dim), f2 = Predictor::zeros(n, dim), f3 = Predictor::zeros(n, dim);
        for (auto& v : f1.values) v = 2.0 * rng.gaussian();
        for (auto& v : f2.values) v = 2.0 * rng.gaussian();
        for (auto& v : f3.values) v = 2.0 * rng.gaussian();

        InstanceResult r;
        r.n = n;
        r.dim = dim;
        AnchorCertificate ident = check_midpoint_identity(f1, f2, p);
        r.identity_defect = std::abs(ident.slack);
        r.identity_pass = ident.passed();

        const double mid_risk = mse(midpoint(f1, f2), p);
        r.anchor_tight_slack = check_anchor_bound(f1, f2, mid_risk, p).slack;
        r.anchor_below_slack = check_anchor_bound(f1, f2, mid_risk - 0.125, p).slack;

        const double dab = std::sqrt(disagreement(f1, f2, p));
        const double dbc = std::sqrt(disagreement(f2, f3, p));
        const double dac = std::sqrt(disagreement(f1, f3, p));
        r.triangle_slack = dab + dbc - dac;
        results[static_cast<std::size_t>(i)] = r;
    }

    CsvWriter csv;
    csv.row({"instance", "n", "dim", "identity_defect", "anchor_tight_slack", "anchor_below_slack",
             "triangle_slack"});
    SlackTally anchor, triangle;
    long ident_failures = 0;
    double max_defect = 0.0;
    for (long i = 0; i < instances; ++i) {
        const auto& r = results[static_cast<std::size_t>(i)];
        csv.row({CsvWriter::num(i), CsvWriter::num(r.n), CsvWriter::num(r.dim), CsvWriter::num(r.identity_defect),
                 CsvWriter::num(r.anchor_tight_slack), CsvWriter::num(r.anchor_below_slack),
                 CsvWriter::num(r.triangle_slack)});
        // at the midpoint risk the corollary is tight: |slack| small; below it, slack > 0
        anchor.add(std::min(r.anchor_below_slack, 1e-10 - std::abs(r.anchor_tight_slack) +
                                                      1e-10 * std::abs(r.anchor_tight_slack)),
                   1e-9);
        triangle.add(r.triangle_slack, 1e-9);
        max_defect = std::max(max_defect, r.identity_defect);
        if (!r.identity_pass) ++ident_failures;
    }
    BoundRow ident_row;
    ident_row.bound = "midpoint-identity";
    ident_row.module_name = "population-core";
    ident_row.kind = VerdictKind::proved_per_instance;
    ident_row.instances = instances;
    ident_row.min_slack = -max_defect;
    ident_row.failures = ident_failures;
    ident_row.passed = ident_failures == 0;

    // pointwise strongly-convex midpoint probes for both built-in losses
    LossCertificate sq_cert = certify_loss(SquaredLoss(2), probes, derive_seed(seed, {0x10c1}));
    LossCertificate ce_cert = certify_loss(SoftmaxCrossEntropyLoss(3, 1.0), probes, derive_seed(seed, {0x10c2}));
    BoundRow sc_row;
    sc_row.bound = "sc-midpoint-anchor";
    sc_row.module_name = "frankwolfe";
    sc_row.kind = VerdictKind::proved_per_instance;
    sc_row.instances = 2 * probes;
    sc_row.min_slack = -std::max(sq_cert.max_midpoint_violation, ce_cert.max_midpoint_violation);
    sc_row.failures = (sq_cert.passed() ? 0 : 1) + (ce_cert.passed() ? 0 : 1);
    sc_row.passed = sc_row.failures == 0;

    // optional fixture cross-check: recompute and compare the claimed values
    if (!fixture.empty()) {
        BoundRow fix;
        fix.bound = "fixture-crosscheck";
        fix.module_name = "population-core";
        fix.kind = VerdictKind::proved_per_instance;
        fix.instances = 1;
        try {
            std::ifstream in(fixture);
            if (!in) throw std::runtime_error("cannot open fixture " + fixture);
            json doc = json::parse(in);
            Population p = population_from_json_text(doc.at("population").dump());
            Predictor f1, f2;
            f1.dim = p.label_dim;
            f2.dim = p.label_dim;
            f1.values = doc.at("f1").get<std::vector<double>>();
            f2.values = doc.at("f2").get<std::vector<double>>();
            const double m1 = mse(f1, p), m2 = mse(f2, p), d = disagreement(f1, f2, p);
            const json& exp = doc.at("expected");
            const double e1 = exp.at("mse1").get<double>();
            const double e2 = exp.at("mse2").get<double>();
            const double ed = exp.at("d").get<double>();
            const double defect = std::max({std::abs(m1 - e1) / (1.0 + std::abs(e1)),
                                            std::abs(m2 - e2) / (1.0 + std::abs(e2)),
                                            std::abs(d - ed) / (1.0 + std::abs(ed))});
            fix.min_slack = -defect;
            fix.failures = defect <= 1e-9 ? 0 : 1;
        } catch (const std::exception&) {
            fix.min_slack = -1.0;
            fix.failures = 1;
        }
        fix.passed = fix.failures == 0;
        art.rows.push_back(fix);
    }

    art.files["selftest.csv"] = csv.str();
    art.rows.push_back(ident_row);
    art.rows.push_back(anchor.row("midpoint-anchor", "population-core", VerdictKind::proved_per_instance));
    art.rows.push_back(sc_row);
    art.rows.push_back(triangle.row("disagreement-pseudometric", "population-core",
                                    VerdictKind::proved_per_instance));
    emit_report(art, "selftest", cfg);
    return art;
}

// --- stacking ----------------------------------------------------------------------

Artifacts run_stacking(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const long trials = get_or<long>(cfg, "trials", "trials", 500);
    const double mc_sigma = get_or<double>(cfg, "mc_sigma", "mc_sigma", 3.0);
    const std::vector<int> k_values = get_or<std::vector<int>>(cfg, "k_values", "k_values", {1, 2, 4, 8});
    PopulationSpec pop_spec = parse_population_spec(
        cfg.contains("population") ? cfg.at("population") : json::object(), "population");
    Population p = make_population(pop_spec, derive_seed(seed, {0x707}));

    const json src_cfg = cfg.contains("source") ? cfg.at("source") : json::object();
    const std::string src_kind = get_or<std::string>(src_cfg, "kind", "source.kind", "noisy_mixture");
    BaseModelSource source = [&] {
        if (src_kind == "noisy_mixture") {
            const std::size_t models = get_or<std::size_t>(src_cfg, "models", "source.models", 12);
            const double noise = get_or<double>(src_cfg, "noise", "source.noise", 0.7);
            return noisy_target_mixture(p, models, noise, derive_seed(seed, {0x919}));
        }
        if (src_kind == "shard_trainer") {
            ShardTrainerConfig sc;
            sc.shard_size = get_or<int>(src_cfg, "shard_size", "source.shard_size", 6);
            sc.tree_depth = get_or<int>(src_cfg, "tree_depth", "source.tree_depth", 2);
            return BaseModelSource::shard_trainer(sc);
        }
        throw ConfigError("config: 'source.kind' must be noisy_mixture or shard_trainer");
    }();

    StackingCurve curve = stacking_curve(source, k_values, trials, p, derive_seed(seed, {0x57ac}));

    CsvWriter tcsv;
    tcsv.row({"k", "trial", "R_G", "R_Gprime", "R_union", "D", "slack"});
    SlackTally pointwise;
    for (const auto& r : curve.trials) {
        tcsv.row({CsvWriter::num(r.k), CsvWriter::num(r.trial), CsvWriter::num(r.R_G), CsvWriter::num(r.R_Gprime),
                  CsvWriter::num(r.R_union), CsvWriter::num(r.D), CsvWriter::num(r.pointwise_slack)});
        pointwise.add(r.pointwise_slack, 1e-9);
    }

    CsvWriter acsv;
    acsv.row({"k", "R_k_hat", "R_2k_hat", "D_hat", "bound_margin", "stderr"});
    SlackTally expectation;
    for (const auto& a : curve.aggregate) {
        acsv.row({CsvWriter::num(a.k), CsvWriter::num(a.R_k_hat), CsvWriter::num(a.R_2k_hat),
                  CsvWriter::num(a.D_hat), CsvWriter::num(a.bound_margin), CsvWriter::num(a.margin_stderr)});
        expectation.add(a.bound_margin + mc_sigma * a.margin_stderr, 0.0);
    }

    const bool generalized = p.label_dim > 1;
    Artifacts art;
    art.files["stacking_trials.csv"] = tcsv.str();
    art.files["stacking_aggregate.csv"] = acsv.str();
    art.files["stacking_plot.gp"] =
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale x 2\n"
        "set xlabel 'k'\n"
        "set ylabel 'disagreement'\n"
        "plot 'stacking_aggregate.csv' using 1:4 with linespoints title 'D_hat', \\\n"
        "     '' using 1:(4*($2-$3)) with linespoints title '4*(R_k - R_2k)'\n";
    art.rows.push_back(pointwise.row(generalized ? "sc-midpoint-anchor" : "midpoint-anchor",
                                     generalized ? "frankwolfe" : "population-core",
                                     VerdictKind::proved_per_instance));
    art.rows.push_back(expectation.row(generalized ? "stacking-agreement-generalized" : "stacking-agreement",
                                       "stacking", VerdictKind::monte_carlo_pass));
    emit_report(art, "stacking", cfg);
    return art;
}

// --- tightness -----------------------------------------------------------------------

Artifacts run_tightness(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const int k = get_req<int>(cfg, "k", "k");
    const double eps = get_req<double>(cfg, "eps", "eps");
    const long trials = get_or<long>(cfg, "trials", "trials", 2000);
    const double mc_sigma = get_or<double>(cfg, "mc_sigma", "mc_sigma", 3.0);

    TightnessInstance inst = build_tightness_instance(k, eps);
    StackingCurve curve = stacking_curve(inst.source, {k}, trials, inst.population, derive_seed(seed, {0x716}));
    TightnessReport rep = tightness_report_from_curve(inst, curve, k, eps, mc_sigma);

    // closed-form checks at 1e-9
    SlackTally closed;
    {
        std::vector<Predictor> basis;
        const std::size_t stride = static_cast<std::size_t>(inst.forms.m) / static_cast<std::size_t>(2 * k);
        for (int i = 0; i < k; ++i)
            basis.push_back(inst.source.mixture_member(static_cast<std::size_t>(i) * stride));
        SpanModel span = ols_span(basis, inst.population);
        const double want = 1.0 / (static_cast<double>(k) + inst.forms.sigma2);
        for (double c : span.coefficients) closed.add(1e-9 - std::abs(c - want), 0.0);
        closed.add(1e-9 - std::abs(span.risk - inst.forms.risk_k), 0.0);

        std::vector<Predictor> b2;
        for (int i = k; i < 2 * k; ++i)
            b2.push_back(inst.source.mixture_member(static_cast<std::size_t>(i) * stride));
        SpanModel span2 = ols_span(b2, inst.population);
        const double d = disagreement(span.compiled, span2.compiled, inst.population);
        closed.add(1e-9 - std::abs(d - inst.forms.d0), 0.0);
        closed.add(1e-12 - std::abs(inst.forms.ratio_pointwise - inst.forms.d0 / inst.forms.delta0), 0.0);
    }

    CsvWriter tcsv;
    tcsv.row({"k", "trial", "R_G", "R_Gprime", "R_union", "D", "slack"});
    for (const auto& r : curve.trials)
        tcsv.row({CsvWriter::num(r.k), CsvWriter::num(r.trial), CsvWriter::num(r.R_G), CsvWriter::num(r.R_Gprime),
                  CsvWriter::num(r.R_union), CsvWriter::num(r.D), CsvWriter::num(r.pointwise_slack)});

    CsvWriter rcsv;
    rcsv.row({"k", "eps", "trials", "sigma2", "m", "ratio", "ratio_stderr", "lower_bound", "upper_bound",
              "conclusive", "lower_pass", "upper_pass"});
    rcsv.row({CsvWriter::num(rep.k), CsvWriter::num(rep.eps), CsvWriter::num(rep.trials),
              CsvWriter::num(rep.forms.sigma2), CsvWriter::num(rep.forms.m), CsvWriter::num(rep.ratio),
              CsvWriter::num(rep.ratio_stderr), CsvWriter::num(4.0 - eps - mc_sigma * rep.ratio_stderr),
              CsvWriter::num(4.0 + mc_sigma * rep.ratio_stderr), rep.conclusive ? "1" : "0",
              rep.lower_pass ? "1" : "0", rep.upper_pass ? "1" : "0"});

    Artifacts art;
    art.files["tightness_trials.csv"] = tcsv.str();
    art.files["tightness_ratio.csv"] = rcsv.str();

    BoundRow mc;
    mc.bound = "stacking-near-tightness";
    mc.module_name = "stacking";
    mc.kind = VerdictKind::monte_carlo_pass;
    mc.instances = trials;
    mc.min_slack = rep.conclusive ? std::min(rep.ratio - (4.0 - eps - mc_sigma * rep.ratio_stderr),
                                             (4.0 + mc_sigma * rep.ratio_stderr) - rep.ratio)
                                  : -1.0;
    mc.failures = (rep.conclusive && rep.lower_pass && rep.upper_pass) ? 0 : 1;
    mc.passed = mc.failures == 0;
    art.rows.push_back(mc);
    art.rows.push_back(closed.row("tightness-closed-forms", "stacking", VerdictKind::proved_per_instance));
    emit_report(art, "tightness", cfg);
    return art;
}

// --- boosting -------------------------------------------------------------------------

Artifacts run_boost(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const int k = get_or<int>(cfg, "k", "k", 64);
    const std::size_t base_atoms = get_or<std::size_t>(cfg, "base_atoms", "base_atoms", 8);
    const long pairs = get_or<long>(cfg, "pairs", "pairs", 10);
    PopulationSpec pop_spec = parse_population_spec(
        cfg.contains("population") ? cfg.at("population") : json::object(), "population");
    Population p = make_population(pop_spec, derive_seed(seed, {0xb0b}));
    WeakLearnerClass c = random_atom_class(p, base_atoms, derive_seed(seed, {0xc1a5}));
    TauStarResult ts = tau_star(c, p);

    const std::vector<double> eps_schedule = parse_eps_schedule(cfg, "");
    const std::vector<std::string> mode_names = get_or<std::vector<std::string>>(
        cfg, "oracle_modes", "oracle_modes", {"exact", "adversarial_floor", "random_feasible"});

    Artifacts art;
    CsvWriter trace_csv;
    trace_csv.row({"mode", "t", "atom", "corr", "alpha", "mse", "E_t", "bound_rhs"});
    SlackTally progress, dual, recurrence, rate;

    for (std::size_t mi = 0; mi < mode_names.size(); ++mi) {
        SqOracle oracle;
        oracle.mode = parse_mode(mode_names[mi], "oracle_modes[]");
        oracle.eps_schedule = eps_schedule;
        oracle.seed = derive_seed(seed, {0x0a1, mi});
        auto [f, tr] = gradient_boost(c, p, k, oracle);
        (void)f;

        double eps_sq = 0.0;
        double prev_gap = tr.initial_mse - tr.anchor_risk;
        for (const auto& s : tr.steps) {
            eps_sq += s.eps_used * s.eps_used;
            const double rhs = 8.0 * ts.tau_star * ts.tau_star / static_cast<double>(s.t) + eps_sq;
            trace_csv.row({mode_names[mi], CsvWriter::num(s.t), CsvWriter::num(s.atom), CsvWriter::num(s.corr),
                           CsvWriter::num(s.alpha), CsvWriter::num(s.mse_value), CsvWriter::num(s.gap),
                           CsvWriter::num(rhs)});
            progress.add(s.progress - s.progress_floor, 1e-10);
            dual.add(s.max_corr - prev_gap / (2.0 * ts.tau_star), 1e-9);
            const double floor_arg = prev_gap / (2.0 * ts.tau_star) - s.eps_used;
            recurrence.add((prev_gap - s.gap) - (floor_arg > 0.0 ? floor_arg * floor_arg : 0.0), 1e-10);
            rate.add(rhs - s.gap, 1e-9);
            prev_gap = s.gap;
        }
    }

    // two-run agreement over seeded pairs with mixed oracle modes
    SlackTally two_run;
    std::vector<GbTwoRunReport> pair_reports(static_cast<std::size_t>(pairs));
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < pairs; ++i) {
        const std::array<OracleMode, 3> mode_cycle = {OracleMode::exact, OracleMode::adversarial_floor,
                                                      OracleMode::random_feasible};
        SqOracle o1, o2;
        o1.mode = mode_cycle[static_cast<std::size_t>(i) % 3];
        o2.mode = mode_cycle[static_cast<std::size_t>(i + 1) % 3];
        o1.eps_schedule = eps_schedule;
        o2.eps_schedule = eps_schedule;
        o1.seed = derive_seed(seed, {0xaaa, static_cast<std::uint64_t>(i), 1});
        o2.seed = derive_seed(seed, {0xaaa, static_cast<std::uint64_t>(i), 2});
        auto [f1, t1] = gradient_boost(c, p, k, o1);
        auto [f2, t2] = gradient_boost(c, p, k, o2);
        pair_reports[static_cast<std::size_t>(i)] = certify_gb_two_run(f1, t1, f2, t2, ts.tau_star, p);
    }
    CsvWriter pair_csv;
    pair_csv.row({"pair", "D", "anchor_slack", "rate_rhs"});
    for (long i = 0; i < pairs; ++i) {
        const auto& r = pair_reports[static_cast<std::size_t>(i)];
        pair_csv.row({CsvWriter::num(i), CsvWriter::num(r.d), CsvWriter::num(r.anchor_form.slack),
                      CsvWriter::num(r.rate_rhs)});
        two_run.add(std::min(r.anchor_form.slack, r.rate_rhs - r.d), 1e-9);
    }

    art.files["boost_trace.csv"] = trace_csv.str();
    art.files["boost_pairs.csv"] = pair_csv.str();
    art.files["boost_plot.gp"] =
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale y\n"
        "set xlabel 't'\n"
        "set ylabel 'anchor gap'\n"
        "plot 'boost_trace.csv' using 2:7 with points title 'E_t', \\\n"
        "     '' using 2:8 with lines title 'rate bound'\n";
    art.rows.push_back(progress.row("gb-single-step-progress", "boosting", VerdictKind::proved_per_instance));
    art.rows.push_back(dual.row("gb-correlation-lower-bound", "boosting", VerdictKind::proved_per_instance));
    art.rows.push_back(recurrence.row("gb-gap-recurrence", "boosting", VerdictKind::proved_per_instance));
    art.rows.push_back(rate.row("gb-anchor-gap-rate", "boosting", VerdictKind::proved_per_instance));
    art.rows.push_back(two_run.row("gb-two-run-agreement", "boosting", VerdictKind::proved_per_instance));
    emit_report(art, "boost", cfg);
    return art;
}

// --- frank-wolfe ------------------------------------------------------------------------

Artifacts run_fw(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const int k = get_or<int>(cfg, "k", "k", 64);
    const double tau = get_or<double>(cfg, "tau", "tau", 0.8);
    const std::size_t base_atoms = get_or<std::size_t>(cfg, "base_atoms", "base_atoms", 6);
    const long pairs = get_or<long>(cfg, "pairs", "pairs", 10);
    const bool track = get_or<bool>(cfg, "track_feasibility", "track_feasibility", true);

    const json loss_cfg = cfg.contains("loss") ? cfg.at("loss") : json::object();
    const std::string loss_name = get_or<std::string>(loss_cfg, "name", "loss.name", "squared");
    const double mu0 = get_or<double>(loss_cfg, "mu0", "loss.mu0", 1.0);

    PopulationSpec pop_spec = parse_population_spec(
        cfg.contains("population") ? cfg.at("population") : json::object(), "population");
    if (loss_name == "softmax_ce" && !cfg.contains("population")) {
        pop_spec.label_dim = 3;
        pop_spec.simplex_labels = true;
    }
    Population p = make_population(pop_spec, derive_seed(seed, {0xf0f}));
    auto loss = make_loss(loss_name, p.label_dim, mu0);
    WeakLearnerClass c = random_atom_class(p, base_atoms, derive_seed(seed, {0xfc1a}));

    Artifacts art;

    // probe certificates for the loss in use (extensions must pass these)
    LossCertificate lcert = certify_loss(*loss, 1000, derive_seed(seed, {0x10c3}));
    BoundRow sc_row;
    sc_row.bound = "sc-midpoint-anchor";
    sc_row.module_name = "frankwolfe";
    sc_row.kind = VerdictKind::proved_per_instance;
    sc_row.instances = 1000;
    sc_row.min_slack = -lcert.max_midpoint_violation;
    sc_row.failures = lcert.passed() ? 0 : 1;
    sc_row.passed = lcert.passed();

    KtauRisk anchor = risk_over_Ktau(c, tau, *loss, p, 1e-10);
    FwOptions opt;
    opt.track_iterate_atomic_norm = track;
    opt.anchor = &anchor;

    const std::vector<double> eps_schedule = parse_eps_schedule(cfg, "");
    const std::vector<std::string> mode_names = get_or<std::vector<std::string>>(
        cfg, "oracle_modes", "oracle_modes", {"exact", "adversarial_floor", "random_feasible"});

    CsvWriter trace_csv;
    trace_csv.row({"mode", "t", "atom", "score", "alpha", "risk", "E_t", "fw_gap", "atomic_norm_f", "rate_rhs"});
    SlackTally progress, dual, recurrence, rate, feasibility;
    const double L = loss->smoothness();

    for (std::size_t mi = 0; mi < mode_names.size(); ++mi) {
        SqOracle oracle;
        oracle.mode = parse_mode(mode_names[mi], "oracle_modes[]");
        oracle.eps_schedule = eps_schedule;
        oracle.seed = derive_seed(seed, {0xf0a1, mi});
        auto [f, tr] = frank_wolfe(c, p, tau, k, *loss, oracle, opt);
        (void)f;

        double prev_risk = tr.initial_risk;
        double prev_gap = tr.initial_risk - tr.anchor_risk_lower;
        double eps_sum = 0.0;
        for (const auto& s : tr.steps) {
            eps_sum += s.eps_used;
            const double rate_rhs = 8.0 * L * tau * tau / static_cast<double>(s.t + 1) +
                                    2.0 * tau / static_cast<double>(s.t + 1) * eps_sum;
            trace_csv.row({mode_names[mi], CsvWriter::num(s.t), CsvWriter::num(s.atom), CsvWriter::num(s.score),
                           CsvWriter::num(s.alpha), CsvWriter::num(s.risk_value), CsvWriter::num(s.gap),
                           CsvWriter::num(s.gap_before), CsvWriter::num(s.atomic_norm_f),
                           CsvWriter::num(rate_rhs)});

            const double step_rhs =
                s.alpha * (s.gap_before - tau * s.eps_used) - 2.0 * L * tau * tau * s.alpha * s.alpha;
            progress.add((prev_risk - s.risk_value) - step_rhs, 1e-9);
            dual.add(s.max_score - prev_gap / (2.0 * tau), 1e-9);
            const double rec_rhs =
                s.alpha * (prev_gap - tau * s.eps_used) - 2.0 * L * tau * tau * s.alpha * s.alpha;
            recurrence.add((prev_gap - s.gap) - rec_rhs, 1e-9);
            rate.add(rate_rhs + 1e-8 - s.gap, 0.0);
            if (track) feasibility.add(tau + 1e-8 - s.atomic_norm_f, 0.0);
            prev_risk = s.risk_value;
            prev_gap = s.gap;
        }
    }

    // two-run agreement over seeded pairs
    SlackTally two_run, crosscheck;
    std::vector<FwAgreementReport> reports(static_cast<std::size_t>(pairs));
    {
        FwOptions pair_opt = opt;
        pair_opt.track_iterate_atomic_norm = false;
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < pairs; ++i) {
            const std::array<OracleMode, 3> mode_cycle = {OracleMode::exact, OracleMode::adversarial_floor,
                                                          OracleMode::random_feasible};
            SqOracle o1, o2;
            o1.mode = mode_cycle[static_cast<std::size_t>(i) % 3];
            o2.mode = mode_cycle[static_cast<std::size_t>(i + 2) % 3];
            o1.eps_schedule = eps_schedule;
            o2.eps_schedule = eps_schedule;
            o1.seed = derive_seed(seed, {0xfbb, static_cast<std::uint64_t>(i), 1});
            o2.seed = derive_seed(seed, {0xfbb, static_cast<std::uint64_t>(i), 2});
            auto [f1, t1] = frank_wolfe(c, p, tau, k, *loss, o1, pair_opt);
            auto [f2, t2] = frank_wolfe(c, p, tau, k, *loss, o2, pair_opt);
            reports[static_cast<std::size_t>(i)] = certify_fw_agreement(f1, t1, f2, t2, tau, k, *loss, c, p);
        }
    }
    CsvWriter pair_csv;
    pair_csv.row({"pair", "D", "anchor_slack", "rate_rhs", "sq_crosscheck_diff"});
    for (long i = 0; i < pairs; ++i) {
        const auto& r = reports[static_cast<std::size_t>(i)];
        pair_csv.row({CsvWriter::num(i), CsvWriter::num(r.d), CsvWriter::num(r.anchor_form.slack),
                      CsvWriter::num(r.rate_rhs), CsvWriter::num(r.sq_crosscheck_diff)});
        two_run.add(std::min(r.anchor_form.slack, r.rate_rhs - r.d), 1e-9);
        if (loss_name == "squared") crosscheck.add(1e-10 - r.sq_crosscheck_diff, 0.0);
    }

    art.files["fw_trace.csv"] = trace_csv.str();
    art.files["fw_pairs.csv"] = pair_csv.str();
    art.files["fw_plot.gp"] =
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale y\n"
        "set xlabel 't'\n"
        "set ylabel 'anchor gap'\n"
        "plot 'fw_trace.csv' using 2:7 with points title 'E_t', \\\n"
        "     '' using 2:10 with lines title 'rate bound'\n";
    art.rows.push_back(sc_row);
    art.rows.push_back(progress.row("fw-single-step-progress", "frankwolfe", VerdictKind::proved_per_instance));
    art.rows.push_back(dual.row("fw-correlation-lower-bound", "frankwolfe", VerdictKind::proved_per_instance));
    art.rows.push_back(recurrence.row("fw-gap-recurrence", "frankwolfe", VerdictKind::proved_per_instance));
    art.rows.push_back(rate.row("fw-anchor-gap-rate", "frankwolfe", VerdictKind::proved_per_instance));
    art.rows.push_back(two_run.row("fw-two-run-agreement", "frankwolfe", VerdictKind::proved_per_instance));
    if (track)
        art.rows.push_back(
            feasibility.row("fw-iterate-feasibility", "frankwolfe", VerdictKind::proved_per_instance));
    if (loss_name == "squared")
        art.rows.push_back(
            crosscheck.row("fw-squared-anchor-crosscheck", "frankwolfe", VerdictKind::proved_per_instance));
    emit_report(art, "fw", cfg);
    return art;
}

// --- trees ---------------------------------------------------------------------------------

Artifacts run_trees(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const std::vector<int> depths = get_or<std::vector<int>>(cfg, "depths", "depths", {1, 2, 3});
    long fixtures = get_or<long>(cfg, "fixtures", "fixtures", 3);
    const int grid_x = get_or<int>(cfg, "grid_x", "grid_x", 4);
    const int grid_y = get_or<int>(cfg, "grid_y", "grid_y", 4);
    const int restarts = get_or<int>(cfg, "restarts", "restarts", 2);

    // an explicit population (e.g. a bundled fixture file) replaces the
    // generated fixtures
    bool explicit_population = cfg.contains("population");
    if (explicit_population) fixtures = 1;

    Artifacts art;
    CsvWriter csv;
    csv.row({"fixture", "depth", "risk_n", "risk_2n", "eps1", "eps2", "D", "bound_rhs", "sc_bound_rhs",
             "midpoint_depth", "identity_defect", "verdict"});
    SlackTally closure_check, agreement, local_curve, sc_tree, identity, monotone;

    for (long f = 0; f < fixtures; ++f) {
        Population p;
        if (explicit_population) {
            p = make_population(parse_population_spec(cfg.at("population"), "population"),
                                derive_seed(seed, {0x7ee}));
        } else {
            PopulationSpec spec;
            spec.kind = "grid2d";
            spec.grid_x = grid_x;
            spec.grid_y = grid_y;
            p = make_population(spec, derive_seed(seed, {0x7ee, static_cast<std::uint64_t>(f)}));
        }

        double prev_risk = 1e300;
        for (int depth : depths) {
            TreeTrainerConfig tc;
            tc.restarts = restarts;
            tc.seed1 =
                derive_seed(seed, {0x7e1, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(depth), 1});
            tc.seed2 =
                derive_seed(seed, {0x7e1, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(depth), 2});
            TreeAgreementReport rep = certify_tree_agreement(p, depth, tc);
            const CurveCertificate& cert = rep.certificate;

            csv.row({CsvWriter::num(f), CsvWriter::num(depth), CsvWriter::num(cert.risk_n),
                     CsvWriter::num(cert.risk_2n), CsvWriter::num(cert.eps1), CsvWriter::num(cert.eps2),
                     CsvWriter::num(cert.d), CsvWriter::num(cert.bound_rhs), CsvWriter::num(rep.sc_bound_rhs),
                     CsvWriter::num(rep.midpoint_depth), CsvWriter::num(std::abs(rep.identity.slack)),
                     to_string(cert.verdict)});

            closure_check.add(rep.midpoint_depth_ok ? 1e-12 - rep.midpoint_eval_defect : -1.0, 0.0);
            agreement.add(cert.bound_rhs + 1e-9 - cert.d, 0.0);
            local_curve.add(cert.bound_rhs + 1e-9 - cert.d, 0.0);
            sc_tree.add(1e-12 - std::abs(rep.sc_bound_rhs - cert.bound_rhs), 0.0);
            identity.add(rep.identity.passed() ? std::abs(rep.identity.slack) : -1.0, 0.0);
            monotone.add(prev_risk - cert.risk_n, 0.0);
            monotone.add(cert.risk_n - cert.risk_2n, 0.0);
            prev_risk = cert.risk_n;
        }
    }

    art.files["trees_certificates.csv"] = csv.str();
    art.files["trees_plot.gp"] =
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'depth'\n"
        "set ylabel 'disagreement'\n"
        "plot 'trees_certificates.csv' using 2:7 with points title 'D', \\\n"
        "     '' using 2:8 with points title '4*(R_d - R_2d + eps)'\n";
    art.rows.push_back(
        closure_check.row("tree-midpoint-closure", "closure-classes", VerdictKind::proved_per_instance));
    art.rows.push_back(agreement.row("tree-agreement", "closure-classes", VerdictKind::proved_per_instance));
    art.rows.push_back(local_curve.row("local-curve-bound", "population-core", VerdictKind::proved_per_instance));
    art.rows.push_back(
        sc_tree.row("closure-agreement-sc-tree", "closure-classes", VerdictKind::proved_per_instance));
    art.rows.push_back(identity.row("midpoint-identity", "population-core", VerdictKind::proved_per_instance));
    art.rows.push_back(
        monotone.row("tree-risk-monotonicity", "closure-classes", VerdictKind::proved_per_instance));
    emit_report(art, "trees", cfg);
    return art;
}

// --- nn -------------------------------------------------------------------------------------

Artifacts run_nn(const json& cfg) {
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", "seed", 1);
    const int size = get_or<int>(cfg, "size", "size", 3);
    const long random_pairs = get_or<long>(cfg, "random_pairs", "random_pairs", 200);
    PopulationSpec pop_spec = parse_population_spec(
        cfg.contains("population") ? cfg.at("population") : json::object(), "population");
    Population p = make_population(pop_spec, derive_seed(seed, {0x221}));

    NnTrainConfig trainer;
    if (cfg.contains("trainer")) {
        const json& t = cfg.at("trainer");
        trainer.steps = get_or<int>(t, "steps", "trainer.steps", trainer.steps);
        trainer.step = get_or<double>(t, "step", "trainer.step", trainer.step);
        trainer.restarts = get_or<int>(t, "restarts", "trainer.restarts", trainer.restarts);
    }

    Artifacts art;

    // exact statements about the closure construction on random DAG pairs
    SlackTally closure_all;
    CsvWriter pair_csv;
    pair_csv.row({"pair", "size1", "size2", "midpoint_size", "max_defect"});
    std::vector<std::array<double, 4>> pair_rows(static_cast<std::size_t>(random_pairs));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < random_pairs; ++i) {
        Rng rng(derive_seed(seed, {0x22a, static_cast<std::uint64_t>(i)}));
        const int s1 = 1 + static_cast<int>(rng.index(5));
        const int s2 = 1 + static_cast<int>(rng.index(5));
        ReluNetwork a = random_dag_net(2, s1, 1, derive_seed(seed, {0x22b, static_cast<std::uint64_t>(i)}));
        ReluNetwork b = random_dag_net(2, s2, 1, derive_seed(seed, {0x22c, static_cast<std::uint64_t>(i)}));
        ReluNetwork m = nn_midpoint(a, b);
        double defect = 0.0;
        for (int probe = 0; probe < 25; ++probe) {
            double x[2] = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            double va = 0.0, vb = 0.0, vm = 0.0;
            a.eval(x, &va);
            b.eval(x, &vb);
            m.eval(x, &vm);
            defect = std::max(defect, std::abs(vm - 0.5 * (va + vb)));
        }
        pair_rows[static_cast<std::size_t>(i)] = {static_cast<double>(s1), static_cast<double>(s2),
                                                  static_cast<double>(m.size()), defect};
    }
    for (long i = 0; i < random_pairs; ++i) {
        const auto& r = pair_rows[static_cast<std::size_t>(i)];
        pair_csv.row({CsvWriter::num(i), CsvWriter::num(static_cast<long>(r[0])),
                      CsvWriter::num(static_cast<long>(r[1])), CsvWriter::num(static_cast<long>(r[2])),
                      CsvWriter::num(r[3])});
        closure_all.add(r[2] == r[0] + r[1] ? 1e-9 - r[3] : -1.0, 0.0);
    }

    // trained-pair proxy certificate
    NnAgreementReport rep = certify_nn_agreement(p, size, trainer, derive_seed(seed, {0x22d}));
    CsvWriter cert_csv;
    cert_csv.row({"size", "risk_n_proxy", "risk_2n_proxy", "eps1", "eps2", "D", "bound_rhs", "midpoint_size",
                  "identity_defect", "verdict"});
    cert_csv.row({CsvWriter::num(size), CsvWriter::num(rep.certificate.risk_n),
                  CsvWriter::num(rep.certificate.risk_2n), CsvWriter::num(rep.certificate.eps1),
                  CsvWriter::num(rep.certificate.eps2), CsvWriter::num(rep.certificate.d),
                  CsvWriter::num(rep.certificate.bound_rhs), CsvWriter::num(rep.midpoint_size),
                  CsvWriter::num(std::abs(rep.identity.slack)), to_string(rep.certificate.verdict)});

    art.files["nn_random_pairs.csv"] = pair_csv.str();
    art.files["nn_certificates.csv"] = cert_csv.str();

    closure_all.add(rep.midpoint_size_ok ? 1e-9 - rep.midpoint_eval_defect : -1.0, 0.0);
    art.rows.push_back(closure_all.row("nn-midpoint-closure", "closure-classes", VerdictKind::proved_per_instance));

    BoundRow proxy;
    proxy.bound = "nn-agreement";
    proxy.module_name = "closure-classes";
    proxy.kind = VerdictKind::proxy_consistent;
    proxy.instances = 1;
    proxy.min_slack = rep.certificate.bound_rhs - rep.certificate.d;
    proxy.failures = rep.certificate.verdict == CurveCertificate::Verdict::consistent ? 0 : 1;
    proxy.passed = proxy.failures == 0;
    art.rows.push_back(proxy);

    BoundRow proxy_sc = proxy;
    proxy_sc.bound = "closure-agreement-sc-nn";
    art.rows.push_back(proxy_sc);

    SlackTally identity;
    identity.add(rep.identity.passed() ? std::abs(rep.identity.slack) : -1.0, 0.0);
    art.rows.push_back(identity.row("midpoint-identity", "population-core", VerdictKind::proved_per_instance));
    emit_report(art, "nn", cfg);
    return art;
}

// --- trace matrix ------------------------------------------------------------------------------

Artifacts run_trace_matrix(const std::set<std::string>& disabled_checks) {
    Artifacts art;
    CsvWriter csv;
    csv.row({"bound", "module", "verdict_kind", "check", "status"});
    long missing = 0;
    for (const auto& e : bound_registry()) {
        const bool gone = disabled_checks.count(e.bound) > 0;
        if (gone) ++missing;
        csv.row({e.bound, e.module_name, to_string(e.kind), e.check, gone ? "MISSING" : "OK"});
    }
    art.files["trace_matrix.csv"] = csv.str();

    BoundRow row;
    row.bound = "trace-matrix-coverage";
    row.module_name = "harness-cli";
    row.kind = VerdictKind::proved_per_instance;
    row.instances = static_cast<long>(bound_registry().size());
    row.min_slack = missing > 0 ? -1.0 : 0.0;
    row.failures = missing;
    row.passed = missing == 0;
    art.rows.push_back(row);

    std::ostringstream sum;
    sum << "trace-matrix: " << bound_registry().size() << " in-scope results, " << missing << " missing\n";
    for (const auto& e : bound_registry())
        sum << "  " << (disabled_checks.count(e.bound) ? "MISSING " : "OK      ") << e.bound << " ["
            << e.module_name << ", " << to_string(e.kind) << "] via " << e.check << "\n";
    art.summary = sum.str();
    art.files["trace_matrix_summary.txt"] = art.summary;

    json rep;
    rep["subcommand"] = "trace-matrix";
    json rows = json::array();
    for (const auto& r : art.rows) rows.push_back(row_to_json(r));
    rep["bounds"] = std::move(rows);
    rep["exit_code"] = art.exit_code();
    art.files["trace_matrix_report.json"] = rep.dump(2) + "\n";
    return art;
}

}  // namespace dlab::harness
