#include <cmath>
#include <vector>

#include "dlab/boosting.hpp"
#include "dlab/population.hpp"
#include "dlab/rng.hpp"
#include "dlab/stacking.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

Population uniform_population(std::size_t n, std::uint64_t seed, int label_dim = 1) {
    Rng rng(seed);
    Population p;
    p.feature_dim = 1;
    p.label_dim = label_dim;
    p.x.resize(n);
    p.y.resize(n * static_cast<std::size_t>(label_dim));
    p.w.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) p.x[i] = static_cast<double>(i);
    for (auto& v : p.y) v = rng.uniform(0.0, 1.0);
    return p;
}

Predictor indicator_atom(const Population& p, std::size_t i) {
    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    f.at(i)[0] = 1.0 / std::sqrt(p.w[i]);
    return f;
}

WeakLearnerClass random_class(const Population& p, std::size_t n_atoms, std::uint64_t seed) {
    std::vector<Predictor> atoms;
    for (std::size_t j = 0; j < n_atoms; ++j) {
        Rng rng(derive_seed(seed, {j}));
        Predictor g = Predictor::zeros(p.size(), p.label_dim);
        for (auto& v : g.values) v = rng.gaussian();
        atoms.push_back(std::move(g));
    }
    return WeakLearnerClass(std::move(atoms), p);
}

double brute_force_max_corr(const Predictor& r, const WeakLearnerClass& c, const Population& p) {
    double best = -1e300;
    for (std::size_t a = 0; a < c.atom_count(); ++a) best = std::max(best, pop_dot(r, c.atom(a), p));
    return best;
}

}  // namespace

TEST_CASE("sq_query with zero residual returns zero correlation") {
    Population p = uniform_population(6, 1);
    WeakLearnerClass c = random_class(p, 4, 2);
    SqOracle oracle;
    oracle.eps_schedule = {0.5};
    Rng rng(3);
    Predictor zero = Predictor::zeros(6, 1);
    SqQueryResult q = sq_query(oracle, zero, 1, c, p, rng);
    CHECK(q.corr == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q.max_corr == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exact oracle equals the brute-force scan; feasibility holds in every mode") {
    Population p = uniform_population(10, 4);
    WeakLearnerClass c = random_class(p, 6, 5);
    Rng rng(17);
    for (std::uint64_t t = 0; t < 30; ++t) {
        Rng prng(derive_seed(100, {t}));
        Predictor r = Predictor::zeros(10, 1);
        for (auto& v : r.values) v = prng.gaussian();

        SqOracle exact;
        SqQueryResult qe = sq_query(exact, r, 1, c, p, rng);
        CHECK(qe.corr == doctest::Approx(brute_force_max_corr(r, c, p)).epsilon(1e-12));

        for (OracleMode mode : {OracleMode::adversarial_floor, OracleMode::random_feasible}) {
            SqOracle o;
            o.mode = mode;
            o.eps_schedule = {0.8};
            SqQueryResult q = sq_query(o, r, 1, c, p, rng);
            CHECK(q.corr >= brute_force_max_corr(r, c, p) - 0.8 - 1e-12);
        }
    }
}

TEST_CASE("one-step boosting on an orthonormal atom recovers the projection") {
    Population p = uniform_population(5, 6);
    for (auto& v : p.y) v = 0.0;
    Predictor e1 = indicator_atom(p, 1);
    p.y[1] = 0.7 * e1.values[1];  // y = 0.7 e1

    WeakLearnerClass c({e1}, p);
    SqOracle oracle;
    auto [f, trace] = gradient_boost(c, p, 1, oracle);
    CHECK(mse(f, p) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(trace.steps[0].alpha == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("residual orthogonal to every atom leaves the iterate unchanged") {
    Population p = uniform_population(6, 7);
    for (auto& v : p.y) v = 0.0;
    p.y[4] = 1.0;  // supported off the atoms below
    WeakLearnerClass c({indicator_atom(p, 0), indicator_atom(p, 1)}, p);
    SqOracle oracle;
    auto [f, trace] = gradient_boost(c, p, 3, oracle);
    for (double v : f.values) CHECK(v == 0.0);
    for (const auto& s : trace.steps) CHECK(s.alpha == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("per-step progress equals corr^2/|g|^2 and dominates corr^2") {
    Population p = uniform_population(12, 8);
    WeakLearnerClass c = random_class(p, 8, 9);
    SqOracle oracle;
    auto [f, trace] = gradient_boost(c, p, 20, oracle);
    double prev = trace.initial_mse;
    for (const auto& s : trace.steps) {
        CHECK(s.mse_value <= prev + 1e-12);  // non-increasing
        const Predictor g = c.atom(s.atom);
        const double gsq = pop_dot(g, g, p);
        CHECK(s.progress == doctest::Approx(s.corr * s.corr / gsq).epsilon(1e-10));
        CHECK(s.progress >= s.progress_floor - 1e-10);
        prev = s.mse_value;
    }
    (void)f;
}

TEST_CASE("rate, recurrence and dual certificates pass for every oracle mode") {
    Population p = uniform_population(14, 10);
    WeakLearnerClass c = random_class(p, 10, 11);
    TauStarResult ts = tau_star(c, p);

    SUBCASE("zero oracle error") {
        SqOracle oracle;
        auto [f, trace] = gradient_boost(c, p, 40, oracle);
        GbRateReport rep = certify_gb_rate(trace, ts.tau_star, oracle);
        CHECK(rep.rate_ok);
        CHECK(rep.recurrence_ok);
        CHECK(rep.dual_ok);
        // zero-eps special case: E_t <= 8 tau*^2 / t
        for (const auto& s : trace.steps)
            CHECK(s.gap <= 8.0 * ts.tau_star * ts.tau_star / static_cast<double>(s.t) + 1e-9);
        (void)f;
    }

    SUBCASE("eps = 0.01 schedules, all modes") {
        for (OracleMode mode : {OracleMode::exact, OracleMode::adversarial_floor, OracleMode::random_feasible}) {
            SqOracle oracle;
            oracle.mode = mode;
            oracle.eps_schedule = {0.01};
            oracle.seed = 55;
            auto [f, trace] = gradient_boost(c, p, 40, oracle);
            GbRateReport rep = certify_gb_rate(trace, ts.tau_star, oracle);
            CHECK(rep.rate_ok);
            CHECK(rep.recurrence_ok);
            CHECK(rep.dual_ok);
            (void)f;
        }
    }
}

TEST_CASE("two-run agreement bound holds and zero-eps identical runs agree exactly") {
    Population p = uniform_population(16, 12);
    WeakLearnerClass c = random_class(p, 9, 13);
    TauStarResult ts = tau_star(c, p);

    SqOracle exact;
    auto [f1, t1] = gradient_boost(c, p, 32, exact);
    auto [f2, t2] = gradient_boost(c, p, 32, exact);
    GbTwoRunReport same = certify_gb_two_run(f1, t1, f2, t2, ts.tau_star, p);
    CHECK(same.d == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(same.passed());

    SqOracle adv;
    adv.mode = OracleMode::adversarial_floor;
    adv.eps_schedule = {0.02};
    adv.seed = 77;
    auto [f3, t3] = gradient_boost(c, p, 32, adv);
    GbTwoRunReport rep = certify_gb_two_run(f1, t1, f3, t3, ts.tau_star, p);
    CHECK(rep.passed());

    // anchor form is never looser than the identity value
    AnchorCertificate ident = check_midpoint_identity(f1, f3, p);
    const double identity_value = 2.0 * (ident.mse1 + ident.mse2 - 2.0 * ident.mse_mid);
    const double anchor_rhs = rep.anchor_form.slack + rep.anchor_form.disagreement;
    CHECK(anchor_rhs >= identity_value - 1e-9);
}

TEST_CASE("dual bound with brute-force scan at every iterate") {
    Population p = uniform_population(10, 14);
    WeakLearnerClass c = random_class(p, 7, 15);
    TauStarResult ts = tau_star(c, p);
    SqOracle oracle;
    oracle.mode = OracleMode::random_feasible;
    oracle.eps_schedule = {0.05};
    oracle.seed = 5;
    auto [f, trace] = gradient_boost(c, p, 24, oracle);

    Predictor cur = Predictor::zeros(p.size(), 1);
    double cur_mse = trace.initial_mse;
    for (const auto& s : trace.steps) {
        Predictor resid = Predictor::from_labels(p);
        for (std::size_t i = 0; i < resid.values.size(); ++i) resid.values[i] -= cur.values[i];
        const double m_exact = brute_force_max_corr(resid, c, p);
        CHECK(m_exact >= (cur_mse - trace.anchor_risk) / (2.0 * ts.tau_star) - 1e-9);
        const Predictor g = c.atom(s.atom);
        for (std::size_t i = 0; i < cur.values.size(); ++i) cur.values[i] += s.alpha * g.values[i];
        cur_mse = s.mse_value;
    }
    (void)f;
}
