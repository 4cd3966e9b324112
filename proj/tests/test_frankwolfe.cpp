#include <algorithm>
#include <cmath>
#include <vector>

#include "dlab/frankwolfe.hpp"
#include "dlab/population.hpp"
#include "dlab/rng.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

Population uniform_population(std::size_t n, std::uint64_t seed, int label_dim = 1, bool simplex_labels = false) {
    Rng rng(seed);
    Population p;
    p.feature_dim = 1;
    p.label_dim = label_dim;
    p.x.resize(n);
    p.y.resize(n * static_cast<std::size_t>(label_dim));
    p.w.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) p.x[i] = static_cast<double>(i);
    if (simplex_labels) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int c = 0; c < label_dim; ++c) {
                p.y[i * label_dim + c] = -std::log(1.0 - rng.uniform());
                s += p.y[i * label_dim + c];
            }
            for (int c = 0; c < label_dim; ++c) p.y[i * label_dim + c] /= s;
        }
    } else {
        for (auto& v : p.y) v = rng.uniform(0.0, 1.0);
    }
    return p;
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

Predictor indicator_atom(const Population& p, std::size_t i) {
    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    f.at(i)[0] = 1.0 / std::sqrt(p.w[i]);
    return f;
}

}  // namespace

TEST_CASE("tau = 0 keeps the iterate at zero") {
    Population p = uniform_population(8, 1);
    WeakLearnerClass c = random_class(p, 4, 2);
    SquaredLoss loss(1);
    SqOracle oracle;
    auto [f, trace] = frank_wolfe(c, p, 0.0, 5, loss, oracle);
    for (double v : f.values) CHECK(v == 0.0);
    for (const auto& s : trace.steps) CHECK(s.risk_value == doctest::Approx(trace.initial_risk).epsilon(1e-12));
}

TEST_CASE("anchor-gap rate with zero oracle error on an orthonormal instance") {
    Population p = uniform_population(6, 3);
    for (auto& v : p.y) v = 0.0;
    Predictor e1 = indicator_atom(p, 1);
    p.y[1] = 0.9 * e1.values[1];  // y = 0.9 e1, norm 0.9
    WeakLearnerClass c({e1, indicator_atom(p, 2)}, p);
    SquaredLoss loss(1);
    SqOracle oracle;
    const double tau = 0.9;
    auto [f, trace] = frank_wolfe(c, p, tau, 24, loss, oracle);
    const double L = loss.smoothness();
    for (const auto& s : trace.steps)
        CHECK(s.gap <= 8.0 * L * tau * tau / static_cast<double>(s.t + 1) + 1e-8);
    (void)f;
}

TEST_CASE("per-step progress inequality holds along the trace") {
    Population p = uniform_population(10, 4);
    WeakLearnerClass c = random_class(p, 5, 5);
    SquaredLoss loss(1);
    const double tau = 0.8;
    for (OracleMode mode : {OracleMode::exact, OracleMode::adversarial_floor, OracleMode::random_feasible}) {
        SqOracle oracle;
        oracle.mode = mode;
        oracle.eps_schedule = {0.01};
        oracle.seed = 11;
        auto [f, trace] = frank_wolfe(c, p, tau, 32, loss, oracle);
        const double L = loss.smoothness();
        double prev_risk = trace.initial_risk;
        for (const auto& s : trace.steps) {
            const double rhs =
                s.alpha * (s.gap_before - tau * s.eps_used) - 2.0 * L * tau * tau * s.alpha * s.alpha;
            CHECK(prev_risk - s.risk_value >= rhs - 1e-9);
            prev_risk = s.risk_value;
        }
        (void)f;
    }
}

TEST_CASE("iterates stay in the atomic-norm ball") {
    Population p = uniform_population(9, 6);
    WeakLearnerClass c = random_class(p, 4, 7);
    SquaredLoss loss(1);
    SqOracle oracle;
    oracle.mode = OracleMode::random_feasible;
    oracle.eps_schedule = {0.05};
    oracle.seed = 3;
    const double tau = 0.6;
    auto [f, trace] = frank_wolfe(c, p, tau, 16, loss, oracle);
    for (const auto& s : trace.steps) CHECK(s.atomic_norm_f <= tau + 1e-8);
    (void)f;
}

TEST_CASE("fw linear oracle: zero field, exact scan, adversarial feasibility") {
    Population p = uniform_population(8, 20);
    WeakLearnerClass c = random_class(p, 5, 21);
    SquaredLoss loss(1);
    Rng rng(22);

    // zero gradient field: every atom is feasible, scores all zero
    Predictor zero = Predictor::zeros(8, 1);
    SqQueryResult z = fw_linear_oracle(c, zero, 0.3, OracleMode::random_feasible, p, rng);
    CHECK(z.corr == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(z.max_corr == doctest::Approx(0.0).epsilon(1e-14));

    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng prng(derive_seed(500, {trial}));
        Predictor f = Predictor::zeros(8, 1);
        for (auto& v : f.values) v = prng.gaussian();
        Predictor grad = Predictor::zeros(8, 1);
        for (std::size_t i = 0; i < p.size(); ++i) loss.gradient(p.label(i), f.at(i), grad.at(i));

        // brute-force scan over the symmetric class
        double best = -1e300;
        for (std::size_t a = 0; a < c.atom_count(); ++a) best = std::max(best, -pop_dot(grad, c.atom(a), p));

        SqQueryResult exact = fw_linear_oracle(c, grad, 0.0, OracleMode::exact, p, rng);
        CHECK(exact.corr == doctest::Approx(best).epsilon(1e-12));

        SqQueryResult adv = fw_linear_oracle(c, grad, 0.25, OracleMode::adversarial_floor, p, rng);
        CHECK(adv.corr >= best - 0.25 - 1e-12);
    }
}

TEST_CASE("fw_gap: zero at the unconstrained minimizer, exact scan matches a grid") {
    Population p = uniform_population(7, 8);
    WeakLearnerClass c = random_class(p, 3, 9);
    SquaredLoss loss(1);
    const double tau = 0.5;

    // gradient field vanishes at f = y, so G(f) = 0
    Predictor y = Predictor::from_labels(p);
    CHECK(fw_gap(y, c, tau, loss, p) == doctest::Approx(0.0).epsilon(1e-12));

    // random f: linear objective over the ball attains its sup at a vertex, so
    // a dense grid over signed convex combinations can only match the scan
    Rng rng(10);
    Predictor f = Predictor::zeros(p.size(), 1);
    for (auto& v : f.values) v = rng.gaussian();
    const double scan = fw_gap(f, c, tau, loss, p);

    Predictor grad = Predictor::zeros(p.size(), 1);
    for (std::size_t i = 0; i < p.size(); ++i) loss.gradient(p.label(i), f.at(i), grad.at(i));
    const double base = pop_dot(grad, f, p);
    double grid_best = -1e300;
    const int steps = 20;
    for (int i = -steps; i <= steps; ++i) {
        for (int j = -steps + std::abs(i); j <= steps - std::abs(i); ++j) {
            const double l1 = static_cast<double>(i) / steps, l2 = static_cast<double>(j) / steps;
            const int rem = steps - std::abs(i) - std::abs(j);
            for (int ksgn = -1; ksgn <= 1; ++ksgn) {
                const double l3 = ksgn * static_cast<double>(rem) / steps;
                double dot = 0.0;
                for (std::size_t pt = 0; pt < p.size(); ++pt) {
                    const double z = tau * (l1 * c.base_atom(0).values[pt] + l2 * c.base_atom(1).values[pt] +
                                            l3 * c.base_atom(2).values[pt]);
                    dot += p.w[pt] * grad.values[pt] * z;
                }
                grid_best = std::max(grid_best, base - dot);
            }
        }
    }
    CHECK(scan == doctest::Approx(grid_best).epsilon(1e-6));
    CHECK(scan >= grid_best - 1e-12);
}

TEST_CASE("risk over the ball: trivial tau, tau >= tau*, and the soft-threshold oracle") {
    Population p = uniform_population(8, 11);
    SquaredLoss loss(1);

    WeakLearnerClass c = random_class(p, 4, 12);
    KtauRisk zero = risk_over_Ktau(c, 0.0, loss, p);
    CHECK(zero.upper == doctest::Approx(mse(Predictor::zeros(8, 1), p)).epsilon(1e-13));

    TauStarResult ts = tau_star(c, p);
    KtauRisk big = risk_over_Ktau(c, ts.tau_star + 0.5, loss, p);
    CHECK(big.upper == doctest::Approx(ts.risk).epsilon(1e-8));

    // orthonormal 2-atom class: the constrained solution is the l1 projection
    // of the unconstrained coefficients (soft thresholding)
    Population q = uniform_population(6, 13);
    Predictor g1 = indicator_atom(q, 0), g2 = indicator_atom(q, 1);
    WeakLearnerClass oc({g1, g2}, q);
    const double b1 = pop_dot(Predictor::from_labels(q), g1, q);
    const double b2 = pop_dot(Predictor::from_labels(q), g2, q);
    const double tau = 0.5 * (std::abs(b1) + std::abs(b2));  // strictly inside the interesting regime

    // soft threshold: c_i = sign(b_i) max(|b_i| - lambda, 0) with sum |c_i| = tau
    double lo = 0.0, hi = std::max(std::abs(b1), std::abs(b2));
    for (int it = 0; it < 200; ++it) {
        const double lam = 0.5 * (lo + hi);
        const double s = std::max(std::abs(b1) - lam, 0.0) + std::max(std::abs(b2) - lam, 0.0);
        (s > tau ? lo : hi) = lam;
    }
    const double lam = 0.5 * (lo + hi);
    const double c1 = (b1 > 0 ? 1 : -1) * std::max(std::abs(b1) - lam, 0.0);
    const double c2 = (b2 > 0 ? 1 : -1) * std::max(std::abs(b2) - lam, 0.0);
    double oracle_risk = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double pred = c1 * g1.values[i] + c2 * g2.values[i];
        oracle_risk += q.w[i] * (q.y[i] - pred) * (q.y[i] - pred);
    }
    KtauRisk kt = risk_over_Ktau(oc, tau, loss, q);
    CHECK(kt.upper == doctest::Approx(oracle_risk).epsilon(1e-6));
    CHECK(kt.gap <= 1e-9);
}

TEST_CASE("agreement certificates: identical runs, squared-loss cross-check, eps pairs") {
    Population p = uniform_population(10, 14);
    WeakLearnerClass c = random_class(p, 5, 15);
    SquaredLoss loss(1);
    const double tau = 0.7;
    const int k = 16;
    KtauRisk anchor = risk_over_Ktau(c, tau, loss, p);
    FwOptions opt;
    opt.track_iterate_atomic_norm = false;
    opt.anchor = &anchor;

    SqOracle exact;
    auto [f1, t1] = frank_wolfe(c, p, tau, k, loss, exact, opt);
    auto [f2, t2] = frank_wolfe(c, p, tau, k, loss, exact, opt);
    FwAgreementReport same = certify_fw_agreement(f1, t1, f2, t2, tau, k, loss, c, p);
    CHECK(same.d == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(same.passed());
    CHECK(same.sq_crosscheck_diff <= 1e-10);

    for (std::uint64_t pair = 0; pair < 10; ++pair) {
        SqOracle o1;
        o1.mode = OracleMode::random_feasible;
        o1.eps_schedule = {0.01};
        o1.seed = derive_seed(2000, {pair, 1});
        SqOracle o2;
        o2.mode = OracleMode::adversarial_floor;
        o2.eps_schedule = {0.01};
        o2.seed = derive_seed(2000, {pair, 2});
        auto [a, ta] = frank_wolfe(c, p, tau, k, loss, o1, opt);
        auto [b, tb] = frank_wolfe(c, p, tau, k, loss, o2, opt);
        FwAgreementReport rep = certify_fw_agreement(a, ta, b, tb, tau, k, loss, c, p);
        CHECK(rep.passed());
        CHECK(rep.sq_crosscheck_diff <= 1e-10);
    }
}

TEST_CASE("agreement certificates under the regularized cross-entropy loss") {
    Population p = uniform_population(8, 16, 3, true);
    WeakLearnerClass c = random_class(p, 4, 17);
    SoftmaxCrossEntropyLoss loss(3, 1.0);
    const double tau = 0.5;
    const int k = 12;
    KtauRisk anchor = risk_over_Ktau(c, tau, loss, p, 1e-9);
    FwOptions opt;
    opt.track_iterate_atomic_norm = false;
    opt.anchor = &anchor;

    for (std::uint64_t pair = 0; pair < 5; ++pair) {
        SqOracle o1;
        o1.mode = OracleMode::random_feasible;
        o1.eps_schedule = {0.01};
        o1.seed = derive_seed(3000, {pair, 1});
        SqOracle o2;
        o2.mode = OracleMode::exact;
        auto [a, ta] = frank_wolfe(c, p, tau, k, loss, o1, opt);
        auto [b, tb] = frank_wolfe(c, p, tau, k, loss, o2, opt);
        FwAgreementReport rep = certify_fw_agreement(a, ta, b, tb, tau, k, loss, c, p);
        CHECK(rep.passed());

        // rate bound per run
        const double L = loss.smoothness();
        for (const auto& s : ta.steps) {
            double eps_sum = 0.0;
            for (const auto& u : ta.steps) {
                if (u.t <= s.t) eps_sum += u.eps_used;
            }
            CHECK(s.gap <= 8.0 * L * tau * tau / static_cast<double>(s.t + 1) +
                               2.0 * tau / static_cast<double>(s.t + 1) * eps_sum + 1e-8);
        }
    }
}

TEST_CASE("fw gap recurrence along traces") {
    Population p = uniform_population(9, 18);
    WeakLearnerClass c = random_class(p, 6, 19);
    SquaredLoss loss(1);
    const double tau = 0.4;
    SqOracle oracle;
    oracle.eps_schedule = {0.005};
    oracle.mode = OracleMode::adversarial_floor;
    auto [f, trace] = frank_wolfe(c, p, tau, 24, loss, oracle, FwOptions{false, nullptr});
    const double L = loss.smoothness();
    double prev_gap = trace.initial_risk - trace.anchor_risk_lower;
    for (const auto& s : trace.steps) {
        const double rhs = s.alpha * (prev_gap - tau * s.eps_used) - 2.0 * L * tau * tau * s.alpha * s.alpha;
        CHECK(prev_gap - s.gap >= rhs - 1e-9);
        prev_gap = s.gap;
    }
    (void)f;
}
