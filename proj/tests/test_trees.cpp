#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlab/population.hpp"
#include "dlab/rng.hpp"
#include "dlab/trees.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

Population grid_population(int nx, int ny, std::uint64_t seed) {
    Rng rng(seed);
    Population p;
    p.feature_dim = ny > 0 ? 2 : 1;
    p.label_dim = 1;
    const int total = ny > 0 ? nx * ny : nx;
    p.w.assign(total, 1.0 / total);
    for (int i = 0; i < nx; ++i) {
        if (ny > 0) {
            for (int j = 0; j < ny; ++j) {
                p.x.push_back(i);
                p.x.push_back(j);
                p.y.push_back(rng.uniform(0.0, 1.0));
            }
        } else {
            p.x.push_back(i);
            p.y.push_back(rng.uniform(0.0, 1.0));
        }
    }
    return p;
}

// Independent recursive evaluator for the oracle checks.
double naive_eval(const RegressionTree& t, int node, const double* x) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(node)];
    if (n.coord < 0) return n.value[0];
    return x[n.coord] <= n.threshold ? naive_eval(t, n.left, x) : naive_eval(t, n.right, x);
}

RegressionTree random_tree(int feature_dim, int depth, std::uint64_t seed) {
    Rng rng(seed);
    RegressionTree t;
    t.label_dim = 1;
    struct B {
        static int build(RegressionTree& t, Rng& rng, int feature_dim, int depth) {
            const int idx = static_cast<int>(t.nodes.size());
            t.nodes.emplace_back();
            if (depth == 0 || rng.uniform() < 0.3) {
                t.nodes[static_cast<std::size_t>(idx)].value = {rng.uniform(0.0, 1.0)};
                return idx;
            }
            t.nodes[static_cast<std::size_t>(idx)].coord = static_cast<int>(rng.index(feature_dim));
            t.nodes[static_cast<std::size_t>(idx)].threshold = rng.uniform(0.0, 10.0);
            const int l = build(t, rng, feature_dim, depth - 1);
            const int r = build(t, rng, feature_dim, depth - 1);
            t.nodes[static_cast<std::size_t>(idx)].left = l;
            t.nodes[static_cast<std::size_t>(idx)].right = r;
            return idx;
        }
    };
    B::build(t, rng, feature_dim, depth);
    return t;
}

}  // namespace

TEST_CASE("tree evaluation basics") {
    RegressionTree leaf;
    leaf.label_dim = 1;
    leaf.nodes.push_back(TreeNode{-1, 0.0, -1, -1, {0.42}});
    double out = 0.0;
    const double x = 3.0;
    leaf.eval(&x, &out);
    CHECK(out == 0.42);

    // depth-1 split at the midpoint of a 2-point population
    Population p = grid_population(2, 0, 1);
    p.y = {0.2, 0.8};
    auto [t, risk] = optimal_tree(p, 1);
    CHECK(risk == doctest::Approx(0.0).epsilon(1e-15));
    Predictor f = t.compile(p);
    CHECK(f.values[0] == doctest::Approx(0.2));
    CHECK(f.values[1] == doctest::Approx(0.8));
}

TEST_CASE("random trees match the naive recursive evaluator") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        RegressionTree t = random_tree(2, 4, 100 + s);
        Rng rng(200 + s);
        for (int probe = 0; probe < 50; ++probe) {
            double x[2] = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
            double out = 0.0;
            t.eval(x, &out);
            CHECK(out == naive_eval(t, 0, x));
        }
    }
}

TEST_CASE("depth-0 optimum is the clamped weighted mean") {
    Population p = grid_population(5, 0, 2);
    auto [t, risk] = optimal_tree(p, 0);
    double mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mean += p.w[i] * p.y[i];
    double var = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) var += p.w[i] * (p.y[i] - mean) * (p.y[i] - mean);
    CHECK(t.nodes[0].value[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(risk == doctest::Approx(var).epsilon(1e-12));

    // out-of-range labels are clamped
    Population q = grid_population(1, 0, 3);
    q.y = {1.5};
    auto [t2, risk2] = optimal_tree(q, 0);
    CHECK(t2.nodes[0].value[0] == 1.0);
    CHECK(risk2 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("full separation drives the risk to zero") {
    Population p = grid_population(8, 0, 4);
    auto [t, risk] = optimal_tree(p, 3);  // 2^3 = 8 leaves
    CHECK(risk == doctest::Approx(0.0).epsilon(1e-14));
    (void)t;
}

TEST_CASE("depth 1 equals brute force over the three thresholds") {
    Population p = grid_population(4, 0, 5);
    auto [t, risk] = optimal_tree(p, 1);

    auto sse = [&](int from, int to) {
        double wsum = 0.0, mean = 0.0;
        for (int i = from; i < to; ++i) {
            wsum += p.w[static_cast<std::size_t>(i)];
            mean += p.w[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
        }
        mean /= wsum;
        double s = 0.0;
        for (int i = from; i < to; ++i)
            s += p.w[static_cast<std::size_t>(i)] * (p.y[static_cast<std::size_t>(i)] - mean) *
                 (p.y[static_cast<std::size_t>(i)] - mean);
        return s;
    };
    double best = sse(0, 4);
    for (int cut = 1; cut < 4; ++cut) best = std::min(best, sse(0, cut) + sse(cut, 4));
    CHECK(risk == doctest::Approx(best).epsilon(1e-12));
    (void)t;
}

TEST_CASE("optimal risks are monotone non-increasing in depth") {
    Population p = grid_population(4, 4, 6);
    double prev = 1e300;
    for (int d = 0; d <= 4; ++d) {
        auto [t, risk] = optimal_tree(p, d);
        CHECK(risk <= prev);
        CHECK(t.depth() <= d);
        prev = risk;
    }
}

TEST_CASE("budget violations name the offending dimension") {
    Population p = grid_population(4, 4, 7);
    CHECK_THROWS_WITH_AS(optimal_tree(p, 7), doctest::Contains("depth"), std::runtime_error);

    Population wide;
    wide.feature_dim = 4;
    wide.label_dim = 1;
    wide.x = {0, 0, 0, 0};
    wide.y = {0.5};
    wide.w = {1.0};
    CHECK_THROWS_WITH_AS(optimal_tree(wide, 1), doctest::Contains("feature dimension"), std::runtime_error);

    Population many = grid_population(40, 0, 8);
    CHECK_THROWS_WITH_AS(optimal_tree(many, 1), doctest::Contains("distinct"), std::runtime_error);
}

TEST_CASE("greedy matches optimal at depth 0 and on separable instances") {
    Population p = grid_population(6, 0, 9);
    auto [opt0, r0] = optimal_tree(p, 0);
    RegressionTree g0 = greedy_tree(p, 0, 1);
    CHECK(mse(g0.compile(p), p) == doctest::Approx(r0).epsilon(1e-12));
    (void)opt0;

    // step labels are separable by one threshold; greedy finds it immediately
    Population sep = grid_population(8, 0, 10);
    for (std::size_t i = 0; i < sep.size(); ++i) sep.y[i] = i < 4 ? 0.2 : 0.8;
    RegressionTree g = greedy_tree(sep, 1, 2);
    auto [opt, ropt] = optimal_tree(sep, 1);
    CHECK(mse(g.compile(sep), sep) == doctest::Approx(ropt).epsilon(1e-12));
    CHECK(ropt == doctest::Approx(0.0).epsilon(1e-14));
    (void)opt;
}

TEST_CASE("greedy is strictly suboptimal on the xor instance") {
    Population p;
    p.feature_dim = 2;
    p.label_dim = 1;
    p.x = {0, 0, 0, 1, 1, 0, 1, 1};
    p.y = {0.0, 1.0, 1.0, 0.0};
    p.w.assign(4, 0.25);

    auto [opt, ropt] = optimal_tree(p, 2);
    CHECK(ropt == doctest::Approx(0.0).epsilon(1e-14));
    RegressionTree g = greedy_tree(p, 2, 3, 2);
    const double eps = mse(g.compile(p), p) - ropt;
    CHECK(eps > 0.0);
    (void)opt;
}

TEST_CASE("tree midpoint: identical trees, depth bookkeeping, probe-grid equality") {
    RegressionTree t1 = random_tree(2, 3, 42);
    RegressionTree mid_same = tree_midpoint(t1, t1);
    Rng rng(5);
    for (int probe = 0; probe < 100; ++probe) {
        double x[2] = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        double a = 0.0, b = 0.0;
        t1.eval(x, &a);
        mid_same.eval(x, &b);
        CHECK(b == doctest::Approx(a).epsilon(1e-15));
    }

    for (std::uint64_t s = 0; s < 10; ++s) {
        RegressionTree a = random_tree(2, 3, 500 + s);
        RegressionTree b = random_tree(2, 3, 600 + s);
        RegressionTree m = tree_midpoint(a, b);
        CHECK(m.depth() <= a.depth() + b.depth());
        Rng prng(700 + s);
        for (int probe = 0; probe < 200; ++probe) {
            double x[2] = {prng.uniform(-1.0, 11.0), prng.uniform(-1.0, 11.0)};
            double va = 0.0, vb = 0.0, vm = 0.0;
            a.eval(x, &va);
            b.eval(x, &vb);
            m.eval(x, &vm);
            CHECK(vm == doctest::Approx(0.5 * (va + vb)).epsilon(1e-12));
            CHECK(vm >= 0.0);
            CHECK(vm <= 1.0);
        }
    }
}

TEST_CASE("tree JSON round trip preserves evaluation") {
    RegressionTree t = random_tree(2, 3, 77);
    RegressionTree u = tree_from_json_text(tree_to_json_text(t));
    Rng rng(6);
    for (int probe = 0; probe < 50; ++probe) {
        double x[2] = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        double a = 0.0, b = 0.0;
        t.eval(x, &a);
        u.eval(x, &b);
        CHECK(a == b);
    }
}
