#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlab/atoms.hpp"
#include "dlab/population.hpp"
#include "dlab/rng.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

Population uniform_population(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Population p;
    p.feature_dim = 1;
    p.label_dim = 1;
    p.x.resize(n);
    p.y.resize(n);
    p.w.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) p.x[i] = static_cast<double>(i);
    for (auto& v : p.y) v = rng.uniform(0.0, 1.0);
    return p;
}

// orthonormal indicator atom: e_i / sqrt(w_i)
Predictor indicator_atom(const Population& p, std::size_t i) {
    Predictor f = Predictor::zeros(p.size(), 1);
    f.values[i] = 1.0 / std::sqrt(p.w[i]);
    return f;
}

Predictor combine(const Predictor& a, const Predictor& b, double ca, double cb) {
    Predictor f = Predictor::zeros(a.size(), a.dim);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = ca * a.values[i] + cb * b.values[i];
    return f;
}

}  // namespace

TEST_CASE("class construction enforces symmetry, normalization and non-degeneracy") {
    Population p = uniform_population(6, 1);
    Predictor big = indicator_atom(p, 0);
    for (auto& v : big.values) v *= 3.0;  // norm 3, must be rescaled to 1
    Predictor small = indicator_atom(p, 1);
    for (auto& v : small.values) v *= 0.5;  // norm 0.5, kept

    WeakLearnerClass c({big, small}, p);
    CHECK(c.base_count() == 2);
    CHECK(c.atom_count() == 4);
    CHECK(weighted_norm(c.base_atom(0), p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(weighted_norm(c.base_atom(1), p) == doctest::Approx(0.5).epsilon(1e-12));

    Predictor neg = c.atom(2);
    for (std::size_t i = 0; i < neg.values.size(); ++i) CHECK(neg.values[i] == -c.base_atom(0).values[i]);

    Predictor zero = Predictor::zeros(6, 1);
    CHECK_THROWS_AS(WeakLearnerClass({zero}, p), std::invalid_argument);
}

TEST_CASE("atomic norm of zero is zero") {
    Population p = uniform_population(5, 2);
    WeakLearnerClass c({indicator_atom(p, 0), indicator_atom(p, 1)}, p);
    AtomicNormResult r = atomic_norm(Predictor::zeros(5, 1), c, p);
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("atomic norm closed forms on an orthonormal class") {
    Population p = uniform_population(8, 3);
    Predictor g1 = indicator_atom(p, 0);
    Predictor g2 = indicator_atom(p, 1);
    WeakLearnerClass c({g1, g2}, p);

    AtomicNormResult r1 = atomic_norm(g1, c, p);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-10));

    AtomicNormResult r2 = atomic_norm(combine(g1, g2, 1.5, -2.0), c, p);
    CHECK(r2.value == doctest::Approx(3.5).epsilon(1e-10));
    CHECK(r2.coefficients[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(r2.coefficients[1] == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("atomic norm rejects predictors outside the span") {
    Population p = uniform_population(6, 4);
    WeakLearnerClass c({indicator_atom(p, 0)}, p);
    CHECK_THROWS_AS(atomic_norm(indicator_atom(p, 3), c, p), std::runtime_error);
}

TEST_CASE("atomic norm with a dependent atom matches breakpoint and grid oracles") {
    Population p = uniform_population(10, 5);
    Predictor g1 = indicator_atom(p, 0);
    Predictor g2 = indicator_atom(p, 1);
    Predictor g3 = combine(g1, g2, 0.6, -0.8);  // unit norm by orthonormality
    WeakLearnerClass c({g1, g2, g3}, p);

    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        Predictor f = combine(g1, g2, a, b);

        // representations: c1 = a - 0.6 t, c2 = b + 0.8 t, c3 = t.
        auto objective = [&](double t) { return std::abs(a - 0.6 * t) + std::abs(b + 0.8 * t) + std::abs(t); };
        // piecewise-linear: the optimum sits on a breakpoint
        double best = std::min({objective(0.0), objective(a / 0.6), objective(-b / 0.8)});
        // coarse-to-fine grid around the best breakpoint
        double tbest = 0.0, fbest = objective(0.0);
        for (double t : {0.0, a / 0.6, -b / 0.8})
            if (objective(t) < fbest) {
                fbest = objective(t);
                tbest = t;
            }
        double step = 0.1;
        for (int level = 0; level < 6; ++level) {
            for (int i = -20; i <= 20; ++i) {
                const double t = tbest + step * i;
                if (objective(t) < fbest) {
                    fbest = objective(t);
                    tbest = t;
                }
            }
            step *= 0.1;
        }
        best = std::min(best, fbest);

        AtomicNormResult r = atomic_norm(f, c, p);
        CHECK(r.value == doctest::Approx(best).epsilon(1e-6));
    }
}

TEST_CASE("atomic norm is absolutely homogeneous and subadditive") {
    Population p = uniform_population(9, 6);
    Predictor g1 = indicator_atom(p, 0);
    Predictor g2 = indicator_atom(p, 2);
    Predictor g3 = combine(g1, g2, 0.5, 0.5);
    WeakLearnerClass c({g1, g2, g3}, p);

    Rng rng(88);
    for (int trial = 0; trial < 20; ++trial) {
        Predictor f = combine(g1, g2, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        Predictor g = combine(g1, g2, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const double s = rng.uniform(-3.0, 3.0);

        Predictor sf = f;
        for (auto& v : sf.values) v *= s;
        const double nf = atomic_norm(f, c, p).value;
        const double ng = atomic_norm(g, c, p).value;
        const double nsf = atomic_norm(sf, c, p).value;
        CHECK(nsf == doctest::Approx(std::abs(s) * nf).epsilon(1e-8));

        Predictor sum = combine(f, g, 1.0, 1.0);
        CHECK(atomic_norm(sum, c, p).value <= nf + ng + 1e-8);
    }
}

TEST_CASE("tau_star is 1 when the class contains the unit-norm labels") {
    Population p = uniform_population(7, 7);
    // rescale labels to unit population norm
    double y2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) y2 += p.w[i] * p.y[i] * p.y[i];
    for (auto& v : p.y) v /= std::sqrt(y2);

    Predictor y_atom = Predictor::from_labels(p);
    Rng rng(9);
    Predictor noise = Predictor::zeros(7, 1);
    for (auto& v : noise.values) v = rng.gaussian();
    WeakLearnerClass c({y_atom, noise}, p);

    TauStarResult ts = tau_star(c, p);
    CHECK(ts.risk == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ts.tau_star == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(ts.fstar.values[i] == doctest::Approx(p.y[i]).epsilon(1e-9));
}

TEST_CASE("tau_star on an orthonormal class equals the coefficient l1 norm") {
    Population p = uniform_population(8, 8);
    Predictor g1 = indicator_atom(p, 0);
    Predictor g2 = indicator_atom(p, 1);
    // labels supported on the first two points: y = 0.8 g1 - 0.6 g2 plus nothing else
    for (auto& v : p.y) v = 0.0;
    p.y[0] = 0.8 * g1.values[0];
    p.y[1] = -0.6 * g2.values[1];

    WeakLearnerClass c({g1, g2}, p);
    TauStarResult ts = tau_star(c, p);
    CHECK(ts.risk == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ts.tau_star == doctest::Approx(1.4).epsilon(1e-9));
}
