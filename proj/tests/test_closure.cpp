#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlab/closure.hpp"
#include "dlab/population.hpp"
#include "dlab/rng.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

Population grid2d(int nx, int ny, std::uint64_t seed) {
    Rng rng(seed);
    Population p;
    p.feature_dim = 2;
    p.label_dim = 1;
    p.w.assign(static_cast<std::size_t>(nx * ny), 1.0 / (nx * ny));
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            p.x.push_back(i);
            p.x.push_back(j);
            p.y.push_back(rng.uniform(0.0, 1.0));
        }
    return p;
}

}  // namespace

TEST_CASE("separable instance: all risks zero, D zero") {
    Population p;
    p.feature_dim = 1;
    p.label_dim = 1;
    p.x = {0, 1};
    p.y = {0.1, 0.9};
    p.w = {0.5, 0.5};
    TreeAgreementReport rep = certify_tree_agreement(p, 1, {});
    CHECK(rep.certificate.risk_n == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.certificate.risk_2n == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.certificate.d == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.certificate.verdict == CurveCertificate::Verdict::pass);
}

TEST_CASE("2-D grid instance passes with exact tags at depth 2") {
    Population p = grid2d(4, 4, 3);
    TreeAgreementReport rep = certify_tree_agreement(p, 2, {});
    CHECK(rep.certificate.tag_n == RiskTag::exact);
    CHECK(rep.certificate.tag_2n == RiskTag::exact);
    CHECK(rep.certificate.verdict == CurveCertificate::Verdict::pass);
    CHECK(rep.certificate.d <= rep.certificate.bound_rhs + 1e-9);
    CHECK(rep.certificate.eps1 >= -1e-12);
    CHECK(rep.certificate.eps2 >= -1e-12);

    // identity emitted alongside, and the depth bookkeeping of the grafted tree
    CHECK(rep.identity.passed());
    CHECK(rep.midpoint_depth_ok);
    CHECK(rep.midpoint_eval_defect <= 1e-12);

    // squared loss as a mu = 2 strongly convex loss: the (8/mu) form coincides
    CHECK(rep.sc_bound_rhs == doctest::Approx(rep.certificate.bound_rhs).epsilon(1e-12));
}

TEST_CASE("tree certificates across fixture depths") {
    for (int depth : {1, 2, 3}) {
        Population p = grid2d(4, 3, 100 + static_cast<std::uint64_t>(depth));
        TreeAgreementReport rep = certify_tree_agreement(p, depth, {});
        CHECK(rep.certificate.verdict == CurveCertificate::Verdict::pass);
        CHECK(rep.certificate.risk_2n <= rep.certificate.risk_n + 1e-15);
        CHECK(rep.identity.passed());
    }
}

TEST_CASE("tree certification rejects out-of-range labels") {
    Population p = grid2d(3, 3, 5);
    p.y[0] = 1.5;
    CHECK_THROWS_AS(certify_tree_agreement(p, 1, {}), std::invalid_argument);
}

TEST_CASE("nn certificate: proxy tags, size bookkeeping, identity") {
    Population p;
    Rng rng(6);
    p.feature_dim = 1;
    p.label_dim = 1;
    p.w.assign(8, 1.0 / 8.0);
    for (int i = 0; i < 8; ++i) {
        p.x.push_back(i / 7.0);
        p.y.push_back(rng.uniform(0.0, 1.0));
    }
    NnTrainConfig cfg;
    cfg.size_budget = 3;
    cfg.steps = 1500;
    cfg.restarts = 2;
    NnAgreementReport rep = certify_nn_agreement(p, 3, cfg, 99);
    CHECK(rep.certificate.tag_n == RiskTag::upper_bound_proxy);
    CHECK(rep.certificate.tag_2n == RiskTag::upper_bound_proxy);
    CHECK((rep.certificate.verdict == CurveCertificate::Verdict::consistent ||
           rep.certificate.verdict == CurveCertificate::Verdict::inconsistent));
    CHECK(rep.midpoint_size == 6);
    CHECK(rep.midpoint_size_ok);
    CHECK(rep.midpoint_eval_defect <= 1e-9);
    CHECK(rep.identity.passed());
}

TEST_CASE("identical trainer seeds give zero disagreement") {
    Population p;
    p.feature_dim = 1;
    p.label_dim = 1;
    p.w.assign(5, 0.2);
    p.x = {0, 0.25, 0.5, 0.75, 1.0};
    p.y = {0.1, 0.4, 0.5, 0.6, 0.9};
    NnTrainConfig cfg;
    cfg.size_budget = 2;
    cfg.steps = 800;
    auto [n1, r1] = train_nn(p, cfg, derive_seed(42, {1}));
    auto [n2, r2] = train_nn(p, cfg, derive_seed(42, {1}));
    CHECK(disagreement(n1.compile(p), n2.compile(p), p) == 0.0);
    CHECK(r1 == r2);
}
