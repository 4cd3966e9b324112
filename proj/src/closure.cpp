#include "dlab/closure.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/rng.hpp"

namespace dlab {

std::string to_string(CurveCertificate::Verdict v) {
    switch (v) {
        case CurveCertificate::Verdict::pass: return "pass";
        case CurveCertificate::Verdict::fail: return "fail";
        case CurveCertificate::Verdict::consistent: return "consistent";
        case CurveCertificate::Verdict::inconsistent: return "inconsistent";
    }
    return "unknown";
}

TreeAgreementReport certify_tree_agreement(const Population& p, int depth, const TreeTrainerConfig& cfg,
                                           const TreeBudget& budget) {
    for (std::size_t i = 0; i < p.y.size(); ++i) {
        if (p.y[i] < 0.0 || p.y[i] > 1.0)
            throw std::invalid_argument("certify_tree_agreement: labels must lie in [0,1] per coordinate");
    }

    auto [opt_n, risk_n] = optimal_tree(p, depth, budget);
    auto [opt_2n, risk_2n] = optimal_tree(p, 2 * depth, budget);

    RegressionTree t1 = greedy_tree(p, depth, cfg.seed1, cfg.restarts);
    RegressionTree t2 = greedy_tree(p, depth, cfg.seed2, cfg.restarts);
    const Predictor f1 = t1.compile(p);
    const Predictor f2 = t2.compile(p);

    TreeAgreementReport rep;
    CurveCertificate& cert = rep.certificate;
    cert.klass = "tree";
    cert.level_n = depth;
    cert.level_2n = 2 * depth;
    cert.risk_n = risk_n;
    cert.risk_2n = risk_2n;
    cert.tag_n = RiskTag::exact;
    cert.tag_2n = RiskTag::exact;
    cert.eps1 = mse(f1, p) - risk_n;
    cert.eps2 = mse(f2, p) - risk_n;
    cert.d = disagreement(f1, f2, p);
    const double eps = std::max(cert.eps1, cert.eps2);
    cert.bound_rhs = 4.0 * (risk_n - risk_2n + eps);
    cert.verdict =
        cert.d <= cert.bound_rhs + 1e-9 ? CurveCertificate::Verdict::pass : CurveCertificate::Verdict::fail;

    rep.identity = check_midpoint_identity(f1, f2, p);
    rep.sc_bound_rhs = (8.0 / 2.0) * (risk_n - risk_2n + eps);  // squared loss as mu = 2

    RegressionTree mid = tree_midpoint(t1, t2);
    rep.midpoint_depth = mid.depth();
    rep.midpoint_depth_ok = rep.midpoint_depth <= t1.depth() + t2.depth();
    const Predictor fm = mid.compile(p);
    double defect = 0.0;
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        defect = std::max(defect, std::abs(fm.values[i] - 0.5 * (f1.values[i] + f2.values[i])));
    rep.midpoint_eval_defect = defect;
    return rep;
}

NnAgreementReport certify_nn_agreement(const Population& p, int size, const NnTrainConfig& trainer,
                                       std::uint64_t seed) {
    NnTrainConfig cfg = trainer;
    cfg.size_budget = size;
    auto [n1, risk1] = train_nn(p, cfg, derive_seed(seed, {1}));
    auto [n2, risk2] = train_nn(p, cfg, derive_seed(seed, {2}));
    NnTrainConfig cfg2 = cfg;
    cfg2.size_budget = 2 * size;
    auto [n_big, risk_2n_proxy] = train_nn(p, cfg2, derive_seed(seed, {3}));

    const Predictor f1 = n1.compile(p);
    const Predictor f2 = n2.compile(p);

    NnAgreementReport rep;
    CurveCertificate& cert = rep.certificate;
    cert.klass = "nn";
    cert.level_n = size;
    cert.level_2n = 2 * size;
    // Best found risks are only upper bounds on the class infima, so the
    // certificate is proxy-tagged and never claims a proof.
    cert.risk_n = std::min(risk1, risk2);
    cert.risk_2n = std::min(risk_2n_proxy, cert.risk_n);
    cert.tag_n = RiskTag::upper_bound_proxy;
    cert.tag_2n = RiskTag::upper_bound_proxy;
    cert.eps1 = risk1 - cert.risk_n;
    cert.eps2 = risk2 - cert.risk_n;
    cert.d = disagreement(f1, f2, p);
    const double eps = std::max(cert.eps1, cert.eps2);
    cert.bound_rhs = 4.0 * (cert.risk_n - cert.risk_2n + eps);
    cert.verdict = cert.d <= cert.bound_rhs + 1e-9 ? CurveCertificate::Verdict::consistent
                                                   : CurveCertificate::Verdict::inconsistent;

    rep.identity = check_midpoint_identity(f1, f2, p);

    ReluNetwork mid = nn_midpoint(n1, n2);
    rep.midpoint_size = mid.size();
    rep.midpoint_size_ok = mid.size() == n1.size() + n2.size();
    const Predictor fm = mid.compile(p);
    double defect = 0.0;
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        defect = std::max(defect, std::abs(fm.values[i] - 0.5 * (f1.values[i] + f2.values[i])));
    rep.midpoint_eval_defect = defect;
    return rep;
}

}  // namespace dlab
