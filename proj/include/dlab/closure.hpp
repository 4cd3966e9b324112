#pragma once

#include <cstdint>
#include <string>

#include "dlab/population.hpp"
#include "dlab/relunet.hpp"
#include "dlab/trees.hpp"

namespace dlab {

enum class RiskTag { exact, upper_bound_proxy };

// Local learning-curve certificate for a midpoint-closed hierarchy. A "pass"
// verdict requires exact level risks; proxy-tagged risks can only yield
// "consistent".
struct CurveCertificate {
    std::string klass;  // "tree" or "nn"
    int level_n = 0;
    int level_2n = 0;
    double risk_n = 0.0;
    double risk_2n = 0.0;
    RiskTag tag_n = RiskTag::exact;
    RiskTag tag_2n = RiskTag::exact;
    double eps1 = 0.0;  // measured suboptimality of the two trained models
    double eps2 = 0.0;
    double d = 0.0;
    double bound_rhs = 0.0;  // 4 (risk_n - risk_2n + max(eps1, eps2))
    enum class Verdict { pass, fail, consistent, inconsistent } verdict = Verdict::fail;
};

std::string to_string(CurveCertificate::Verdict v);

struct TreeTrainerConfig {
    int restarts = 2;
    std::uint64_t seed1 = 1;
    std::uint64_t seed2 = 2;
};

struct TreeAgreementReport {
    CurveCertificate certificate;
    AnchorCertificate identity;   // midpoint identity on the trained pair
    double sc_bound_rhs = 0.0;    // (8/mu) form with mu = 2; equals bound_rhs
    int midpoint_depth = 0;
    bool midpoint_depth_ok = false;    // depth <= 2 * depth(level)
    double midpoint_eval_defect = 0.0; // max |midpoint tree - avg| over the support
};

// Trains two greedy depth-d trees with different seeds, computes the exact DP
// risks at depths d and 2d, and certifies the agreement bound with measured
// suboptimalities.
TreeAgreementReport certify_tree_agreement(const Population& p, int depth, const TreeTrainerConfig& cfg,
                                           const TreeBudget& budget = {});

struct NnAgreementReport {
    CurveCertificate certificate;  // proxy-tagged; reported consistent, not proved
    AnchorCertificate identity;
    int midpoint_size = 0;
    bool midpoint_size_ok = false;      // size = size1 + size2
    double midpoint_eval_defect = 0.0;  // max |nn_midpoint - avg| over the support
};

NnAgreementReport certify_nn_agreement(const Population& p, int size, const NnTrainConfig& trainer,
                                       std::uint64_t seed);

}  // namespace dlab
