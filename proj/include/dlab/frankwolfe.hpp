#pragma once

#include <utility>
#include <vector>

#include "dlab/atoms.hpp"
#include "dlab/boosting.hpp"
#include "dlab/losses.hpp"
#include "dlab/population.hpp"

namespace dlab {

struct FwStep {
    int t = 0;
    std::size_t atom = 0;
    double atom_atomic_norm = 0.0;  // ||s_t||_A from the LP (an atom can be representable more cheaply than 1)
    double score = 0.0;             // E<-grad, s_t>
    double max_score = 0.0;         // exact maximum over the class
    double eps_used = 0.0;
    double alpha = 0.0;             // 2 / (t + 1)
    double risk_value = 0.0;        // R(f_t)
    double gap = 0.0;               // E_t = R(f_t) - R(K_tau), via the certified lower anchor
    double gap_before = 0.0;        // G(f_{t-1})
    double atomic_norm_f = 0.0;     // ||f_t||_A when tracked, else NaN
};

struct FwTrace {
    double initial_risk = 0.0;
    // Certified interval for R(K_tau): achieved value minus duality gap is the
    // safe (never over-estimating) side used by all bound checks.
    double anchor_risk_upper = 0.0;
    double anchor_risk_lower = 0.0;
    double anchor_gap = 0.0;
    std::vector<FwStep> steps;
};

struct KtauRisk {
    double upper = 0.0;  // risk of the best iterate found
    double lower = 0.0;  // upper - certified duality gap
    double gap = 0.0;
    bool converged = false;
    long iterations = 0;
};

struct FwOptions {
    bool track_iterate_atomic_norm = true;  // LP per iterate; desk-scale runs only
    const KtauRisk* anchor = nullptr;       // precomputed R(K_tau); computed on demand when null
};

// Linear minimization oracle over the class: selects s_t with
// E<-grad, s_t> within eps_t of the exact maximum, under the same three
// selection modes as the boosting oracle.
SqQueryResult fw_linear_oracle(const WeakLearnerClass& c, const Predictor& grad_field, double eps_t,
                               OracleMode mode, const Population& p, Rng& rng);

// Conditional-gradient updates over the atomic-norm ball tau * conv(C) with
// the fixed step alpha_t = 2/(t+1) and g_t = tau * s_t / ||s_t||_A.
std::pair<Predictor, FwTrace> frank_wolfe(const WeakLearnerClass& c, const Population& p, double tau, int k,
                                          const Loss& loss, const SqOracle& oracle, const FwOptions& opt = {});

// G(f) = E<grad, f> + tau * max_g |E<grad, g>|; the sup over the ball is
// attained at a scaled atom by linearity.
double fw_gap(const Predictor& f, const WeakLearnerClass& c, double tau, const Loss& loss, const Population& p);

// min R over tau * conv(C). Squared loss short-circuits through the
// unconstrained span solution when tau >= tau*; otherwise an away-step
// conditional-gradient solve over the coefficient l1-ball, run to a small
// duality gap that certifies the reported interval.
KtauRisk risk_over_Ktau(const WeakLearnerClass& c, double tau, const Loss& loss, const Population& p,
                        double gap_tol = 1e-9, long max_iters = 400000);

struct FwAgreementReport {
    AnchorCertificate anchor_form;  // (4/mu) strongly-convex anchor at R(K_tau)
    double d = 0.0;
    double rate_rhs = 0.0;  // 64 L tau^2 / (mu (k+1)) + (8 tau / (mu (k+1))) (sum eps + sum eps')
    bool rate_ok = false;
    // For squared loss: |sc anchor bound - factor-2 anchor bound|, else 0.
    double sq_crosscheck_diff = 0.0;
    bool passed(const Tolerances& tol = {}) const { return anchor_form.passed(tol) && rate_ok; }
};

FwAgreementReport certify_fw_agreement(const Predictor& f1, const FwTrace& trace1, const Predictor& f2,
                                       const FwTrace& trace2, double tau, int k, const Loss& loss,
                                       const WeakLearnerClass& c, const Population& p, double tol = 1e-9);

// (4/mu)-anchor certificate for a strongly convex loss; disagreement field and
// slack are populated like the squared-loss anchor check.
AnchorCertificate check_sc_anchor_bound(const Predictor& f1, const Predictor& f2, double anchor_risk,
                                        const Loss& loss, const Population& p);

}  // namespace dlab
