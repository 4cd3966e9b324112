#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dlab/atoms.hpp"
#include "dlab/population.hpp"
#include "dlab/rng.hpp"

namespace dlab {

enum class OracleMode { exact, adversarial_floor, random_feasible };

// Weak-learning oracle: returns any atom whose residual correlation is within
// eps_t of the class maximum. The exact mode returns the argmax (lowest index
// on ties); adversarial_floor returns the worst feasible atom; random_feasible
// a seeded uniform draw among feasible atoms.
struct SqOracle {
    OracleMode mode = OracleMode::exact;
    std::vector<double> eps_schedule;  // empty = all zeros; shorter than k = last value repeats
    std::uint64_t seed = 0;

    double eps_at(int t) const {  // t is 1-based
        if (eps_schedule.empty()) return 0.0;
        const std::size_t i = static_cast<std::size_t>(t - 1);
        return i < eps_schedule.size() ? eps_schedule[i] : eps_schedule.back();
    }
};

struct SqQueryResult {
    std::size_t atom_index = 0;
    double corr = 0.0;      // E<r, g> for the returned atom
    double max_corr = 0.0;  // exact maximum over the class
    double eps_used = 0.0;
};

SqQueryResult sq_query(const SqOracle& oracle, const Predictor& residual, int t, const WeakLearnerClass& c,
                       const Population& p, Rng& rng);

// Selection over a precomputed score vector; shared by the boosting
// correlation oracle and the FW linear oracle.
SqQueryResult oracle_select(const std::vector<double>& scores, OracleMode mode, double eps, Rng& rng);

struct BoostStep {
    int t = 0;
    std::size_t atom = 0;
    double corr = 0.0;
    double max_corr = 0.0;
    double eps_used = 0.0;
    double alpha = 0.0;
    double mse_value = 0.0;       // MSE(f_t)
    double gap = 0.0;             // E_t = MSE(f_t) - R(V(C))
    double progress = 0.0;        // MSE(f_{t-1}) - MSE(f_t)
    double progress_floor = 0.0;  // corr^2
};

struct BoostTrace {
    double initial_mse = 0.0;
    double anchor_risk = 0.0;  // R(V(C)), exact
    std::vector<BoostStep> steps;
};

// Exact-line-search gradient boosting from f_0 = 0. The returned trace records
// every per-iteration quantity needed by the certification routines.
std::pair<Predictor, BoostTrace> gradient_boost(const WeakLearnerClass& c, const Population& p, int k,
                                                const SqOracle& oracle);

struct GbRateReport {
    double tau_star = 0.0;
    // E_{t-1} - E_t >= ((E_{t-1} / (2 tau*) - eps_t)_+)^2 per step
    double max_recurrence_violation = 0.0;
    // E_t <= 8 (tau*)^2 / t + sum_{s<=t} eps_s^2 for every t
    double max_rate_violation = 0.0;
    // M_exact(f_{t-1}) >= E_{t-1} / (2 tau*) per step
    double max_dual_violation = 0.0;
    bool recurrence_ok = false;
    bool rate_ok = false;
    bool dual_ok = false;
    bool passed() const { return recurrence_ok && rate_ok && dual_ok; }
};

GbRateReport certify_gb_rate(const BoostTrace& trace, double tau_star_value, const SqOracle& oracle,
                             double tol = 1e-9);

struct GbTwoRunReport {
    AnchorCertificate anchor_form;  // via R(V(C))
    double d = 0.0;
    double rate_rhs = 0.0;  // 32 (tau*)^2 / k + 2 (sum eps^2 + sum eps'^2)
    bool rate_ok = false;
    bool passed(const Tolerances& tol = {}) const { return anchor_form.passed(tol) && rate_ok; }
};

GbTwoRunReport certify_gb_two_run(const Predictor& f1, const BoostTrace& trace1, const Predictor& f2,
                                  const BoostTrace& trace2, double tau_star_value, const Population& p,
                                  double tol = 1e-9);

}  // namespace dlab
