#include "dlab/boosting.hpp"

#include <cmath>
#include <stdexcept>

#include "dlab/kernels.hpp"
#include "dlab/stacking.hpp"

namespace dlab {

namespace {

// Correlations of the residual field with every atom; negated atoms mirror
// the base correlations, so only base dot products are computed.
std::vector<double> atom_correlations(const Predictor& field, const WeakLearnerClass& c, const Population& p) {
    const std::size_t nb = c.base_count();
    std::vector<double> corr(2 * nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const double v = pop_dot(field, c.base_atom(j), p);
        corr[j] = v;
        corr[nb + j] = -v;
    }
    return corr;
}

}  // namespace

SqQueryResult oracle_select(const std::vector<double>& scores, OracleMode mode, double eps, Rng& rng) {
    SqQueryResult out;
    out.eps_used = eps;
    out.max_corr = scores[0];
    std::size_t arg = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > out.max_corr) {
            out.max_corr = scores[i];
            arg = i;
        }
    }
    if (mode == OracleMode::exact || eps <= 0.0) {
        out.atom_index = arg;
        out.corr = out.max_corr;
        return out;
    }

    const double floor = out.max_corr - eps;
    if (mode == OracleMode::adversarial_floor) {
        std::size_t worst = arg;
        double worst_score = out.max_corr;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= floor && scores[i] < worst_score) {
                worst_score = scores[i];
                worst = i;
            }
        }
        out.atom_index = worst;
    } else {  // random_feasible
        std::vector<std::size_t> feasible;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= floor) feasible.push_back(i);
        out.atom_index = feasible[rng.index(feasible.size())];
    }
    out.corr = scores[out.atom_index];
    return out;
}

SqQueryResult sq_query(const SqOracle& oracle, const Predictor& residual, int t, const WeakLearnerClass& c,
                       const Population& p, Rng& rng) {
    const std::vector<double> corr = atom_correlations(residual, c, p);
    return oracle_select(corr, oracle.mode, oracle.eps_at(t), rng);
}

std::pair<Predictor, BoostTrace> gradient_boost(const WeakLearnerClass& c, const Population& p, int k,
                                                const SqOracle& oracle) {
    if (k < 1) throw std::invalid_argument("gradient_boost: k must be >= 1");

    SpanModel span_best = ols_span(c.base_atoms(), p);

    BoostTrace trace;
    trace.anchor_risk = span_best.risk;

    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    Predictor residual = Predictor::from_labels(p);
    double current_mse = mse(f, p);
    trace.initial_mse = current_mse;

    Rng rng(derive_seed(oracle.seed, {0xb005u}));
    trace.steps.reserve(static_cast<std::size_t>(k));

    for (int t = 1; t <= k; ++t) {
        SqQueryResult q = sq_query(oracle, residual, t, c, p, rng);
        const Predictor g = c.atom(q.atom_index);
        const double g_sq = kernels::sq_norm(g.values.data(), p.w.data(), p.size(), g.dim);
        if (g_sq < 1e-20) throw std::logic_error("gradient_boost: class invariant violated (zero-norm atom)");
        const double alpha = q.corr / g_sq;

        for (std::size_t i = 0; i < f.values.size(); ++i) {
            f.values[i] += alpha * g.values[i];
            residual.values[i] -= alpha * g.values[i];
        }
        const double new_mse = mse(f, p);

        BoostStep step;
        step.t = t;
        step.atom = q.atom_index;
        step.corr = q.corr;
        step.max_corr = q.max_corr;
        step.eps_used = q.eps_used;
        step.alpha = alpha;
        step.mse_value = new_mse;
        step.gap = new_mse - trace.anchor_risk;
        step.progress = current_mse - new_mse;
        step.progress_floor = q.corr * q.corr;
        trace.steps.push_back(step);
        current_mse = new_mse;
    }
    return {std::move(f), std::move(trace)};
}

GbRateReport certify_gb_rate(const BoostTrace& trace, double tau_star_value, const SqOracle& oracle, double tol) {
    GbRateReport rep;
    rep.tau_star = tau_star_value;
    const double ts2 = tau_star_value * tau_star_value;

    double eps_sq_sum = 0.0;
    double prev_gap = trace.initial_mse - trace.anchor_risk;
    for (const BoostStep& s : trace.steps) {
        const double eps_t = oracle.eps_at(s.t);
        eps_sq_sum += eps_t * eps_t;

        const double floor_arg = prev_gap / (2.0 * tau_star_value) - eps_t;
        const double floor = floor_arg > 0.0 ? floor_arg * floor_arg : 0.0;
        rep.max_recurrence_violation = std::max(rep.max_recurrence_violation, floor - (prev_gap - s.gap));

        const double rate_rhs = 8.0 * ts2 / static_cast<double>(s.t) + eps_sq_sum;
        rep.max_rate_violation = std::max(rep.max_rate_violation, s.gap - rate_rhs);

        rep.max_dual_violation =
            std::max(rep.max_dual_violation, prev_gap / (2.0 * tau_star_value) - s.max_corr);

        prev_gap = s.gap;
    }
    rep.recurrence_ok = rep.max_recurrence_violation <= tol;
    rep.rate_ok = rep.max_rate_violation <= tol;
    rep.dual_ok = rep.max_dual_violation <= tol;
    return rep;
}

GbTwoRunReport certify_gb_two_run(const Predictor& f1, const BoostTrace& trace1, const Predictor& f2,
                                  const BoostTrace& trace2, double tau_star_value, const Population& p, double tol) {
    if (trace1.steps.size() != trace2.steps.size())
        throw std::invalid_argument("certify_gb_two_run: runs used different iteration counts");

    GbTwoRunReport rep;
    rep.anchor_form = check_anchor_bound(f1, f2, trace1.anchor_risk, p);
    rep.anchor_form.bound_name = BoundName::boosting_two_run;
    rep.d = rep.anchor_form.disagreement;

    double eps_sq = 0.0;
    for (const BoostStep& s : trace1.steps) eps_sq += s.eps_used * s.eps_used;
    for (const BoostStep& s : trace2.steps) eps_sq += s.eps_used * s.eps_used;
    const double k = static_cast<double>(trace1.steps.size());
    rep.rate_rhs = 32.0 * tau_star_value * tau_star_value / k + 2.0 * eps_sq;
    rep.rate_ok = rep.d <= rep.rate_rhs + tol;
    return rep;
}

}  // namespace dlab
