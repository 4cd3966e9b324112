#include "dlab/frankwolfe.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dlab/kernels.hpp"
#include "dlab/stacking.hpp"

namespace dlab {

namespace {

// grad_i = grad_p L(y_i, f_i), packed as a predictor-shaped field
Predictor gradient_field(const Predictor& f, const Loss& loss, const Population& p) {
    Predictor g = Predictor::zeros(p.size(), p.label_dim);
    for (std::size_t i = 0; i < p.size(); ++i) loss.gradient(p.label(i), f.at(i), g.at(i));
    return g;
}

// scores[a] = E<-grad, atom_a>; negated atoms mirror the base scores
std::vector<double> atom_scores(const Predictor& grad, const WeakLearnerClass& c, const Population& p) {
    const std::size_t nb = c.base_count();
    std::vector<double> s(2 * nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const double v = -pop_dot(grad, c.base_atom(j), p);
        s[j] = v;
        s[nb + j] = -v;
    }
    return s;
}

// Away-step conditional gradient over the coefficient l1-ball of radius tau,
// treating the ball as conv{0, +-tau e_j}. Returns the coefficient vector and
// the final duality gap.
struct L1BallSolve {
    std::vector<double> coeffs;
    double risk = 0.0;
    double gap = 0.0;
    long iterations = 0;
    bool converged = false;
};

L1BallSolve minimize_over_l1_ball(const WeakLearnerClass& c, double tau, const Loss& loss, const Population& p,
                                  double gap_tol, long max_iters) {
    const std::size_t nb = c.base_count();
    const std::size_t n = p.size();
    const int d = p.label_dim;
    const bool quadratic = loss.name() == "squared";

    // vertex ids: 0 = origin, 1..2nb = +-tau e_j (j = (v-1) % nb, sign +1 for v <= nb)
    std::vector<double> lambda(2 * nb + 1, 0.0);
    lambda[0] = 1.0;
    std::vector<double> coeffs(nb, 0.0);

    Predictor pred = Predictor::zeros(n, d);          // current prediction values
    std::vector<double> grad_c(nb, 0.0);              // objective gradient in coefficient space
    Predictor grad_p = Predictor::zeros(n, d);        // pointwise loss gradients

    // Precomputed quadratic form for squared loss: risk = y2 - 2 b.c + c' A c.
    std::vector<double> gram, lin;
    if (quadratic) {
        gram.resize(nb * nb);
        lin.resize(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = i; j < nb; ++j) {
                const double v = pop_dot(c.base_atom(i), c.base_atom(j), p);
                gram[i * nb + j] = v;
                gram[j * nb + i] = v;
            }
            lin[i] = kernels::dot(p.y.data(), c.base_atom(i).values.data(), p.w.data(), n, d);
        }
    }

    auto risk_at = [&]() {
        if (quadratic) {
            Predictor f = Predictor::zeros(n, d);
            for (std::size_t j = 0; j < nb; ++j)
                if (coeffs[j] != 0.0)
                    for (std::size_t i = 0; i < f.values.size(); ++i)
                        f.values[i] += coeffs[j] * c.base_atom(j).values[i];
            return mse(f, p);
        }
        return population_risk(loss, pred, p);
    };

    auto compute_grad_c = [&]() {
        if (quadratic) {
            for (std::size_t i = 0; i < nb; ++i) {
                double s = -2.0 * lin[i];
                for (std::size_t j = 0; j < nb; ++j) s += 2.0 * gram[i * nb + j] * coeffs[j];
                grad_c[i] = s;
            }
            return;
        }
        for (std::size_t i = 0; i < n; ++i) loss.gradient(p.label(i), pred.at(i), grad_p.at(i));
        for (std::size_t j = 0; j < nb; ++j)
            grad_c[j] = kernels::dot(grad_p.values.data(), c.base_atom(j).values.data(), p.w.data(), n, d);
    };

    auto apply_direction = [&](const std::vector<double>& dir, double eta) {
        for (std::size_t j = 0; j < nb; ++j) {
            if (dir[j] == 0.0) continue;
            coeffs[j] += eta * dir[j];
            const auto& av = c.base_atom(j).values;
            const double step = eta * dir[j];
            for (std::size_t i = 0; i < av.size(); ++i) pred.values[i] += step * av[i];
        }
    };

    // derivative of eta -> R(c + eta * dir); dir_pred is the direction mapped
    // into prediction space (computed once per search)
    Predictor dir_pred = Predictor::zeros(n, d);
    auto dir_derivative = [&](const std::vector<double>& dir, double eta) {
        double s = 0.0;
        if (quadratic) {
            for (std::size_t j = 0; j < nb; ++j) {
                if (dir[j] == 0.0) continue;
                double row = -2.0 * lin[j];
                for (std::size_t l = 0; l < nb; ++l) row += 2.0 * gram[j * nb + l] * (coeffs[l] + eta * dir[l]);
                s += row * dir[j];
            }
            return s;
        }
        std::vector<double> q(d), g(d);
        for (std::size_t i = 0; i < n; ++i) {
            for (int cc = 0; cc < d; ++cc) q[cc] = pred.at(i)[cc] + eta * dir_pred.at(i)[cc];
            loss.gradient(p.label(i), q.data(), g.data());
            double qd = 0.0;
            for (int cc = 0; cc < d; ++cc) qd += dir_pred.at(i)[cc] * g[cc];
            s += p.w[i] * qd;
        }
        return s;
    };

    auto line_search = [&](const std::vector<double>& dir, double eta_max) {
        if (!quadratic) {
            std::fill(dir_pred.values.begin(), dir_pred.values.end(), 0.0);
            for (std::size_t j = 0; j < nb; ++j) {
                if (dir[j] == 0.0) continue;
                const auto& av = c.base_atom(j).values;
                for (std::size_t i = 0; i < av.size(); ++i) dir_pred.values[i] += dir[j] * av[i];
            }
        }
        const double d0 = dir_derivative(dir, 0.0);
        if (d0 >= 0.0) return 0.0;
        if (dir_derivative(dir, eta_max) <= 0.0) return eta_max;
        double lo = 0.0, hi = eta_max;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dir_derivative(dir, mid) <= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    L1BallSolve out;
    std::vector<double> dir(nb, 0.0);
    double gap = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < max_iters; ++it) {
        compute_grad_c();

        // FW vertex: best of origin and +-tau e_j
        std::size_t jmax = 0;
        double amax = std::abs(grad_c[0]);
        for (std::size_t j = 1; j < nb; ++j) {
            if (std::abs(grad_c[j]) > amax) {
                amax = std::abs(grad_c[j]);
                jmax = j;
            }
        }
        double gc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) gc += grad_c[j] * coeffs[j];
        const double fw_vertex_value = std::min(0.0, -tau * amax);
        gap = gc - fw_vertex_value;
        if (gap <= gap_tol) break;

        // away vertex: active vertex with the largest <grad, v>
        std::size_t v_away = 0;
        double away_value = lambda[0] > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
        for (std::size_t v = 1; v <= 2 * nb; ++v) {
            if (lambda[v] <= 0.0) continue;
            const std::size_t j = (v - 1) % nb;
            const double sgn = v <= nb ? 1.0 : -1.0;
            const double val = sgn * tau * grad_c[j];
            if (val > away_value) {
                away_value = val;
                v_away = v;
            }
        }

        const double fw_improve = gc - fw_vertex_value;
        const double away_improve = away_value - gc;
        const bool do_away = away_improve > fw_improve && lambda[v_away] < 1.0 - 1e-15;

        std::fill(dir.begin(), dir.end(), 0.0);
        std::size_t v_fw = 0;
        if (!do_away) {
            // direction = v_fw - c
            if (fw_vertex_value < 0.0) {
                v_fw = (grad_c[jmax] > 0.0 ? nb : 0) + jmax + 1;  // -tau e_j if grad > 0
                const double sgn = grad_c[jmax] > 0.0 ? -1.0 : 1.0;
                dir[jmax] = sgn * tau;
            }
            for (std::size_t j = 0; j < nb; ++j) dir[j] -= coeffs[j];
            const double eta = line_search(dir, 1.0);
            if (eta <= 0.0) break;
            for (std::size_t v = 0; v <= 2 * nb; ++v) lambda[v] *= (1.0 - eta);
            lambda[v_fw] += eta;
            apply_direction(dir, eta);
        } else {
            // direction = c - v_away
            const std::size_t j = (v_away - 1) % nb;
            const double sgn = v_away <= nb ? 1.0 : -1.0;
            for (std::size_t l = 0; l < nb; ++l) dir[l] = coeffs[l];
            if (v_away >= 1) dir[j] -= sgn * tau;
            const double lam = lambda[v_away];
            const double eta_max = lam / (1.0 - lam);
            const double eta = line_search(dir, eta_max);
            if (eta <= 0.0) break;
            for (std::size_t v = 0; v <= 2 * nb; ++v) lambda[v] *= (1.0 + eta);
            lambda[v_away] -= eta;
            if (lambda[v_away] < 1e-15) lambda[v_away] = 0.0;
            apply_direction(dir, eta);
        }
    }

    out.coeffs = coeffs;
    out.risk = risk_at();
    out.gap = gap;
    out.iterations = it;
    out.converged = gap <= gap_tol;
    return out;
}

}  // namespace

SqQueryResult fw_linear_oracle(const WeakLearnerClass& c, const Predictor& grad_field, double eps_t,
                               OracleMode mode, const Population& p, Rng& rng) {
    return oracle_select(atom_scores(grad_field, c, p), mode, eps_t, rng);
}

double fw_gap(const Predictor& f, const WeakLearnerClass& c, double tau, const Loss& loss, const Population& p) {
    Predictor grad = gradient_field(f, loss, p);
    const std::vector<double> scores = atom_scores(grad, c, p);
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    return pop_dot(grad, f, p) + tau * max_score;
}

KtauRisk risk_over_Ktau(const WeakLearnerClass& c, double tau, const Loss& loss, const Population& p,
                        double gap_tol, long max_iters) {
    if (tau < 0.0) throw std::invalid_argument("risk_over_Ktau: tau must be >= 0");
    KtauRisk out;
    if (tau == 0.0) {
        const double r = population_risk(loss, Predictor::zeros(p.size(), p.label_dim), p);
        return {r, r, 0.0, true, 0};
    }
    if (loss.name() == "squared") {
        // When the unconstrained span optimum fits in the ball the anchor risk
        // is exact; otherwise fall through to the constrained solve.
        TauStarResult ts = tau_star(c, p);
        if (ts.tau_star <= tau + 1e-12) return {ts.risk, ts.risk, 0.0, true, 0};
    }
    L1BallSolve sol = minimize_over_l1_ball(c, tau, loss, p, gap_tol, max_iters);
    out.upper = sol.risk;
    out.lower = sol.risk - std::max(sol.gap, 0.0);
    out.gap = sol.gap;
    out.converged = sol.converged;
    out.iterations = sol.iterations;
    return out;
}

std::pair<Predictor, FwTrace> frank_wolfe(const WeakLearnerClass& c, const Population& p, double tau, int k,
                                          const Loss& loss, const SqOracle& oracle, const FwOptions& opt) {
    if (tau < 0.0) throw std::invalid_argument("frank_wolfe: tau must be >= 0");
    if (k < 1) throw std::invalid_argument("frank_wolfe: k must be >= 1");

    FwTrace trace;
    KtauRisk anchor = opt.anchor ? *opt.anchor : risk_over_Ktau(c, tau, loss, p);
    trace.anchor_risk_upper = anchor.upper;
    trace.anchor_risk_lower = anchor.lower;
    trace.anchor_gap = anchor.gap;

    // ||s||_A per base atom, cached; the LP can be below 1 when an atom is a
    // cheap combination of others.
    std::vector<double> atom_norm_cache(c.base_count(), -1.0);
    auto atom_atomic = [&](std::size_t atom_index) {
        const std::size_t j = c.base_index_of(atom_index);
        if (atom_norm_cache[j] < 0.0) atom_norm_cache[j] = atomic_norm(c.base_atom(j), c, p).value;
        return atom_norm_cache[j];
    };

    Predictor f = Predictor::zeros(p.size(), p.label_dim);
    trace.initial_risk = population_risk(loss, f, p);

    Rng rng(derive_seed(oracle.seed, {0xfeedu}));
    trace.steps.reserve(static_cast<std::size_t>(k));

    for (int t = 1; t <= k; ++t) {
        Predictor grad = gradient_field(f, loss, p);
        SqQueryResult q = fw_linear_oracle(c, grad, oracle.eps_at(t), oracle.mode, p, rng);

        FwStep step;
        step.t = t;
        step.atom = q.atom_index;
        step.score = q.corr;
        step.max_score = q.max_corr;
        step.eps_used = q.eps_used;
        step.gap_before = pop_dot(grad, f, p) + tau * q.max_corr;
        step.alpha = 2.0 / static_cast<double>(t + 1);

        const double s_norm = atom_atomic(q.atom_index);
        const double scale = tau / s_norm;  // g_t = tau s_t / ||s_t||_A
        const Predictor s_t = c.atom(q.atom_index);
        for (std::size_t i = 0; i < f.values.size(); ++i)
            f.values[i] = (1.0 - step.alpha) * f.values[i] + step.alpha * scale * s_t.values[i];

        step.atom_atomic_norm = s_norm;
        step.risk_value = population_risk(loss, f, p);
        step.gap = step.risk_value - trace.anchor_risk_lower;
        step.atomic_norm_f =
            opt.track_iterate_atomic_norm ? atomic_norm(f, c, p).value : std::numeric_limits<double>::quiet_NaN();
        trace.steps.push_back(step);
    }
    return {std::move(f), std::move(trace)};
}

AnchorCertificate check_sc_anchor_bound(const Predictor& f1, const Predictor& f2, double anchor_risk,
                                        const Loss& loss, const Population& p) {
    AnchorCertificate cert;
    cert.bound_name = BoundName::sc_midpoint_anchor;
    cert.mse1 = population_risk(loss, f1, p);
    cert.mse2 = population_risk(loss, f2, p);
    cert.mse_mid = population_risk(loss, midpoint(f1, f2), p);
    cert.disagreement = disagreement(f1, f2, p);
    const double c4 = 4.0 / loss.mu();
    cert.slack = c4 * (cert.mse1 - anchor_risk) + c4 * (cert.mse2 - anchor_risk) - cert.disagreement;
    return cert;
}

FwAgreementReport certify_fw_agreement(const Predictor& f1, const FwTrace& trace1, const Predictor& f2,
                                       const FwTrace& trace2, double tau, int k, const Loss& loss,
                                       const WeakLearnerClass& c, const Population& p, double tol) {
    (void)c;
    FwAgreementReport rep;
    const double anchor = std::min(trace1.anchor_risk_lower, trace2.anchor_risk_lower);
    rep.anchor_form = check_sc_anchor_bound(f1, f2, anchor, loss, p);
    rep.anchor_form.bound_name = BoundName::fw_two_run;
    rep.d = rep.anchor_form.disagreement;

    double eps_sum = 0.0;
    for (const FwStep& s : trace1.steps) eps_sum += s.eps_used;
    for (const FwStep& s : trace2.steps) eps_sum += s.eps_used;
    const double mu = loss.mu();
    const double L = loss.smoothness();
    rep.rate_rhs = 64.0 * L * tau * tau / (mu * (k + 1)) + 8.0 * tau / (mu * (k + 1)) * eps_sum;
    rep.rate_ok = rep.d <= rep.rate_rhs + tol;

    if (loss.name() == "squared") {
        const AnchorCertificate sq = check_anchor_bound(f1, f2, anchor, p);
        const double sc_rhs = rep.anchor_form.slack + rep.anchor_form.disagreement;
        const double sq_rhs = sq.slack + sq.disagreement;
        rep.sq_crosscheck_diff = std::abs(sc_rhs - sq_rhs);
    }
    return rep;
}

}  // namespace dlab
