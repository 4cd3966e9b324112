#include "dlab/atoms.hpp"

#include <cmath>
#include <stdexcept>

#include "dlab/linalg.hpp"
#include "dlab/lp.hpp"
#include "dlab/stacking.hpp"

namespace dlab {

WeakLearnerClass::WeakLearnerClass(std::vector<Predictor> base_atoms, const Population& p,
                                   std::vector<std::string> names) {
    if (base_atoms.empty()) throw std::invalid_argument("weak learner class: no atoms");
    if (!names.empty() && names.size() != base_atoms.size())
        throw std::invalid_argument("weak learner class: names/atoms size mismatch");
    base_.reserve(base_atoms.size());
    for (std::size_t j = 0; j < base_atoms.size(); ++j) {
        Predictor g = std::move(base_atoms[j]);
        if (g.dim != p.label_dim || g.size() != p.size())
            throw std::invalid_argument("weak learner class: atom shape mismatch");
        const double nrm = weighted_norm(g, p);
        if (nrm < 1e-14) throw std::invalid_argument("weak learner class: zero atom at index " + std::to_string(j));
        if (nrm > 1.0) {
            const double inv = 1.0 / nrm;
            for (double& v : g.values) v *= inv;
        }
        base_.push_back(std::move(g));
    }
    if (names.empty()) {
        names_.reserve(base_.size());
        for (std::size_t j = 0; j < base_.size(); ++j) names_.push_back("g" + std::to_string(j));
    } else {
        names_ = std::move(names);
    }
}

Predictor WeakLearnerClass::atom(std::size_t atom_index) const {
    Predictor g = base_[base_index_of(atom_index)];
    if (atom_index >= base_.size())
        for (double& v : g.values) v = -v;
    return g;
}

std::string WeakLearnerClass::atom_name(std::size_t atom_index) const {
    const std::string& b = names_[base_index_of(atom_index)];
    return atom_index < base_.size() ? b : "-" + b;
}

AtomicNormResult atomic_norm(const Predictor& f, const WeakLearnerClass& c, const Population& p, double span_tol) {
    const std::size_t nb = c.base_count();
    const std::size_t rows = f.values.size();
    if (f.dim != c.label_dim() || f.size() != c.support_size())
        throw std::invalid_argument("atomic_norm: predictor shape mismatch");

    // Span membership check in the population norm.
    {
        std::vector<double> gram(nb * nb), rhs(nb);
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = i; j < nb; ++j) {
                const double v = pop_dot(c.base_atom(i), c.base_atom(j), p);
                gram[i * nb + j] = v;
                gram[j * nb + i] = v;
            }
            rhs[i] = pop_dot(f, c.base_atom(i), p);
        }
        std::vector<double> coef = linalg::min_norm_psd_solve(nb, gram, rhs);
        Predictor approx = Predictor::zeros(f.size(), f.dim);
        for (std::size_t j = 0; j < nb; ++j)
            for (std::size_t i = 0; i < f.values.size(); ++i)
                approx.values[i] += coef[j] * c.base_atom(j).values[i];
        double resid2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            for (int d = 0; d < f.dim; ++d) {
                const double dv = f.at(i)[d] - approx.at(i)[d];
                resid2 += p.w[i] * dv * dv;
            }
        if (std::sqrt(resid2) > span_tol)
            throw std::runtime_error("atomic_norm: predictor outside span of the class (residual " +
                                     std::to_string(std::sqrt(resid2)) + ")");
    }

    // Pointwise equality constraints, rank-reduced.
    std::vector<double> M(rows * nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const auto& vals = c.base_atom(j).values;
        for (std::size_t i = 0; i < rows; ++i) M[i * nb + j] = vals[i];
    }
    linalg::ReducedEqualities red = linalg::reduce_equalities(rows, nb, M, f.values, span_tol);
    if (!red.consistent)
        throw std::runtime_error("atomic_norm: inconsistent equality system (residual " +
                                 std::to_string(red.rhs_residual) + ")");

    // min 1^T (a+ + a-)  s.t.  R (a+ - a-) = rhs over permuted columns.
    const std::size_t m = red.rank;
    const std::size_t n = 2 * nb;
    std::vector<double> A(m * n), b(red.rhs), cost(n, 1.0);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < nb; ++j) {
            A[r * n + j] = red.R[r * nb + j];
            A[r * n + nb + j] = -red.R[r * nb + j];
        }
    lp::Result sol = lp::solve(m, n, A, b, cost);
    if (sol.status != lp::Status::optimal)
        throw std::runtime_error("atomic_norm: LP did not reach optimality");

    AtomicNormResult out;
    out.value = sol.objective;
    out.coefficients.assign(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j) {
        const double v = sol.x[j] - sol.x[nb + j];
        out.coefficients[static_cast<std::size_t>(red.col_perm[j])] = v;
    }
    return out;
}

TauStarResult tau_star(const WeakLearnerClass& c, const Population& p) {
    SpanModel best = ols_span(c.base_atoms(), p);
    TauStarResult out;
    out.fstar = best.compiled;
    out.risk = best.risk;
    AtomicNormResult an = atomic_norm(out.fstar, c, p);
    out.tau_star = an.value;
    out.atomic_coefficients = std::move(an.coefficients);
    return out;
}

}  // namespace dlab
