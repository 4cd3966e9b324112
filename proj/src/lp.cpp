#include "dlab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dlab::lp {

namespace {

constexpr double kReducedCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;

// Tableau with rows 0..m-1 = constraints, row m = objective (reduced costs,
// negated objective value in the last column).
struct Tableau {
    std::size_t m, n;            // constraints, structural+artificial columns
    std::vector<double> t;       // (m+1) * (n+1)
    std::vector<std::size_t> basis;

    double& at(std::size_t r, std::size_t c) { return t[r * (n + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return t[r * (n + 1) + c]; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double pv = at(pr, pc);
        for (std::size_t c = 0; c <= n; ++c) at(pr, c) /= pv;
        for (std::size_t r = 0; r <= m; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= n; ++c) at(r, c) -= f * at(pr, c);
        }
        basis[pr] = pc;
    }

    // Bland: entering = lowest-index negative reduced cost; leaving = min
    // ratio, ties broken by lowest basis index.
    Status iterate(std::size_t active_cols, long& iters, long max_iters) {
        while (true) {
            if (++iters > max_iters) return Status::iteration_limit;
            std::size_t pc = n;
            for (std::size_t c = 0; c < active_cols; ++c) {
                if (at(m, c) < -kReducedCostTol) {
                    pc = c;
                    break;
                }
            }
            if (pc == n) return Status::optimal;
            std::size_t pr = m;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m; ++r) {
                const double a = at(r, pc);
                if (a > kPivotTol) {
                    const double ratio = at(r, n) / a;
                    if (ratio < best_ratio - 1e-15 || (std::abs(ratio - best_ratio) <= 1e-15 && basis[r] < basis[pr == m ? r : pr])) {
                        best_ratio = ratio;
                        pr = r;
                    }
                }
            }
            if (pr == m) return Status::unbounded;
            pivot(pr, pc);
        }
    }
};

}  // namespace

Result solve(std::size_t m, std::size_t n, const std::vector<double>& A, const std::vector<double>& b,
             const std::vector<double>& c, long max_iters) {
    if (A.size() != m * n || b.size() != m || c.size() != n) throw std::invalid_argument("lp::solve: shape mismatch");

    // Phase 1 over structural + artificial columns.
    Tableau tb;
    tb.m = m;
    tb.n = n + m;
    tb.t.assign((m + 1) * (tb.n + 1), 0.0);
    tb.basis.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const double sgn = b[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t cidx = 0; cidx < n; ++cidx) tb.at(r, cidx) = sgn * A[r * n + cidx];
        tb.at(r, n + r) = 1.0;
        tb.at(r, tb.n) = sgn * b[r];
        tb.basis[r] = n + r;
    }
    // Phase-1 reduced costs: minimize sum of artificials.
    for (std::size_t cidx = 0; cidx < n; ++cidx) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += tb.at(r, cidx);
        tb.at(m, cidx) = -s;
    }
    {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += tb.at(r, tb.n);
        tb.at(m, tb.n) = -s;
    }

    long iters = 0;
    Status st = tb.iterate(tb.n, iters, max_iters);
    if (st == Status::iteration_limit) return {st, 0.0, {}};
    const double phase1 = -tb.at(m, tb.n);
    if (phase1 > 1e-8) return {Status::infeasible, phase1, {}};

    // Drive leftover artificials out of the basis; rows that cannot pivot are
    // redundant and get neutralized.
    std::vector<bool> dead_row(m, false);
    for (std::size_t r = 0; r < m; ++r) {
        if (tb.basis[r] < n) continue;
        std::size_t pc = tb.n;
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
            if (std::abs(tb.at(r, cidx)) > 1e-9) {
                pc = cidx;
                break;
            }
        }
        if (pc == tb.n) {
            dead_row[r] = true;
            continue;
        }
        tb.pivot(r, pc);
    }

    // Phase 2: restore objective c reduced against the current basis.
    for (std::size_t cidx = 0; cidx <= tb.n; ++cidx) tb.at(m, cidx) = 0.0;
    for (std::size_t cidx = 0; cidx < n; ++cidx) tb.at(m, cidx) = c[cidx];
    for (std::size_t r = 0; r < m; ++r) {
        if (dead_row[r] || tb.basis[r] >= n) continue;
        const double cb = c[tb.basis[r]];
        if (cb == 0.0) continue;
        for (std::size_t cidx = 0; cidx <= tb.n; ++cidx) tb.at(m, cidx) -= cb * tb.at(r, cidx);
    }
    // Forbid artificials from re-entering.
    for (std::size_t r = 0; r < m; ++r) tb.at(m, n + r) = 1.0;

    st = tb.iterate(n, iters, max_iters);
    if (st != Status::optimal) return {st, 0.0, {}};

    Result res;
    res.status = Status::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (!dead_row[r] && tb.basis[r] < n) res.x[tb.basis[r]] = tb.at(r, tb.n);
    res.objective = 0.0;
    for (std::size_t cidx = 0; cidx < n; ++cidx) res.objective += c[cidx] * res.x[cidx];
    return res;
}

}  // namespace dlab::lp
