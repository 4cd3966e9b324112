#pragma once

#include <cstddef>
#include <vector>

namespace dlab::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
    Status status = Status::iteration_limit;
    double objective = 0.0;
    std::vector<double> x;
};

// min c^T x  s.t.  A x = b, x >= 0.
// Dense two-phase tableau simplex with Bland's rule (deterministic,
// anti-cycling). A is m x n row-major. Intended for the small atomic-norm
// programs that arise here, not for large-scale LPs.
Result solve(std::size_t m, std::size_t n, const std::vector<double>& A, const std::vector<double>& b,
             const std::vector<double>& c, long max_iters = 200000);

}  // namespace dlab::lp
