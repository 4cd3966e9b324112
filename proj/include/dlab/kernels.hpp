#pragma once

#include <cstddef>
#include <vector>

namespace dlab::kernels {

// Population sums are split into fixed-size blocks; each block is accumulated
// serially and the block partials are combined in index order. The block
// layout depends only on n, never on the thread count, so results are
// bit-identical at any parallelism degree (including inside an outer
// parallel region, where the inner loop simply runs on one thread).
inline constexpr std::size_t kBlock = 4096;

template <class TermFn>
double blocked_sum(std::size_t n, TermFn&& term) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks == 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

// sum_i w[i] * <a_i, b_i>  (vectors of length dim per point)
double dot(const double* a, const double* b, const double* w, std::size_t n, int dim);
// sum_i w[i] * |a_i|^2
double sq_norm(const double* a, const double* w, std::size_t n, int dim);
// sum_i w[i] * |a_i - b_i|^2
double sq_dist(const double* a, const double* b, const double* w, std::size_t n, int dim);

// Plain single-loop reference implementations. Kept for tests (the parallel
// kernels must agree with these) and for the benchmark target.
namespace serial {
double dot(const double* a, const double* b, const double* w, std::size_t n, int dim);
double sq_norm(const double* a, const double* w, std::size_t n, int dim);
double sq_dist(const double* a, const double* b, const double* w, std::size_t n, int dim);
}  // namespace serial

}  // namespace dlab::kernels
