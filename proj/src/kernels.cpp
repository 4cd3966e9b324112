#include "dlab/kernels.hpp"

namespace dlab::kernels {

namespace {

inline double dot_point(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) s += a[c] * b[c];
    return s;
}

inline double sq_point(const double* a, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) s += a[c] * a[c];
    return s;
}

inline double sq_dist_point(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

}  // namespace

double dot(const double* a, const double* b, const double* w, std::size_t n, int dim) {
    return blocked_sum(n, [=](std::size_t i) { return w[i] * dot_point(a + i * dim, b + i * dim, dim); });
}

double sq_norm(const double* a, const double* w, std::size_t n, int dim) {
    return blocked_sum(n, [=](std::size_t i) { return w[i] * sq_point(a + i * dim, dim); });
}

double sq_dist(const double* a, const double* b, const double* w, std::size_t n, int dim) {
    return blocked_sum(n, [=](std::size_t i) { return w[i] * sq_dist_point(a + i * dim, b + i * dim, dim); });
}

namespace serial {

double dot(const double* a, const double* b, const double* w, std::size_t n, int dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * dot_point(a + i * dim, b + i * dim, dim);
    return s;
}

double sq_norm(const double* a, const double* w, std::size_t n, int dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * sq_point(a + i * dim, dim);
    return s;
}

double sq_dist(const double* a, const double* b, const double* w, std::size_t n, int dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * sq_dist_point(a + i * dim, b + i * dim, dim);
    return s;
}

}  // namespace serial

}  // namespace dlab::kernels
