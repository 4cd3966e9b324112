#include <omp.h>

#include <vector>

#include "dlab/kernels.hpp"
#include "dlab/rng.hpp"
#include "doctest.h"

using namespace dlab;

namespace {

struct Arrays {
    std::vector<double> a, b, w;
};

Arrays random_arrays(std::size_t n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Arrays r;
    r.a.resize(n * static_cast<std::size_t>(dim));
    r.b.resize(n * static_cast<std::size_t>(dim));
    r.w.resize(n);
    for (auto& v : r.a) v = rng.uniform(-1.0, 1.0);
    for (auto& v : r.b) v = rng.uniform(-1.0, 1.0);
    double s = 0.0;
    for (auto& v : r.w) {
        v = rng.uniform(0.1, 1.0);
        s += v;
    }
    for (auto& v : r.w) v /= s;
    return r;
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
    for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{4096}, std::size_t{10000}}) {
        for (int dim : {1, 3}) {
            Arrays r = random_arrays(n, dim, 42 + n + static_cast<std::size_t>(dim));
            const double ref = kernels::serial::dot(r.a.data(), r.b.data(), r.w.data(), n, dim);
            const double par = kernels::dot(r.a.data(), r.b.data(), r.w.data(), n, dim);
            CHECK(par == doctest::Approx(ref).epsilon(1e-13));

            const double ref2 = kernels::serial::sq_dist(r.a.data(), r.b.data(), r.w.data(), n, dim);
            const double par2 = kernels::sq_dist(r.a.data(), r.b.data(), r.w.data(), n, dim);
            CHECK(par2 == doctest::Approx(ref2).epsilon(1e-13));

            const double ref3 = kernels::serial::sq_norm(r.a.data(), r.w.data(), n, dim);
            const double par3 = kernels::sq_norm(r.a.data(), r.w.data(), n, dim);
            CHECK(par3 == doctest::Approx(ref3).epsilon(1e-13));
        }
    }
}

TEST_CASE("blocked reduction is bit-identical across thread counts") {
    Arrays r = random_arrays(50000, 2, 7);
    const int saved = omp_get_max_threads();

    omp_set_num_threads(1);
    const double one = kernels::dot(r.a.data(), r.b.data(), r.w.data(), 50000, 2);
    omp_set_num_threads(8);
    const double eight = kernels::dot(r.a.data(), r.b.data(), r.w.data(), 50000, 2);
    omp_set_num_threads(3);
    const double three = kernels::dot(r.a.data(), r.b.data(), r.w.data(), 50000, 2);
    omp_set_num_threads(saved);

    CHECK(one == eight);
    CHECK(one == three);
}

TEST_CASE("blocked_sum handles empty and single-block ranges") {
    CHECK(kernels::blocked_sum(0, [](std::size_t) { return 1.0; }) == 0.0);
    CHECK(kernels::blocked_sum(5, [](std::size_t i) { return static_cast<double>(i); }) == 10.0);
}
