// Benchmark comparing the serial reference kernels against the OpenMP blocked
// kernels, plus one end-to-end stacking workload at both parallelism degrees.
// Usage: dlab_bench [--quick]

#include <omp.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "dlab/harness.hpp"
#include "dlab/kernels.hpp"
#include "dlab/rng.hpp"
#include "dlab/stacking.hpp"

namespace {

struct Workload {
    std::vector<double> a, b, w;
};

Workload make_workload(std::size_t n, int dim, std::uint64_t seed) {
    dlab::Rng rng(seed);
    Workload wl;
    wl.a.resize(n * static_cast<std::size_t>(dim));
    wl.b.resize(n * static_cast<std::size_t>(dim));
    wl.w.resize(n);
    for (auto& v : wl.a) v = rng.uniform(-1.0, 1.0);
    for (auto& v : wl.b) v = rng.uniform(-1.0, 1.0);
    double s = 0.0;
    for (auto& v : wl.w) {
        v = rng.uniform(0.1, 1.0);
        s += v;
    }
    for (auto& v : wl.w) v /= s;
    return wl;
}

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

volatile double sink = 0.0;

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const int reps = quick ? 2 : 5;
    const int inner = quick ? 20 : 200;

    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

    const std::vector<std::size_t> sizes = quick ? std::vector<std::size_t>{1 << 14}
                                                 : std::vector<std::size_t>{1 << 14, 1 << 18, 1 << 21};
    for (std::size_t n : sizes) {
        for (int dim : {1, 4}) {
            Workload wl = make_workload(n, dim, 42);
            const double ts = time_best_of(reps, [&] {
                for (int i = 0; i < inner; ++i)
                    sink = dlab::kernels::serial::dot(wl.a.data(), wl.b.data(), wl.w.data(), n, dim);
            });
            const double tp = time_best_of(reps, [&] {
                for (int i = 0; i < inner; ++i)
                    sink = dlab::kernels::dot(wl.a.data(), wl.b.data(), wl.w.data(), n, dim);
            });
            char label[64];
            std::snprintf(label, sizeof(label), "dot n=%zu dim=%d", n, dim);
            std::printf("%-28s %12.6f %12.6f %7.2fx\n", label, ts, tp, ts / tp);

            const double ds = time_best_of(reps, [&] {
                for (int i = 0; i < inner; ++i)
                    sink = dlab::kernels::serial::sq_dist(wl.a.data(), wl.b.data(), wl.w.data(), n, dim);
            });
            const double dp = time_best_of(reps, [&] {
                for (int i = 0; i < inner; ++i)
                    sink = dlab::kernels::sq_dist(wl.a.data(), wl.b.data(), wl.w.data(), n, dim);
            });
            std::snprintf(label, sizeof(label), "sq_dist n=%zu dim=%d", n, dim);
            std::printf("%-28s %12.6f %12.6f %7.2fx\n", label, ds, dp, ds / dp);
        }
    }

    // trial-level parallelism on a stacking batch
    {
        dlab::harness::PopulationSpec spec;
        spec.points = quick ? 64 : 256;
        dlab::Population p = dlab::harness::make_population(spec, 7);
        dlab::BaseModelSource src = dlab::harness::noisy_target_mixture(p, 16, 0.7, 9);
        const long trials = quick ? 64 : 512;

        omp_set_dynamic(0);
        omp_set_num_threads(1);
        const double t1 = time_best_of(1, [&] { dlab::stacking_curve(src, {4}, trials, p, 5); });
        omp_set_num_threads(omp_get_num_procs());
        const double tn = time_best_of(1, [&] { dlab::stacking_curve(src, {4}, trials, p, 5); });
        std::printf("%-28s %12.6f %12.6f %7.2fx\n", "stacking batch", t1, tn, t1 / tn);
    }
    return 0;
}
