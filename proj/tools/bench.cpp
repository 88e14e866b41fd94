// Kernel benchmark: blocked/OpenMP reductions against the single-loop
// serial references, plus the grid operators they feed.  While timing, it
// asserts the reproducibility contract: the blocked result is bitwise
// independent of the thread count (the serial single-loop reference agrees
// to rounding, reported as a relative difference).
//
// Usage: kirchnorm-bench [n] [reps]   (defaults: 1<<22, 25)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kirchnorm/kernels.hpp"
#include "kirchnorm/radial_grid.hpp"

using namespace kirchnorm;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_best(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        body();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

// Run `fn` with the thread pool clamped to one thread.
template <typename F>
auto single_threaded(F&& fn) {
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    auto v = fn();
    omp_set_num_threads(saved);
    return v;
#else
    return fn();
#endif
}

double rel_diff(double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
}

volatile double sink; // keep the reductions alive

} // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10)
                                   : (std::size_t(1) << 22);
    const int reps = argc > 2 ? std::atoi(argv[2]) : 25;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> w(n), u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 + 0.5 * std::fabs(dist(rng));
        u[i] = dist(rng);
        v[i] = dist(rng);
    }

#ifdef _OPENMP
    std::printf("n = %zu, reps = %d, omp threads = %d\n", n, reps,
                omp_get_max_threads());
#else
    std::printf("n = %zu, reps = %d, OpenMP off\n", n, reps);
#endif
    std::printf("%-22s %10s %10s %8s %12s %s\n", "kernel", "serial ms",
                "blocked ms", "speedup", "vs serial", "threads");

    auto report = [&](const char* name, double ts, double tb, double rd,
                      bool thread_stable) {
        std::printf("%-22s %10.3f %10.3f %7.2fx %12.2e %s\n", name, ts, tb,
                    ts / tb, rd, thread_stable ? "bitwise" : "[MISMATCH]");
    };

    {
        double a = 0, b = 0;
        const double ts = time_best(reps, [&] {
            a = kernels::serial::weighted_dot(w, u, u);
            sink = a;
        });
        const double tb = time_best(reps, [&] {
            b = kernels::weighted_dot(w, u, u);
            sink = b;
        });
        const double b1 = single_threaded([&] { return kernels::weighted_dot(w, u, u); });
        report("weighted_dot", ts, tb, rel_diff(a, b), b == b1);
    }
    {
        double a = 0, b = 0;
        const double ts = time_best(reps, [&] {
            a = kernels::serial::weighted_pow(w, u, 2.5);
            sink = a;
        });
        const double tb = time_best(reps, [&] {
            b = kernels::weighted_pow(w, u, 2.5);
            sink = b;
        });
        const double b1 = single_threaded([&] { return kernels::weighted_pow(w, u, 2.5); });
        report("weighted_pow(2.5)", ts, tb, rel_diff(a, b), b == b1);
    }
    {
        kernels::TupleSums a, b;
        const double ts = time_best(reps, [&] {
            a = kernels::serial::tuple_sums(w, u, 2.5, 10.0 / 3.0, true);
            sink = a.l2star;
        });
        const double tb = time_best(reps, [&] {
            b = kernels::tuple_sums(w, u, 2.5, 10.0 / 3.0, true);
            sink = b.l2star;
        });
        const kernels::TupleSums b1 = single_threaded(
            [&] { return kernels::tuple_sums(w, u, 2.5, 10.0 / 3.0, true); });
        report("tuple_sums(q on)", ts, tb, rel_diff(a.l2star, b.l2star),
               b.mass2 == b1.mass2 && b.lq == b1.lq && b.l2star == b1.l2star);
    }
    {
        std::vector<double> y1(u), y2(u);
        const double ts =
            time_best(reps, [&] { kernels::serial::axpy(0.25, v, y1); });
        const double tb = time_best(reps, [&] { kernels::axpy(0.25, v, y2); });
        sink = y1[n / 2] + y2[n / 2];
        report("axpy", ts, tb, rel_diff(y1[n / 2], y2[n / 2]), true);
    }

    // Grid operators at a production-like size.
    GridSpec gs;
    gs.N = 5;
    gs.cells = 1 << 16;
    auto grid = make_grid(gs);
    std::vector<double> f(grid->size()), lap(grid->size()),
        stiff(grid->size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::exp(-grid->nodes()[i] * grid->nodes()[i]);
    const double t_int =
        time_best(reps, [&] { sink = grid->integrate(f); });
    const double t_lap = time_best(reps, [&] {
        grid->laplacian(f, lap);
        sink = lap[1];
    });
    const double t_stiff = time_best(reps, [&] {
        grid->stiffness_apply(f, stiff);
        sink = stiff[1];
    });
    const double t_dir =
        time_best(reps, [&] { sink = grid->dirichlet(f, f); });
    std::printf("\ngrid (N=5, %zu nodes): integrate %.3f ms, laplacian %.3f "
                "ms, stiffness %.3f ms, dirichlet %.3f ms\n",
                grid->size(), t_int, t_lap, t_stiff, t_dir);
    return 0;
}
