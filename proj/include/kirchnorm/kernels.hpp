#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace kirchnorm::kernels {

// Reductions are blocked: the index range is split into fixed-size blocks,
// block partials are accumulated independently and then summed in block
// order.  The summation tree is the same for any thread count, so the
// OpenMP path is bitwise identical to the serial blocked path.
inline constexpr std::size_t block_size = 4096;

// The shared blocked-reduction skeleton.  `partial(lo, hi)` must be a pure
// function of the index range; partials are summed in block order.
template <class F>
double blocked_reduce(std::size_t n, F&& partial) {
    const std::size_t nb = (n + block_size - 1) / block_size;
    if (nb <= 1) return n ? partial(std::size_t{0}, n) : 0.0;
    std::vector<double> parts(nb);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long bi = 0; bi < static_cast<long long>(nb); ++bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * block_size;
        const std::size_t hi = std::min(lo + block_size, n);
        parts[static_cast<std::size_t>(bi)] = partial(lo, hi);
    }
    double s = 0.0;
    for (double v : parts) s += v;
    return s;
}

struct TupleSums {
    double mass2  = 0.0;
    double lq     = 0.0;
    double l2star = 0.0;
};

double weighted_sum(std::span<const double> w, std::span<const double> f);
double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g);
double weighted_pow(std::span<const double> w, std::span<const double> u,
                    double p);

// One pass over (w, u): weighted sums of u^2, |u|^q, |u|^{2*}.
// lq is skipped (left 0) when with_q is false.
TupleSums tuple_sums(std::span<const double> w, std::span<const double> u,
                     double q, double two_star, bool with_q);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y[i] *= alpha
void scale(double alpha, std::span<double> y);

// Plain single-loop reference implementations.  Kept for tests and for the
// benchmark target; semantics match the blocked kernels to rounding.
namespace serial {

double weighted_sum(std::span<const double> w, std::span<const double> f);
double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g);
double weighted_pow(std::span<const double> w, std::span<const double> u,
                    double p);
TupleSums tuple_sums(std::span<const double> w, std::span<const double> u,
                     double q, double two_star, bool with_q);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);

} // namespace serial

} // namespace kirchnorm::kernels
