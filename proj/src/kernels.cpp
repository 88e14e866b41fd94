#include "kirchnorm/kernels.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kirchnorm/banded.hpp"

namespace kirchnorm::kernels {

namespace {

inline std::size_t block_count(std::size_t n) {
    return (n + block_size - 1) / block_size;
}

} // namespace

double weighted_sum(std::span<const double> w, std::span<const double> f) {
    assert(w.size() == f.size());
    return blocked_reduce(w.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * f[i];
        return s;
    });
}

double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g) {
    assert(w.size() == f.size() && w.size() == g.size());
    return blocked_reduce(w.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * f[i] * g[i];
        return s;
    });
}

double weighted_pow(std::span<const double> w, std::span<const double> u,
                    double p) {
    assert(w.size() == u.size());
    return blocked_reduce(w.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += w[i] * std::pow(std::fabs(u[i]), p);
        return s;
    });
}

TupleSums tuple_sums(std::span<const double> w, std::span<const double> u,
                     double q, double two_star, bool with_q) {
    assert(w.size() == u.size());
    const std::size_t n = w.size();
    const std::size_t nb = block_count(n);
    std::vector<TupleSums> parts(nb);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long bi = 0; bi < static_cast<long long>(nb); ++bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * block_size;
        const std::size_t hi = std::min(lo + block_size, n);
        TupleSums t;
        for (std::size_t i = lo; i < hi; ++i) {
            const double au = std::fabs(u[i]);
            t.mass2  += w[i] * u[i] * u[i];
            t.l2star += w[i] * std::pow(au, two_star);
            if (with_q) t.lq += w[i] * std::pow(au, q);
        }
        parts[static_cast<std::size_t>(bi)] = t;
    }
    TupleSums out;
    for (const TupleSums& t : parts) {
        out.mass2 += t.mass2;
        out.lq += t.lq;
        out.l2star += t.l2star;
    }
    return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    const long long n = static_cast<long long>(x.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 1 << 15)
#endif
    for (long long i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> y) {
    const long long n = static_cast<long long>(y.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 1 << 15)
#endif
    for (long long i = 0; i < n; ++i) y[i] *= alpha;
}

namespace serial {

double weighted_sum(std::span<const double> w, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
    return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i] * g[i];
    return s;
}

double weighted_pow(std::span<const double> w, std::span<const double> u,
                    double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * std::pow(std::fabs(u[i]), p);
    return s;
}

TupleSums tuple_sums(std::span<const double> w, std::span<const double> u,
                     double q, double two_star, bool with_q) {
    TupleSums t;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double au = std::fabs(u[i]);
        t.mass2  += w[i] * u[i] * u[i];
        t.l2star += w[i] * std::pow(au, two_star);
        if (with_q) t.lq += w[i] * std::pow(au, q);
    }
    return t;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> y) {
    for (double& v : y) v *= alpha;
}

} // namespace serial

} // namespace kirchnorm::kernels

namespace kirchnorm {

BandedSPD::BandedSPD(std::size_t n, std::size_t kl)
    : n_(n), kl_(kl), data_((kl + 1) * n, 0.0) {}

void BandedSPD::add(std::size_t row, std::size_t col, double v) {
    if (row < col) std::swap(row, col);
    const std::size_t d = row - col;
    if (d > kl_) throw std::logic_error("BandedSPD::add outside bandwidth");
    data_[d * n_ + col] += v;
}

void BandedSPD::multiply(std::span<const double> x, std::span<double> y) const {
    if (factored_) throw std::logic_error("BandedSPD::multiply after factor");
    for (std::size_t i = 0; i < n_; ++i) y[i] = data_[i] * x[i];
    for (std::size_t d = 1; d <= kl_; ++d) {
        for (std::size_t c = 0; c + d < n_; ++c) {
            const double v = data_[d * n_ + c];
            y[c + d] += v * x[c];
            y[c] += v * x[c + d];
        }
    }
}

bool BandedSPD::factor() {
    // In-place banded Cholesky; entry(d, i) becomes L(i+d, i).
    for (std::size_t j = 0; j < n_; ++j) {
        double diag = entry(0, j);
        const std::size_t kmin = (j > kl_) ? j - kl_ : 0;
        for (std::size_t k = kmin; k < j; ++k) {
            const double l = entry(j - k, k);
            diag -= l * l;
        }
        if (!(diag > 0.0)) return false;
        const double lj = std::sqrt(diag);
        entry(0, j) = lj;
        for (std::size_t d = 1; d <= kl_ && j + d < n_; ++d) {
            const std::size_t i = j + d;
            double v = entry(d, j);
            const std::size_t kmin2 = (i > kl_) ? i - kl_ : 0;
            for (std::size_t k = std::max(kmin, kmin2); k < j; ++k)
                v -= entry(i - k, k) * entry(j - k, k);
            entry(d, j) = v / lj;
        }
    }
    factored_ = true;
    return true;
}

void BandedSPD::solve(std::span<double> rhs) const {
    if (!factored_) throw std::logic_error("BandedSPD::solve before factor");
    // L y = rhs
    for (std::size_t i = 0; i < n_; ++i) {
        double v = rhs[i];
        const std::size_t kmin = (i > kl_) ? i - kl_ : 0;
        for (std::size_t k = kmin; k < i; ++k) v -= entry(i - k, k) * rhs[k];
        rhs[i] = v / entry(0, i);
    }
    // L^T x = y
    for (std::size_t ii = n_; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t d = 1; d <= kl_ && ii + d < n_; ++d)
            v -= entry(d, ii) * rhs[ii + d];
        rhs[ii] = v / entry(0, ii);
    }
}

} // namespace kirchnorm
