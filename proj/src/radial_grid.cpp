#include "kirchnorm/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kirchnorm/kernels.hpp"

namespace kirchnorm {

namespace {

double sphere_surface(int N) {
    return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

// Closed-form bubble norms (Beta integrals); used only to size the domain.
struct TailRequest {
    double total;     // full-line value of the norm
    double tail_coef; // tail(R) = tail_coef * R^{-tail_pow}
    double tail_pow;
};

double beta_fn(double x, double y) {
    return std::tgamma(x) * std::tgamma(y) / std::tgamma(x + y);
}

std::vector<TailRequest> tail_requests(int N, double eps, double q_hint) {
    const double w = sphere_surface(N);
    const double A = N * (N - 2.0) * eps; // N(N-2) eps
    std::vector<TailRequest> out;
    // |grad U|_2^2: integrand ~ (N-2)^2 A^{(N-2)/2} r^{1-N}
    out.push_back({w * std::pow(A, (N - 2.0) / 2.0) * (N - 2.0) * (N - 2.0) * 0.5 *
                       beta_fn((N + 2.0) / 2.0, (N - 2.0) / 2.0),
                   w * (N - 2.0) * std::pow(A, (N - 2.0) / 2.0), N - 2.0});
    // |U|_{2*}^{2*}: integrand ~ A^{N/2} r^{-N-1}
    out.push_back({w * std::pow(A, N / 2.0) * 0.5 * beta_fn(N / 2.0, N / 2.0),
                   w * std::pow(A, N / 2.0) / N, static_cast<double>(N)});
    if (N >= 5) {
        // |U|_2^2 (divergent for N = 4: exempt)
        out.push_back({w * std::pow(A, (N - 2.0) / 2.0) * 0.5 *
                           beta_fn(N / 2.0, (N - 4.0) / 2.0),
                       w * std::pow(A, (N - 2.0) / 2.0) / (N - 4.0), N - 4.0});
    }
    // The q-norm tail matters only for N >= 5 (the N = 4 pipeline takes
    // q-norms of compactly supported or exponentially decaying fields only).
    if (N >= 5 && q_hint > 2.0 && q_hint * (N - 2.0) > N + 0.25) {
        const double e = q_hint * (N - 2.0) / 2.0 - N / 2.0;
        out.push_back({w * std::pow(A, q_hint * (N - 2.0) / 4.0) * 0.5 *
                           beta_fn(N / 2.0, e),
                       w * std::pow(A, q_hint * (N - 2.0) / 4.0) /
                           (q_hint * (N - 2.0) - N),
                       q_hint * (N - 2.0) - N});
    }
    return out;
}

} // namespace

double tail_policy_r_max(int N, double eps, double q_hint, double target) {
    double r = 50.0 * std::max(1.0, std::sqrt(eps));
    for (const TailRequest& t : tail_requests(N, eps, q_hint)) {
        const double need =
            std::pow(t.tail_coef / (target * t.total), 1.0 / t.tail_pow);
        r = std::max(r, need);
    }
    return std::min(r, 1e9);
}

RadialGrid::RadialGrid(const GridSpec& spec) : spec_(spec), N_(spec.N) {
    if (N_ < 4) throw std::invalid_argument("RadialGrid: N >= 4 required");
    if (spec_.cells < 16) throw std::invalid_argument("RadialGrid: too few cells");
    if (spec_.cells % 2) spec_.cells += 1;
    if (spec_.r_max <= 0.0)
        spec_.r_max = tail_policy_r_max(N_, spec_.eps_hint, spec_.q_hint, spec_.tail_rel);
    if (spec_.h0 <= 0.0)
        spec_.h0 = std::min(1.0, std::sqrt(spec_.eps_hint)) / 512.0;
    build_nodes();
    build_weights();
    build_derivative();
    build_stiffness();

    std::ostringstream sig;
    sig.precision(12);
    sig << "rg1-N" << N_ << "-M" << spec_.cells << "-R" << spec_.r_max << "-h"
        << spec_.h0;
    signature_ = sig.str();
}

void RadialGrid::build_nodes() {
    const std::size_t M = spec_.cells;
    const double R = spec_.r_max;
    double h0 = spec_.h0;
    if (h0 * M >= R) h0 = R / M; // uniform grid already reaches R

    // growth ratio g with h0 (g^M - 1)/(g - 1) = R
    double g = 1.0;
    if (h0 * M < R) {
        double lo = 1.0 + 1e-15, hi = 2.0;
        auto len = [&](double gg) {
            // sum h0 * gg^i, stable for gg -> 1
            if (gg - 1.0 < 1e-12) return h0 * M * (1.0 + 0.5 * (gg - 1.0) * (M - 1));
            return h0 * (std::pow(gg, static_cast<double>(M)) - 1.0) / (gg - 1.0);
        };
        while (len(hi) < R) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (len(mid) < R ? lo : hi) = mid;
        }
        g = 0.5 * (lo + hi);
    }

    nodes_.assign(M + 1, 0.0);
    double h = h0;
    for (std::size_t i = 1; i <= M; ++i) {
        nodes_[i] = nodes_[i - 1] + h;
        h *= g;
    }
    // kill the fp drift so r_M == r_max exactly
    const double scale = R / nodes_[M];
    for (double& r : nodes_) r *= scale;
    nodes_[M] = R;

    // Nudge each pair's interior node into the open window that keeps all
    // three weights of the pair rule positive (balanced means of r over the
    // block under the (B-r) r^{N-1} and (r-A) r^{N-1} measures).
    const double Nd = N_;
    for (std::size_t kpair = 0; kpair + 2 <= M; kpair += 2) {
        const double A = nodes_[kpair], B = nodes_[kpair + 2];
        auto mom = [&](double k) {
            return (std::pow(B, Nd + k) - std::pow(A, Nd + k)) / (Nd + k);
        };
        const double M0 = mom(0), M1 = mom(1), M2 = mom(2);
        const double m_lo = (B * M1 - M2) / (B * M0 - M1);
        const double m_hi = (M2 - A * M1) / (M1 - A * M0);
        const double pad = 0.05 * (m_hi - m_lo);
        nodes_[kpair + 1] = std::clamp(nodes_[kpair + 1], m_lo + pad, m_hi - pad);
    }
}

void RadialGrid::build_weights() {
    const std::size_t M = spec_.cells;
    const double Nd = N_;
    const double surf = sphere_surface(N_);
    weights_.assign(M + 1, 0.0);
    for (std::size_t k = 0; k + 2 <= M; k += 2) {
        const double A = nodes_[k], m = nodes_[k + 1], B = nodes_[k + 2];
        auto mom = [&](double j) {
            return (std::pow(B, Nd + j) - std::pow(A, Nd + j)) / (Nd + j);
        };
        const double M0 = mom(0), M1 = mom(1), M2 = mom(2);
        const double wA = (M2 - (m + B) * M1 + m * B * M0) / ((A - m) * (A - B));
        const double wm = (M2 - (A + B) * M1 + A * B * M0) / ((m - A) * (m - B));
        const double wB = (M2 - (A + m) * M1 + A * m * M0) / ((B - A) * (B - m));
        weights_[k] += surf * wA;
        weights_[k + 1] += surf * wm;
        weights_[k + 2] += surf * wB;
    }
    for (std::size_t i = 0; i <= M; ++i) {
        if (!(weights_[i] > 0.0))
            throw std::logic_error("RadialGrid: nonpositive quadrature weight");
    }
}

void RadialGrid::build_derivative() {
    const std::size_t M = spec_.cells;
    dcol_.assign(M + 1, 0);
    dcoef_.assign(M + 1, {0.0, 0.0, 0.0});
    // Row 0: du(0) = 0 by radial symmetry (all coefficients zero).
    // Interior rows: derivative of the local 3-point quadratic at its
    // middle node; last row: right-end derivative of the final quadratic.
    for (std::size_t i = 1; i < M; ++i) {
        const double h1 = nodes_[i] - nodes_[i - 1];
        const double h2 = nodes_[i + 1] - nodes_[i];
        dcol_[i] = i - 1;
        dcoef_[i] = {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2),
                     h1 / (h2 * (h1 + h2))};
    }
    {
        const double h1 = nodes_[M - 1] - nodes_[M - 2];
        const double h2 = nodes_[M] - nodes_[M - 1];
        dcol_[M] = M - 2;
        dcoef_[M] = {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2),
                     (h1 + 2.0 * h2) / (h2 * (h1 + h2))};
    }
}

void RadialGrid::build_stiffness() {
    const std::size_t M = spec_.cells;
    const double surf = sphere_surface(N_);
    kblocks_.resize(M / 2);
    std::vector<double> d1p(N_ + 3), d2p(N_ + 3), x1p(N_ + 3);
    for (std::size_t k = 0; k + 2 <= M; k += 2) {
        const double x1 = nodes_[k + 1];
        const double d1 = x1 - nodes_[k];      // left half-width
        const double d2 = nodes_[k + 2] - x1;  // right half-width
        const double dd = d1 + d2;
        BlockForm& b = kblocks_[k / 2];
        b.pa = {-d2 / (d1 * dd), (d2 - d1) / (d1 * d2), d1 / (d2 * dd)};
        b.qc = {1.0 / (d1 * dd), -1.0 / (d1 * d2), 1.0 / (d2 * dd)};
        // Tk = int_{-d1}^{d2} t^k (x1+t)^{N-1} dt by the binomial series in
        // t around x1: every term is a plain product of half-width powers,
        // and the even-power differences d2^p - d1^p factor through d2-d1,
        // so the moments stay accurate when the block is a vanishing
        // fraction of x1.
        d1p[0] = d2p[0] = x1p[0] = 1.0;
        for (int p = 1; p <= N_ + 2; ++p) {
            d1p[p] = d1p[p - 1] * d1;
            d2p[p] = d2p[p - 1] * d2;
            x1p[p] = x1p[p - 1] * x1;
        }
        auto signed_diff = [&](int p) { // d2^p - (-d1)^p
            if (p % 2 == 1) return d2p[p] + d1p[p];
            double s = 0.0;
            for (int m = 0; m < p; ++m) s += d2p[m] * d1p[p - 1 - m];
            return (d2 - d1) * s;
        };
        b.T = {0.0, 0.0, 0.0};
        double binom = 1.0;
        for (int j = 0; j <= N_ - 1; ++j) {
            const double cj = binom * x1p[N_ - 1 - j];
            for (int kk = 0; kk < 3; ++kk) {
                const int p = kk + j + 1;
                b.T[kk] += cj * signed_diff(p) / p;
            }
            binom *= double(N_ - 1 - j) / double(j + 1);
        }
        for (double& t : b.T) t *= surf;
    }
}

double RadialGrid::integrate(std::span<const double> f) const {
    return kernels::weighted_sum(weights_, f);
}

void RadialGrid::derivative(std::span<const double> u, std::span<double> du) const {
    const long long n = static_cast<long long>(nodes_.size());
    du[0] = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 1 << 14)
#endif
    for (long long i = 1; i < n; ++i) {
        const auto& c = dcoef_[i];
        const std::size_t j = dcol_[i];
        du[i] = c[0] * u[j] + c[1] * u[j + 1] + c[2] * u[j + 2];
    }
}

void RadialGrid::laplacian(std::span<const double> u, std::span<double> lap) const {
    const std::size_t M = spec_.cells;
    const double Nd = N_;
    {
        // even extension at the origin: u ~ u0 + alpha r^2 + beta r^4
        const double p1 = nodes_[1] * nodes_[1], p2 = nodes_[2] * nodes_[2];
        const double d1 = (u[1] - u[0]) / p1, d2 = (u[2] - u[0]) / p2;
        const double beta = (d2 - d1) / (p2 - p1);
        const double alpha = d1 - beta * p1;
        lap[0] = 2.0 * Nd * alpha;
    }
    const long long Ml = static_cast<long long>(M);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Ml > 1 << 14)
#endif
    for (long long i = 1; i < Ml; ++i) {
        const double h1 = nodes_[i] - nodes_[i - 1];
        const double h2 = nodes_[i + 1] - nodes_[i];
        const double upp = 2.0 * (u[i - 1] / (h1 * (h1 + h2)) - u[i] / (h1 * h2) +
                                  u[i + 1] / (h2 * (h1 + h2)));
        const double up = -h2 / (h1 * (h1 + h2)) * u[i - 1] +
                          (h2 - h1) / (h1 * h2) * u[i] +
                          h1 / (h2 * (h1 + h2)) * u[i + 1];
        lap[i] = upp + (Nd - 1.0) * up / nodes_[i];
    }
    lap[M] = 0.0;
}

double RadialGrid::dirichlet(std::span<const double> u,
                             std::span<const double> v) const {
    // Per block with slope q'(x1+t) = alpha + 2Bt the energy polarizes to
    // a_u a_v T0 + 2(a_u B_v + a_v B_u) T1 + 4 B_u B_v T2.  alpha and B are
    // differences of nodal values, so oscillation at the grid frequency is
    // charged its true cost and nothing cancels against the bulk.
    return kernels::blocked_reduce(
        kblocks_.size(), [&](std::size_t lo, std::size_t hi) {
            double s = 0.0;
            for (std::size_t blk = lo; blk < hi; ++blk) {
                const BlockForm& b = kblocks_[blk];
                const std::size_t k = 2 * blk;
                double au = 0.0, av = 0.0, bu = 0.0, bv = 0.0;
                for (int i = 0; i < 3; ++i) {
                    au += b.pa[i] * u[k + i];
                    av += b.pa[i] * v[k + i];
                    bu += b.qc[i] * u[k + i];
                    bv += b.qc[i] * v[k + i];
                }
                s += au * av * b.T[0] + 2.0 * (au * bv + av * bu) * b.T[1] +
                     4.0 * bu * bv * b.T[2];
            }
            return s;
        });
}

void RadialGrid::stiffness_apply(std::span<const double> u, std::span<double> y) const {
    const std::size_t n = nodes_.size();
    std::fill(y.begin(), y.end(), 0.0);
    // Gradient of the block energy: d/du_i = 2(alpha pa_i T0
    // + 2(pa_i B + alpha qc_i) T1 + 4 B qc_i T2); K u keeps half of that.
    // Adjacent blocks overlap only at shared endpoints (even indices), so
    // even/odd block passes write disjoint nodes and can run in parallel.
    for (int parity = 0; parity < 2; ++parity) {
        const long long nb = static_cast<long long>(kblocks_.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (nb > 1 << 13)
#endif
        for (long long blk = parity; blk < nb; blk += 2) {
            const BlockForm& b = kblocks_[blk];
            const std::size_t k = 2 * static_cast<std::size_t>(blk);
            double a = 0.0, B = 0.0;
            for (int i = 0; i < 3; ++i) {
                a += b.pa[i] * u[k + i];
                B += b.qc[i] * u[k + i];
            }
            for (int i = 0; i < 3; ++i)
                y[k + i] += a * b.pa[i] * b.T[0] +
                            2.0 * (b.pa[i] * B + a * b.qc[i]) * b.T[1] +
                            4.0 * B * b.qc[i] * b.T[2];
        }
    }
    for (std::size_t i = 0; i < n; ++i) y[i] /= weights_[i];
}

BandedSPD RadialGrid::shifted_stiffness(double tau) const {
    const std::size_t n = nodes_.size();
    BandedSPD A(n, 2);
    for (std::size_t i = 0; i < n; ++i) A.add(i, i, weights_[i]);
    for (std::size_t blk = 0; blk < kblocks_.size(); ++blk) {
        const BlockForm& b = kblocks_[blk];
        const std::size_t k = 2 * blk;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j)
                A.add(k + i, k + j,
                      tau * (b.pa[i] * b.pa[j] * b.T[0] +
                             2.0 * (b.pa[i] * b.qc[j] + b.pa[j] * b.qc[i]) * b.T[1] +
                             4.0 * b.qc[i] * b.qc[j] * b.T[2]));
    }
    return A;
}

double RadialGrid::moment(int k) const {
    const double Nd = N_;
    return sphere_surface(N_) * std::pow(spec_.r_max, Nd + k) / (Nd + k);
}

std::shared_ptr<const RadialGrid> make_grid(const GridSpec& spec) {
    return std::make_shared<const RadialGrid>(spec);
}

} // namespace kirchnorm
