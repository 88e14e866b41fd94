#include "kirchnorm/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kirchnorm/errors.hpp"
#include "kirchnorm/kernels.hpp"

namespace kirchnorm {

namespace {

void require_q_match(const NormTuple& t, const ProblemParams& p, const char* who) {
    if (p.mu != 0.0 && t.q != p.q) {
        std::ostringstream os;
        os << who << ": tuple carries q = " << t.q << " but parameters use q = "
           << p.q;
        throw std::invalid_argument(os.str());
    }
}

} // namespace

double energy_I(const NormTuple& t, const ProblemParams& p) {
    require_q_match(t, p, "energy_I");
    const double ts = p.two_star();
    double e = 0.5 * p.a * t.grad2 + 0.25 * p.b * t.grad2 * t.grad2 -
               t.l2star / ts;
    if (p.mu != 0.0) e -= (p.mu / p.q) * t.lq;
    return e;
}

ProblemParams effective_params_J(const ProblemParams& p, double S) {
    if (p.N != 4)
        throw RegimeError("effective_params_J: defined for N = 4 only");
    const double bS2 = p.b * S * S;
    if (!(p.b > 0.0) || !(bS2 < 1.0))
        throw RegimeError("effective_params_J: requires 0 < b < S^-2");
    ProblemParams pe = p;
    pe.a /= (1.0 - bS2);
    pe.b /= (1.0 - bS2);
    return pe;
}

double energy_J(const NormTuple& t, const ProblemParams& p, double S) {
    return energy_I(t, effective_params_J(p, S));
}

double pohozaev_P(const NormTuple& t, const ProblemParams& p) {
    require_q_match(t, p, "pohozaev_P");
    double v = p.a * t.grad2 + p.b * t.grad2 * t.grad2 - t.l2star;
    if (p.mu != 0.0) v -= p.mu * p.delta_q() * t.lq;
    return v;
}

double psi_second(const NormTuple& t, const ProblemParams& p) {
    require_q_match(t, p, "psi_second");
    const double ts = p.two_star();
    double v = 2.0 * p.a * t.grad2 + 4.0 * p.b * t.grad2 * t.grad2 -
               ts * t.l2star;
    if (p.mu != 0.0) {
        const double dq = p.delta_q();
        v -= p.mu * p.q * dq * dq * t.lq;
    }
    return v;
}

FiberPoint fiber_eval(const NormTuple& t, const ProblemParams& p, double s) {
    require_q_match(t, p, "fiber_eval");
    const double stiffest =
        std::max({2.0, p.b != 0.0 ? 4.0 : 0.0, p.two_star(),
                  p.mu != 0.0 ? p.N * (p.q - 2.0) / 2.0 : 0.0});
    if (std::fabs(s) * stiffest > 690.0)
        throw std::domain_error("fiber_eval: dilation exponent overflows exp()");
    const NormTuple sc = t.dilated(s, p.N);
    return FiberPoint{s, energy_I(sc, p), pohozaev_P(sc, p), psi_second(sc, p)};
}

const char* to_string(FiberClass c) {
    switch (c) {
        case FiberClass::minus: return "minus";
        case FiberClass::plus: return "plus";
        default: return "degenerate";
    }
}

FiberReport fiber_project(const NormTuple& t, const ProblemParams& p) {
    require_q_match(t, p, "fiber_project");
    FiberReport rep;
    rep.base = t;

    // psi'(s) = sum c_k exp(e_k s); with tt = e^s it is sum c_k tt^{e_k}.
    struct Term { double e, c; };
    std::vector<Term> terms;
    if (p.a * t.grad2 != 0.0) terms.push_back({2.0, p.a * t.grad2});
    if (p.b != 0.0 && t.grad2 != 0.0)
        terms.push_back({4.0, p.b * t.grad2 * t.grad2});
    if (p.mu != 0.0 && t.lq != 0.0)
        terms.push_back({p.N * (p.q - 2.0) / 2.0,
                         -p.mu * p.delta_q() * t.lq});
    if (t.l2star != 0.0) terms.push_back({p.two_star(), -t.l2star});

    std::sort(terms.begin(), terms.end(),
              [](const Term& x, const Term& y) { return x.e < y.e; });
    std::vector<Term> grouped;
    for (const Term& tm : terms) {
        if (!grouped.empty() &&
            std::fabs(tm.e - grouped.back().e) <= 1e-12 * std::max(1.0, tm.e))
            grouped.back().c += tm.c;
        else
            grouped.push_back(tm);
    }
    grouped.erase(std::remove_if(grouped.begin(), grouped.end(),
                                 [](const Term& tm) { return tm.c == 0.0; }),
                  grouped.end());
    if (grouped.empty()) {
        rep.status = ScanStatus::no_root;
        return rep;
    }

    // Exponential sums cross zero at most (sign changes) times, so the
    // grouped coefficient sequence caps the root count.
    int sign_changes = 0;
    for (std::size_t i = 1; i < grouped.size(); ++i)
        if (grouped[i - 1].c * grouped[i].c < 0.0) ++sign_changes;
    if (sign_changes == 0) {
        rep.status = ScanStatus::no_root;
        return rep;
    }
    const int lead = grouped.back().c > 0.0 ? 1 : -1;

    double env = 1.0;
    for (std::size_t i = 0; i < grouped.size(); ++i)
        for (std::size_t j = i + 1; j < grouped.size(); ++j)
            if (grouped[i].c * grouped[j].c < 0.0)
                env = std::max(env,
                               std::pow(std::fabs(grouped[i].c / grouped[j].c),
                                        1.0 / (grouped[j].e - grouped[i].e)));

    auto fn = [&grouped](double tt) {
        double v = 0.0;
        for (const Term& tm : grouped) v += tm.c * std::pow(tt, tm.e);
        return v;
    };
    RootScan scan = find_roots(fn, env, lead, sign_changes);
    rep.status = scan.status;
    rep.ill_conditioned = scan.ill_conditioned_pair;
    for (double tt : scan.roots) {
        const double s = std::log(tt);
        const NormTuple sc = t.dilated(s, p.N);
        FiberRoot root;
        root.s = s;
        root.psi = energy_I(sc, p);
        root.psi2 = psi_second(sc, p);
        root.grad_norm = std::sqrt(sc.grad2);
        const double band = 1e-8 * p.a * sc.grad2;
        root.cls = std::fabs(root.psi2) <= band ? FiberClass::degenerate
                   : root.psi2 < 0.0            ? FiberClass::minus
                                                : FiberClass::plus;
        rep.roots.push_back(root);
    }
    return rep;
}

double multiplier_closed_form(const NormTuple& t, const ProblemParams& p) {
    require_q_match(t, p, "multiplier_closed_form");
    if (!(t.mass2 > 0.0))
        throw std::invalid_argument("multiplier_closed_form: zero mass");
    if (p.mu == 0.0) return 0.0;
    return p.mu * (1.0 - p.delta_q()) * t.lq / t.mass2;
}

Diagnostics diagnostics_K_Q(const NormTuple& t, const ProblemParams& p,
                            double A2) {
    require_q_match(t, p, "diagnostics_K_Q");
    Diagnostics d;
    const double ts = p.two_star();
    d.K = (0.5 * p.a + 0.25 * p.b * A2) * t.grad2 - t.l2star / ts;
    d.Q = (p.a + p.b * A2) * t.grad2 - t.l2star;
    if (p.mu != 0.0) {
        d.K -= (p.mu / p.q) * t.lq;
        d.Q -= p.mu * p.delta_q() * t.lq;
    }
    return d;
}

// --- Gagliardo-Nirenberg constant -------------------------------------------

namespace {

struct ShotState {
    double Q, P, m; // profile value, derivative, accumulated int Q^2 r^{N-1}
};

ShotState shot_rhs(double r, const ShotState& s, double Nd, double q) {
    return {s.P,
            -(Nd - 1.0) / r * s.P + s.Q -
                std::pow(std::fabs(s.Q), q - 2.0) * s.Q,
            s.Q * s.Q * std::pow(r, Nd - 1.0)};
}

// Integrates the profile equation Q'' + (N-1)/r Q' = Q - |Q|^{q-2} Q from
// amplitude A.  outcome: +1 the profile crossed zero (A too large), -1 it
// turned back up while positive (A too small), 0 it decayed below the noise
// floor (ground state to working precision; mass is then trustworthy).
// When grid/values are given the profile is sampled onto the grid nodes by
// cubic Hermite interpolation of the integration steps.
struct ShotResult {
    int outcome;
    double mass; // int_0^end Q^2 r^{N-1} dr, no surface factor
};

ShotResult ground_shot(double A, double Nd, double q,
                       const RadialGrid* grid = nullptr,
                       std::vector<double>* values = nullptr) {
    const double r0 = 1e-6;
    const double curv = (A - std::pow(A, q - 1.0)) / Nd; // Laplacian(0)/N
    ShotState y{A + 0.5 * curv * r0 * r0, curv * r0,
                A * A * std::pow(r0, Nd) / Nd};
    double r = r0;
    std::size_t gi = 0;
    if (values) {
        values->assign(grid->size(), 0.0);
        (*values)[0] = A;
        gi = 1;
    }
    const double r_cap = 1e4;
    while (r < r_cap) {
        // grade the step near the origin where the 1/r coefficient turns
        const double h = std::min(1e-3, 0.05 * r + 1e-6);
        const ShotState k1 = shot_rhs(r, y, Nd, q);
        const ShotState y2{y.Q + 0.5 * h * k1.Q, y.P + 0.5 * h * k1.P,
                           y.m + 0.5 * h * k1.m};
        const ShotState k2 = shot_rhs(r + 0.5 * h, y2, Nd, q);
        const ShotState y3{y.Q + 0.5 * h * k2.Q, y.P + 0.5 * h * k2.P,
                           y.m + 0.5 * h * k2.m};
        const ShotState k3 = shot_rhs(r + 0.5 * h, y3, Nd, q);
        const ShotState y4{y.Q + h * k3.Q, y.P + h * k3.P, y.m + h * k3.m};
        const ShotState k4 = shot_rhs(r + h, y4, Nd, q);
        ShotState yn{y.Q + h / 6.0 * (k1.Q + 2.0 * k2.Q + 2.0 * k3.Q + k4.Q),
                     y.P + h / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P),
                     y.m + h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m)};
        if (values) {
            const auto& nodes = grid->nodes();
            while (gi < grid->size() && nodes[gi] <= r + h) {
                const double t = (nodes[gi] - r) / h;
                const double t2 = t * t, t3 = t2 * t;
                (*values)[gi] =
                    y.Q * (2.0 * t3 - 3.0 * t2 + 1.0) +
                    h * y.P * (t3 - 2.0 * t2 + t) +
                    yn.Q * (-2.0 * t3 + 3.0 * t2) + h * yn.P * (t3 - t2);
                ++gi;
            }
        }
        y = yn;
        r += h;
        if (y.Q <= 0.0) return {+1, y.m};
        if (y.P >= 0.0) return {-1, y.m};
        if (y.Q < 1e-16 * A) return {0, y.m};
    }
    throw ConvergenceError(
        "gn_constant_compute: profile shot exceeded the radius cap");
}

} // namespace

GnResult gn_constant_compute(std::shared_ptr<const RadialGrid> grid, double q) {
    const int N = grid->dim();
    if (!(q > 2.0) || !(q < 2.0 * N / (N - 2.0)))
        throw std::invalid_argument("gn_constant_compute: need 2 < q < 2N/(N-2)");
    const double Nd = N;
    const double delta = Nd * (q - 2.0) / (2.0 * q);

    // Bracket the ground-state amplitude between a turning shot and a
    // crossing shot, then bisect to working precision.
    double lo = 1.0 + 1e-9;
    if (ground_shot(lo, Nd, q).outcome != -1)
        throw ConvergenceError(
            "gn_constant_compute: low amplitude shot failed to turn");
    double hi = 2.0;
    while (ground_shot(hi, Nd, q).outcome != +1) {
        hi *= 2.0;
        if (hi > 1e6)
            throw ConvergenceError(
                "gn_constant_compute: no crossing amplitude below 1e6");
    }
    std::size_t rounds = 0;
    while (hi - lo > 1e-15 * hi) {
        const double mid = 0.5 * (lo + hi);
        (ground_shot(mid, Nd, q).outcome == +1 ? hi : lo) = mid;
        if (++rounds > 200) break;
    }

    const double A = 0.5 * (lo + hi);
    std::vector<double> vals;
    const ShotResult fin = ground_shot(A, Nd, q, grid.get(), &vals);
    const double surf =
        2.0 * std::pow(std::numbers::pi, Nd / 2.0) / std::tgamma(Nd / 2.0);
    const double M = surf * fin.mass;

    // The profile's own identities pin the remaining norms: grad2 = delta L
    // and mass = (1 - delta) L, so the quotient collapses to the mass alone.
    const double logL = std::log(M) - std::log1p(-delta);
    const double logC = (1.0 / q - 0.5) * logL - 0.5 * delta * std::log(delta) -
                        0.5 * (1.0 - delta) * std::log1p(-delta);

    RadialField u(grid);
    u.values = std::move(vals);
    GnResult res{std::exp(logC), project_mass(u, 1.0), rounds,
                 (hi - lo) / hi};
    return res;
}

namespace {
std::mutex gn_mutex;
std::map<std::string, double> gn_memo;

std::mutex sob_mutex;
std::map<int, double> sob_memo;
} // namespace

double gn_constant(std::shared_ptr<const RadialGrid> grid, double q) {
    char qbuf[48];
    std::snprintf(qbuf, sizeof qbuf, "N%d|q=%.17g", grid->dim(), q);
    const std::string key = qbuf;
    std::lock_guard<std::mutex> lock(gn_mutex);
    auto it = gn_memo.find(key);
    if (it != gn_memo.end()) return it->second;
    const double value = gn_constant_compute(std::move(grid), q).Cq;
    gn_memo.emplace(key, value);
    return value;
}

double sobolev_constant(int N) {
    {
        std::lock_guard<std::mutex> lock(sob_mutex);
        auto it = sob_memo.find(N);
        if (it != sob_memo.end()) return it->second;
    }
    // Reference grid well past the default: the gradient quadrature is the
    // accuracy bottleneck and converges at order 2 in (h0, 1/cells).
    GridSpec spec;
    spec.N = N;
    spec.cells = 32768;
    spec.h0 = 1.0 / 2048.0;
    spec.eps_hint = 1.0;
    spec.q_hint = 0.0;
    spec.tail_rel = 1e-10;
    auto grid = make_grid(spec);
    RadialField u1 = make_bubble(grid, 1.0);
    NormTuple t = norm_tuple(u1, 0.0);
    const double S = t.grad2 / std::pow(t.l2star, (N - 2.0) / N);
    std::lock_guard<std::mutex> lock(sob_mutex);
    sob_memo.emplace(N, S);
    return sob_memo.at(N);
}

} // namespace kirchnorm
