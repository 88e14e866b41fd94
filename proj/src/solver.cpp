#include "kirchnorm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kirchnorm/banded.hpp"
#include "kirchnorm/errors.hpp"
#include "kirchnorm/kernels.hpp"
#include "kirchnorm/random_fields.hpp"
#include "kirchnorm/scalar_core.hpp"

namespace kirchnorm {

const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::converged: return "converged";
        case FlowStatus::region_exit: return "region_exit";
        case FlowStatus::stalled: return "stalled";
        default: return "max_iters";
    }
}

namespace {

// Maximize f on [lo, hi] by golden-section search; returns (argmax, max).
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0;
         it < 200 && (b - a) > 1e-13 * std::max(1.0, std::fabs(a) + std::fabs(b));
         ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    if (f1 >= f2) return {x1, f1};
    return {x2, f2};
}

struct EvalBundle {
    NormTuple t;
    double E = 0.0;
};

} // namespace

FlowResult gradient_flow(const RadialField& init, const ProblemParams& p,
                         double S, const FlowConfig& cfg) {
    p.validate();
    const ProblemParams pe = cfg.use_J ? effective_params_J(p, S) : p;
    const auto grid = init.grid;
    const auto& w = grid->weights();
    const std::size_t n = grid->size();
    const double c = p.c;
    const double ts = p.two_star();
    const double qeff = pe.mu != 0.0 ? pe.q : 0.0;

    std::vector<double> u = init.values;
    std::vector<double> lu(n), g(n), gt(n), d(n), utry(n);

    auto project = [&](std::vector<double>& v) {
        const double m = kernels::weighted_dot(w, v, v);
        if (!(m > 0.0)) throw ConvergenceError("gradient_flow: field collapsed");
        kernels::scale(std::sqrt(c / m), v);
    };
    auto evaluate = [&](const std::vector<double>& v) {
        kernels::TupleSums s = kernels::tuple_sums(w, v, qeff, ts, qeff > 0.0);
        EvalBundle b;
        b.t = NormTuple{grid->dirichlet(v, v), s.mass2, s.lq, s.l2star, qeff};
        b.E = energy_I(b.t, pe);
        return b;
    };

    project(u);
    EvalBundle cur = evaluate(u);

    double lam = 0.0, res = 0.0;
    auto gradient = [&]() {
        grid->stiffness_apply(u, lu);
        const double kirch = pe.a + pe.b * cur.t.grad2;
        const bool has_mu = pe.mu != 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = u[i];
            double gi = kirch * lu[i] -
                        std::pow(std::fabs(ui), ts - 2.0) * ui;
            if (has_mu)
                gi -= pe.mu * std::pow(std::fabs(ui), pe.q - 2.0) * ui;
            g[i] = gi;
        }
        lam = -kernels::weighted_dot(w, g, u) / c;
        for (std::size_t i = 0; i < n; ++i) gt[i] = g[i] + lam * u[i];
        res = std::sqrt(kernels::weighted_dot(w, gt, gt));
    };
    gradient();
    const double res0 = res;

    // Preconditioner: the linearized constrained operator lam*W + kirch*K
    // (potential terms dropped, so solves stay SPD and directions stay
    // descent).  With that scaling a unit step is a quasi-Newton step; the
    // fallback mass-scale shift covers transients where lam <= 0.
    double prec_grad2 = cur.t.grad2;
    double prec_lam = 0.0;
    double prec_scale = 1.0;
    BandedSPD prec(1, 1);
    auto build_prec = [&]() {
        prec_grad2 = cur.t.grad2;
        prec_lam = lam;
        if (cfg.tau > 0.0) {
            prec = grid->shifted_stiffness(cfg.tau);
            prec_scale = 1.0;
        } else if (lam > 0.0) {
            const double kirch = pe.a + pe.b * cur.t.grad2;
            prec = grid->shifted_stiffness(kirch / lam);
            prec_scale = lam;
        } else {
            prec = grid->shifted_stiffness(c / std::max(cur.t.grad2, 1e-300));
            prec_scale = 1.0;
        }
        if (!prec.factor())
            throw std::logic_error("gradient_flow: preconditioner not SPD");
    };
    build_prec();
    auto prec_stale = [&]() {
        if (cfg.tau > 0.0) return false;
        if (cur.t.grad2 > 4.0 * prec_grad2 || cur.t.grad2 < 0.25 * prec_grad2)
            return true;
        if (lam > 0.0 && prec_lam > 0.0)
            return lam > 2.0 * prec_lam || lam < 0.5 * prec_lam;
        return (lam > 0.0) != (prec_lam > 0.0);
    };

    const double tol =
        cfg.residual_tol > 0.0 ? cfg.residual_tol : 1e-7 * std::max(res, 1e-270);

    FlowResult out;
    out.residual_tol = tol;
    out.status = FlowStatus::max_iters;

    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
        if (cfg.region_cap > 0.0 && cur.t.grad2 > cfg.region_cap) {
            out.status = FlowStatus::region_exit;
            break;
        }
        if (res <= tol) {
            out.status = FlowStatus::converged;
            break;
        }
        if (cfg.trace_stride > 0 && it % cfg.trace_stride == 0)
            out.trace.push_back({double(it), cur.E, cur.t.grad2});

        // The dilation direction of the energy landscape is much softer
        // than the shape directions; a periodic exact-scaling Newton step
        // along the fiber (accepted only when it lowers the energy) saves
        // the line search from crawling down that valley.
        if (it > 0 && it % 25 == 0 && cfg.recenter_rounds > 0) {
            const double P = pohozaev_P(cur.t, pe);
            const double psi2 = psi_second(cur.t, pe);
            double s = psi2 != 0.0 ? -P / psi2 : 0.0;
            if (std::isfinite(s) && std::fabs(s) > 1e-12) {
                s = std::clamp(s, -0.2, 0.2);
                RadialField cand(grid);
                cand.values = u;
                try {
                    // cell-fraction resamples carry an O(1e-5) interpolation
                    // mass defect on graded cells; the projection repairs it,
                    // the loose guard still catches real support truncation
                    cand = project_mass(dilate(cand, s, 1e-3), c);
                    EvalBundle ce = evaluate(cand.values);
                    if (ce.E < cur.E) {
                        u = cand.values;
                        cur = ce;
                        gradient();
                        if (res <= tol) {
                            out.status = FlowStatus::converged;
                            break;
                        }
                    }
                } catch (const SupportOverflow&) {
                    // wide tails: leave the iterate alone, descent continues
                }
            }
        }
        if (prec_stale()) build_prec();

        for (std::size_t i = 0; i < n; ++i) d[i] = w[i] * gt[i];
        prec.solve(d);
        if (prec_scale != 1.0)
            for (std::size_t i = 0; i < n; ++i) d[i] /= prec_scale;
        const double dec = kernels::weighted_dot(w, gt, d);
        if (!(dec > 0.0)) {
            out.flags.push_back("descent_direction_degenerate");
            out.status = FlowStatus::stalled;
            break;
        }

        // The quadratic model promises a decrease of ~dec/2 at the full
        // step.  Once that is below the roundoff noise of the energy
        // quadrature, accept/reject decisions are coin flips on the last
        // few bits of E; the iterate is as converged as doubles allow.
        const double escale =
            0.5 * pe.a * cur.t.grad2 +
            0.25 * std::fabs(pe.b) * cur.t.grad2 * cur.t.grad2 +
            (qeff > 0.0 ? std::fabs(pe.mu) / pe.q * cur.t.lq : 0.0) +
            cur.t.l2star / ts;
        const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                             escale * std::sqrt(double(n));
        if (0.5 * dec <= noise && res <= 1e-4 * res0) {
            out.flags.push_back("energy_roundoff_floor");
            out.status = FlowStatus::converged;
            break;
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) utry[i] = u[i] - alpha * d[i];
            project(utry);
            EvalBundle trial = evaluate(utry);
            if (trial.E <= cur.E - 1e-4 * alpha * dec) {
                u.swap(utry);
                cur = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.flags.push_back("armijo_exhausted");
            out.status = FlowStatus::stalled;
            break;
        }
        gradient();
    }
    out.iterations = it;

    RadialField field(grid);
    field.values = u;

    // A discrete critical point carries an O(h^2) Pohozaev defect purely
    // from dilation asymmetry of the grid; a few exact-scaling Newton
    // corrections along the fiber push it down to root-finding accuracy.
    if (out.status == FlowStatus::converged) {
        for (int round = 0; round < cfg.recenter_rounds; ++round) {
            const NormTuple t = norm_tuple(field, qeff);
            const double P = pohozaev_P(t, pe);
            const double psi2 = psi_second(t, pe);
            if (round == 0 && std::fabs(psi2) <= 1e-8 * pe.a * t.grad2)
                out.flags.push_back("near_degenerate_fiber");
            if (psi2 == 0.0 || !std::isfinite(P / psi2)) break;
            double s = -P / psi2;
            if (std::fabs(s) < 1e-17) break;
            if (std::fabs(s) > 0.1) {
                s = s > 0.0 ? 0.1 : -0.1;
                out.flags.push_back("recenter_step_clamped");
            }
            try {
                field = project_mass(dilate(field, s, 1e-3), c);
            } catch (const SupportOverflow& e) {
                out.flags.push_back(std::string("recenter_support_overflow: ") +
                                    e.what());
                break;
            }
            if (std::fabs(s) > 1e-9 && round + 1 == cfg.recenter_rounds)
                out.flags.push_back("recenter_incomplete");
        }
        u = field.values;
        cur = evaluate(u);
        gradient();
    }

    out.u = std::move(field);
    out.tuple = cur.t;
    out.objective = cur.E;
    out.energy_I = energy_I(cur.t, p);
    out.lambda = lam;
    out.el_residual = res;
    out.pohozaev = pohozaev_P(cur.t, pe);
    if (cfg.trace_stride > 0)
        out.trace.push_back({double(it), cur.E, cur.t.grad2});
    return out;
}

FlowResult local_minimizer(std::shared_ptr<const RadialGrid> grid,
                           const ProblemParams& p, double S,
                           std::optional<double> Cq, FlowConfig cfg) {
    p.validate();
    double cap = cfg.region_cap;
    if (cap == 0.0) {
        ScalarContext ctx{p, S, Cq};
        const ThresholdSet th = thresholds(ctx);
        if (p.N == 4) {
            if (!th.k0)
                throw RegimeError(
                    "local_minimizer: region radius k0 undefined for these "
                    "parameters; set region_cap explicitly");
            cap = *th.k0;
        } else {
            if (!th.xi0_mu1)
                throw RegimeError(
                    "local_minimizer: region radius xi0_mu1 undefined for "
                    "these parameters; set region_cap explicitly");
            cap = *th.xi0_mu1 * *th.xi0_mu1;
        }
    }
    cfg.region_cap = cap;

    // Wide positive bump with |grad u|_2^2 ~ 0.1 cap and mass c: a gaussian
    // of width sigma has grad2/mass = N / (2 sigma^2).
    const double sigma = std::sqrt(p.N * p.c / (0.2 * cap));
    RadialField init = project_mass(make_gaussian(grid, sigma, 1.0), p.c);
    FlowResult res = gradient_flow(init, p, S, cfg);
    if (sigma > grid->r_max() / 8.0)
        res.flags.push_back("init_bump_truncated");
    return res;
}

PathReport mp_path_mu0(std::shared_ptr<const RadialGrid> grid,
                       const ProblemParams& p, double S) {
    p.validate();
    (void)S;
    if (p.mu != 0.0)
        throw RegimeError("mp_path_mu0: defined for the pure critical problem "
                          "(mu = 0)");
    if (p.N < 5)
        throw RegimeError("mp_path_mu0: the extremal profile has infinite "
                          "mass for N = 4");
    const double eps = eps_for_mass(*grid, p.c);
    RadialField u = project_mass(make_bubble(grid, eps), p.c);
    const NormTuple base = norm_tuple(u, 0.0);

    FiberReport fr = fiber_project(base, p);
    if (fr.roots.size() != 2 || fr.roots[0].cls != FiberClass::minus ||
        fr.roots[1].cls != FiberClass::plus)
        throw RegimeError("mp_path_mu0: fiber of the extremal profile lacks "
                          "the peak/valley root pair");
    const double s_plus = fr.roots[1].s;
    const double s0 = fr.roots[0].s - 4.0;

    PathReport rep;
    rep.kind = "dilation-fiber";
    const std::size_t K = 512;
    auto level_at = [&](double t) {
        return fiber_eval(base, p, t * s_plus + (1.0 - t) * s0).psi;
    };
    double best = -1e300, best_t = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < K; ++i) {
        const double t = double(i) / double(K - 1);
        const double s = t * s_plus + (1.0 - t) * s0;
        const FiberPoint fp = fiber_eval(base, p, s);
        rep.t.push_back(t);
        rep.level.push_back(fp.psi);
        rep.grad2.push_back(base.dilated(s, p.N).grad2);
        if (fp.psi > best) {
            best = fp.psi;
            best_t = t;
            best_i = i;
        }
    }
    const double lo = best_i == 0 ? 0.0 : rep.t[best_i - 1];
    const double hi = best_i + 1 == K ? 1.0 : rep.t[best_i + 1];
    auto [gt, gv] = golden_max(level_at, lo, hi);
    if (gv > best) {
        best = gv;
        best_t = gt;
    }
    rep.sup_level = best;
    rep.sup_t = best_t;
    rep.end_level = rep.level.back();
    {
        std::ostringstream os;
        os << "s0 = " << s0 << ", s_plus = " << s_plus
           << ", fiber roots = " << fr.roots.size();
        rep.notes.push_back(os.str());
    }
    return rep;
}

WPathReport mp_path_W(const FlowResult& u_bar, const ProblemParams& p,
                      double S, double m_c, const WPathConfig& cfg) {
    p.validate();
    if (p.N != 4) throw RegimeError("mp_path_W: N = 4 construction");
    const double bS2 = p.b * S * S;
    if (!(p.b > 0.0) || !(bS2 < 1.0))
        throw RegimeError("mp_path_W: requires 0 < b < S^-2");
    if (!(m_c < 0.0))
        throw RegimeError("mp_path_W: needs a negative minimum level m_c for "
                          "the endpoint rule");
    const auto grid = u_bar.u.grid;
    const auto& w = grid->weights();
    const std::size_t n = grid->size();
    const double c = p.c;
    if (!(std::fabs(u_bar.tuple.mass2 - c) <= 1e-6 * c))
        throw MassMismatch("mp_path_W: minimizer mass does not match c");

    const RadialField Un = make_truncated_bubble(grid, cfg.n);
    const std::vector<double>& ub = u_bar.u.values;
    const std::vector<double>& un = Un.values;

    const double m00 = kernels::weighted_dot(w, ub, ub);
    const double m01 = kernels::weighted_dot(w, ub, un);
    const double m11 = kernels::weighted_dot(w, un, un);
    const double g00 = grid->dirichlet(ub, ub);
    const double g01 = grid->dirichlet(ub, un);
    const double g11 = grid->dirichlet(un, un);

    // |ub + t un|_4^4 is a quartic in t; freeze its quadrature coefficients.
    std::array<double, 5> q4{};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ub[i], y = un[i], wi = w[i];
        q4[0] += wi * x * x * x * x;
        q4[1] += wi * x * x * x * y;
        q4[2] += wi * x * x * y * y;
        q4[3] += wi * x * y * y * y;
        q4[4] += wi * y * y * y * y;
    }
    static const double binom[5] = {1.0, 4.0, 6.0, 4.0, 1.0};

    std::vector<double> vq(n);
    auto tuple_at = [&](double t) {
        const double vmass = m00 + 2.0 * t * m01 + t * t * m11;
        const double tau = std::sqrt(vmass / c);
        double lqv = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            lqv += w[i] * std::pow(std::fabs(ub[i] + t * un[i]), p.q);
        double l4 = 0.0;
        for (int k = 0; k <= 4; ++k) l4 += binom[k] * std::pow(t, k) * q4[k];
        NormTuple tup;
        tup.grad2 = g00 + 2.0 * t * g01 + t * t * g11;
        tup.mass2 = c;
        tup.lq = std::pow(tau, p.q - 4.0) * lqv;
        tup.l2star = l4;
        tup.q = p.q;
        return std::pair<NormTuple, double>(tup, tau);
    };
    auto level_at = [&](double t) { return energy_I(tuple_at(t).first, p); };

    WPathReport rep;
    rep.t_star = std::sqrt((p.a + p.b * g00) / (1.0 - bS2));
    const double Lambda = p.a * p.a * S * S / (4.0 * (1.0 - bS2));
    rep.threshold = u_bar.objective + Lambda;
    rep.t_bar = cfg.t_bar;
    if (rep.t_bar == 0.0) {
        rep.t_bar = 2.0 * rep.t_star;
        int doublings = 0;
        while (level_at(rep.t_bar) >= 2.0 * m_c) {
            rep.t_bar *= 2.0;
            if (++doublings > 60)
                throw ConvergenceError(
                    "mp_path_W: path endpoint never drops below 2 m(c)");
        }
    }

    PathReport& path = rep.path;
    path.kind = "W-superposition";
    const std::size_t K = std::max<std::size_t>(cfg.t_samples, 8);
    double best = -1e300, best_t = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < K; ++i) {
        const double t = rep.t_bar * double(i) / double(K - 1);
        auto [tup, tau] = tuple_at(t);
        const double lvl = energy_I(tup, p);
        path.t.push_back(t);
        path.level.push_back(lvl);
        path.grad2.push_back(tup.grad2);
        rep.tau_max_dev = std::max(rep.tau_max_dev, std::fabs(tau - 1.0));
        if (lvl > best) {
            best = lvl;
            best_t = t;
            best_i = i;
        }
    }
    const double lo = best_i == 0 ? 0.0 : path.t[best_i - 1];
    const double hi = best_i + 1 == K ? rep.t_bar : path.t[best_i + 1];
    auto [gt, gv] = golden_max(level_at, lo, hi);
    if (gv > best) {
        best = gv;
        best_t = gt;
    }
    path.sup_level = best;
    path.sup_t = best_t;
    path.end_level = path.level.back();
    rep.margin = rep.threshold - path.sup_level;

    // Field-level spot check of the exact scaling laws: materialize W_{n,t}
    // at three path points and integrate its mass.
    for (double t : {0.0, 0.5 * rep.t_bar, rep.t_bar}) {
        const double vmass = m00 + 2.0 * t * m01 + t * t * m11;
        const double tau = std::sqrt(vmass / c);
        RadialField vf(grid);
        for (std::size_t i = 0; i < n; ++i) vf.values[i] = ub[i] + t * un[i];
        // W(x) = tau v(tau x).  In N = 4 the mass-preserving dilation by
        // s = log(tau) is exp(Ns/2) v(e^s x) = tau^2 v(tau x), so W is the
        // resampled dilation divided by tau; tau >= 1 shrinks the support,
        // so no extrapolation happens.
        RadialField W = dilate(vf, std::log(tau), 1e-2);
        for (std::size_t i = 0; i < n; ++i) W.values[i] /= tau;
        const double mass_quad = kernels::weighted_dot(w, W.values, W.values);
        if (!(std::fabs(mass_quad - c) <= 1e-4 * c)) {
            std::ostringstream os;
            os << "mp_path_W: materialized mass " << mass_quad
               << " deviates from c = " << c << " at t = " << t;
            throw MassMismatch(os.str());
        }
    }
    {
        std::ostringstream os;
        os << "n = " << cfg.n << ", t_star = " << rep.t_star
           << ", t_bar = " << rep.t_bar;
        path.notes.push_back(os.str());
    }
    return rep;
}

MpEstimate mp_level_estimate(const ProblemParams& p, double S,
                             std::optional<double> Cq,
                             const std::vector<PathReport>& paths,
                             std::shared_ptr<const RadialGrid> grid) {
    p.validate();
    if (paths.empty())
        throw std::invalid_argument("mp_level_estimate: no paths supplied");
    ScalarContext ctx{p, S, Cq};
    const ThresholdSet th = thresholds(ctx);
    if (!th.k0)
        throw RegimeError("mp_level_estimate: boundary radius k0 undefined "
                          "for these parameters");
    const double k0 = *th.k0;

    MpEstimate est;
    est.level_upper = paths.front().sup_level;
    for (const PathReport& pr : paths)
        est.level_upper = std::min(est.level_upper, pr.sup_level);
    est.barrier_analytic = k0 * eval_fc(k0, ctx);

    // Sampled boundary barrier: random mass-c fields carried onto
    // grad2 = k0 by exact tuple scaling (mass-preserving dilation).
    std::mt19937_64 rng(1234);
    const double qeff = p.mu != 0.0 ? p.q : 0.0;
    double lowest = 1e300;
    for (int i = 0; i < 64; ++i) {
        RadialField f = make_random_field(grid, rng);
        NormTuple t = norm_tuple(f, qeff);
        const double a2 = p.c / t.mass2; // amplitude^2 of the mass projection
        t.grad2 *= a2;
        t.mass2 = p.c;
        t.l2star *= std::pow(a2, p.two_star() / 2.0);
        if (qeff > 0.0) t.lq *= std::pow(a2, p.q / 2.0);
        const double s = 0.5 * std::log(k0 / t.grad2);
        const NormTuple bt = t.dilated(s, p.N);
        lowest = std::min(lowest, energy_I(bt, p));
    }
    est.barrier_lower = lowest;
    est.barrier_positive = lowest > 0.0;
    return est;
}

} // namespace kirchnorm
