#include "kirchnorm/regime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kirchnorm/errors.hpp"
#include "kirchnorm/functionals.hpp"
#include "kirchnorm/random_fields.hpp"

namespace kirchnorm {

const char* to_string(RegimeTag t) {
    switch (t) {
        case RegimeTag::th21i: return "th2.1i";
        case RegimeTag::th21ii: return "th2.1ii";
        case RegimeTag::th21iii: return "th2.1iii";
        case RegimeTag::th23: return "th2.3";
        case RegimeTag::th24: return "th2.4";
        case RegimeTag::th25: return "th2.5";
        case RegimeTag::th26: return "th2.6";
        case RegimeTag::th27: return "th2.7";
        default: return "inadmissible";
    }
}

std::optional<RegimeTag> regime_from_string(const std::string& s) {
    if (s == "th2.1i") return RegimeTag::th21i;
    if (s == "th2.1ii") return RegimeTag::th21ii;
    if (s == "th2.1iii") return RegimeTag::th21iii;
    if (s == "th2.3") return RegimeTag::th23;
    if (s == "th2.4") return RegimeTag::th24;
    if (s == "th2.5") return RegimeTag::th25;
    if (s == "th2.6" || s == "th3.1") return RegimeTag::th26;
    if (s == "th2.7") return RegimeTag::th27;
    if (s == "inadmissible") return RegimeTag::inadmissible;
    return std::nullopt;
}

bool RegimeReport::passed() const {
    for (const CheckResult& c : checks)
        if (!c.marginal && !c.pass) return false;
    return true;
}

namespace {

constexpr double kBand = 1e-9; // strict-inequality margin, relative

bool near(double x, double y, double scale) {
    return std::fabs(x - y) <= kBand * std::fabs(scale);
}

struct ClassifyResult {
    RegimeTag tag = RegimeTag::inadmissible;
    std::vector<RegimeTag> applicable;
    std::string why; // violated strict inequality when inadmissible
};

ClassifyResult classify_impl(const ScalarContext& ctx) {
    const ProblemParams& p = ctx.p;
    p.validate();
    const double S = ctx.S;
    ClassifyResult res;

    const ThresholdSet th = thresholds(ctx);
    const double b0 = th.b0, b1 = th.b1;

    if (p.mu == 0.0) {
        if (near(p.b, 0.0, b0)) {
            res.why = "b = 0 (a strict sign of b is required)";
            return res;
        }
        if (p.N >= 5) {
            if (p.b < 0.0) {
                res.tag = RegimeTag::th21ii;
            } else if (near(p.b, b0, b0)) {
                res.why = "b = b0 (the two-root window needs b < b0, "
                          "nonexistence needs b > b0)";
                return res;
            } else {
                res.tag = p.b < b0 ? RegimeTag::th21i : RegimeTag::th21iii;
            }
            res.applicable.push_back(res.tag);
            return res;
        }
        // N = 4: the landscape collapses at b = S^-2; both sides are covered.
        if (p.b < 0.0) {
            res.why = "N = 4 with mu = 0 and b < 0 carries no verified "
                      "statement";
            return res;
        }
        if (near(p.b, b0, b0)) {
            res.why = "b = S^-2 (threshold collapse boundary)";
            return res;
        }
        res.tag = RegimeTag::th24;
        res.applicable.push_back(res.tag);
        return res;
    }

    if (p.mu < 0.0) {
        if (p.N < 5) {
            res.why = "mu < 0 is only covered for N >= 5";
            return res;
        }
        if (p.b <= 0.0 || near(p.b, 0.0, b0)) {
            res.why = "mu < 0 requires b > 0";
            return res;
        }
        // validate() already enforces 2 < q < 2*; reject band hits.
        if (near(p.q, 2.0, 2.0) || near(p.q, p.two_star(), p.two_star())) {
            res.why = "q sits on the boundary of (2, 2*)";
            return res;
        }
        res.tag = RegimeTag::th23;
        res.applicable.push_back(res.tag);
        return res;
    }

    // mu > 0
    if (p.N >= 5) {
        const double qc = 2.0 + 4.0 / p.N;
        if (near(p.q, qc, qc)) {
            res.why = "q = 2 + 4/N (mass-subcritical boundary)";
            return res;
        }
        if (p.q > qc) {
            res.why = "q > 2 + 4/N (outside the mass-subcritical window)";
            return res;
        }
        if (near(p.b, b1, b0) || near(p.b, b0, b0)) {
            res.why = "b sits on the boundary of (b1, b0)";
            return res;
        }
        if (!(p.b > b1 && p.b < b0)) {
            res.why = "b outside (b1, b0)";
            return res;
        }
        res.tag = RegimeTag::th26;
        res.applicable.push_back(res.tag);
        return res;
    }

    // N = 4, mu > 0
    const double s2inv = 1.0 / (S * S);
    if (near(p.b, 0.0, s2inv) || near(p.b, s2inv, s2inv)) {
        res.why = "b sits on the boundary of (0, S^-2)";
        return res;
    }
    if (!(p.b > 0.0 && p.b < s2inv)) {
        res.why = "b outside (0, S^-2)";
        return res;
    }
    if (near(p.q, 3.0, 3.0)) {
        res.why = "q = 3 (strict window is 2 < q < 3)";
        return res;
    }
    if (p.q >= 3.0) {
        res.why = "q >= 3 (outside the window 2 < q < 3)";
        return res;
    }
    if (!ctx.Cq)
        throw std::logic_error(
            "classify: C_q is required for the N = 4 mass thresholds");
    if (!th.c0 || !th.c1)
        throw std::logic_error("classify: mass thresholds unavailable");
    const double c0 = *th.c0, c1 = *th.c1;
    if (near(p.c, c0, c0)) {
        res.why = "c = c0 (mass threshold boundary)";
        return res;
    }
    if (p.c > c0) {
        res.why = "c > c0 (no verified statement above the mass threshold)";
        return res;
    }
    res.applicable.push_back(RegimeTag::th25);
    const double cmin = std::min(c0, c1);
    if (p.c < cmin && !near(p.c, cmin, cmin)) {
        res.applicable.push_back(RegimeTag::th27);
        res.tag = RegimeTag::th27;
    } else {
        res.tag = RegimeTag::th25;
    }
    return res;
}

// --- check builders ---------------------------------------------------------

CheckResult check_gt(std::string name, std::string claim, double lhs,
                     double rhs, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.claim = std::move(claim);
    c.lhs = lhs;
    c.rhs = rhs;
    const double scale = kBand * std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
    c.pass = lhs - rhs > scale;
    c.marginal = std::fabs(lhs - rhs) <= scale;
    c.detail = std::move(detail);
    return c;
}

CheckResult check_that(std::string name, std::string claim, bool cond,
                       double lhs, double rhs, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.claim = std::move(claim);
    c.pass = cond;
    c.lhs = lhs;
    c.rhs = rhs;
    c.detail = std::move(detail);
    return c;
}

double min_f_scan(const ScalarContext& ctx) {
    // Dense log-scan of f around its natural balance scales.
    const double a = ctx.p.a, b = ctx.p.b, S = ctx.S;
    const int N = ctx.p.N;
    const double cc = std::pow(S, -ctx.p.two_star() / 2.0);
    double T = std::pow(a / cc, (N - 2.0) / 4.0);
    if (b > 0.0 && N > 4)
        T = std::max(T, std::pow(cc / b, (N - 2.0) / (2.0 * (N - 4.0))));
    if (b != 0.0) T = std::max(T, std::sqrt(a / std::fabs(b)));
    T *= 10.0;
    double mn = 1e300;
    const int K = 8192;
    for (int i = 0; i <= K; ++i) {
        const double t = T * std::pow(1e-12, 1.0 - double(i) / K);
        mn = std::min(mn, eval_f(t, ctx));
    }
    return mn;
}

// Cut-off extremal: v_eps = psi(r) U_eps(r) with a cubic smoothstep psi
// falling from 1 (r <= 1/2) to 0 (r >= 1).  N = 4 formula.
NormTuple probe_tuple(std::shared_ptr<const RadialGrid> grid, double eps) {
    RadialField v(grid);
    const auto& r = grid->nodes();
    const double A = std::sqrt(8.0 * eps);
    for (std::size_t i = 0; i < r.size(); ++i) {
        double psi;
        if (r[i] <= 0.5) {
            psi = 1.0;
        } else if (r[i] >= 1.0) {
            psi = 0.0;
        } else {
            const double t = 2.0 * (r[i] - 0.5);
            psi = 1.0 - t * t * (3.0 - 2.0 * t);
        }
        v.values[i] = psi * A / (eps + r[i] * r[i]);
    }
    return norm_tuple(v, 0.0);
}

// Scales a field tuple to mass c exactly (constant-amplitude rescale).
NormTuple tuple_mass_projected(NormTuple t, double c, int N, bool with_q,
                               double q, double two_star) {
    (void)N;
    const double a2 = c / t.mass2;
    t.grad2 *= a2;
    t.mass2 = c;
    t.l2star *= std::pow(a2, two_star / 2.0);
    if (with_q) t.lq *= std::pow(a2, q / 2.0);
    return t;
}

void note_flow(RegimeReport& rep, const char* label, const FlowResult& fr) {
    std::ostringstream os;
    os << label << ": status=" << to_string(fr.status)
       << " iters=" << fr.iterations << " objective=" << fr.objective
       << " grad2=" << fr.tuple.grad2 << " lambda=" << fr.lambda
       << " el_residual=" << fr.el_residual << " |P|=" << std::fabs(fr.pohozaev);
    for (const std::string& f : fr.flags) os << " [" << f << "]";
    rep.notes.push_back(os.str());
}

} // namespace

RegimeTag classify(const ScalarContext& ctx) { return classify_impl(ctx).tag; }

double lambda_probe_quotient(const ProblemParams& p,
                             std::shared_ptr<const RadialGrid> grid,
                             double eps) {
    if (p.N != 4 || grid->dim() != 4)
        throw RegimeError("lambda_probe_quotient: N = 4 probe");
    if (!(eps > 0.0))
        throw std::invalid_argument("lambda_probe_quotient: eps > 0");
    if (grid->r_max() < 1.0)
        throw RegimeError("lambda_probe_quotient: grid must cover the "
                          "cut-off support r <= 1");
    const NormTuple t = probe_tuple(grid, eps);
    const double denom = t.l2star - p.b * t.grad2 * t.grad2;
    if (!(denom > 0.0))
        throw RegimeError("lambda_probe_quotient: probe denominator not "
                          "positive (b too large for this eps?)");
    return p.a * p.a * t.grad2 * t.grad2 / (4.0 * denom);
}

RegimeReport verify(const ProblemParams& p, const VerifyOptions& opt) {
    RegimeReport rep;
    rep.params = p;
    rep.depth = opt.full ? "full" : "quick";

    GridSpec gs = opt.grid;
    if (gs.N != p.N) {
        if (gs.N != GridSpec{}.N) {
            std::ostringstream os;
            os << "grid dimension " << gs.N << " overridden to N = " << p.N;
            rep.notes.push_back(os.str());
        }
        gs.N = p.N;
    }
    if (p.mu != 0.0 && gs.q_hint == 0.0) gs.q_hint = p.q;
    auto grid = make_grid(gs);

    const double S = sobolev_constant(p.N);
    std::optional<double> Cq;
    if (p.mu != 0.0) Cq = gn_constant(grid, p.q);
    rep.S = S;
    rep.Cq = Cq;

    ScalarContext ctx{p, S, Cq};
    const ClassifyResult cls = classify_impl(ctx);
    rep.applicable = cls.applicable;
    rep.tag = cls.tag;
    if (opt.force_tag && *opt.force_tag != cls.tag) {
        rep.tag = *opt.force_tag;
        std::ostringstream os;
        os << "tag forced to " << to_string(rep.tag) << " (classified as "
           << to_string(cls.tag) << ")";
        if (!cls.why.empty()) os << ": " << cls.why;
        rep.notes.push_back(os.str());
    }
    rep.thresholds = thresholds(ctx);
    const ThresholdSet& th = rep.thresholds;

    if (rep.tag == RegimeTag::inadmissible) {
        rep.notes.push_back("inadmissible: " + cls.why);
        return rep;
    }

    auto& checks = rep.checks;
    const double qeff = p.mu != 0.0 ? p.q : 0.0;

    switch (rep.tag) {
        case RegimeTag::th21i: {
            checks.push_back(check_that(
                "roots.pair", "the gradient-norm landscape f has two roots",
                th.xi_minus && th.xi_plus, th.xi_minus.value_or(0.0),
                th.xi_plus.value_or(0.0)));
            if (th.eta && th.xi_minus && th.xi_plus) {
                checks.push_back(check_gt("roots.eta_above_minus",
                                          "eta > xi_minus", *th.eta,
                                          *th.xi_minus));
                checks.push_back(check_gt("roots.eta_below_plus",
                                          "xi_plus > eta", *th.xi_plus,
                                          *th.eta));
            }
            if (th.c_N_minus)
                checks.push_back(check_gt("levels.minus_positive",
                                          "c_minus > 0", *th.c_N_minus, 0.0));
            if (th.c_N_minus && th.c_N_plus)
                checks.push_back(check_gt("levels.order",
                                          "c_minus > c_plus", *th.c_N_minus,
                                          *th.c_N_plus));
            if (th.c_N_plus) {
                if (p.b > th.b1)
                    checks.push_back(check_gt(
                        "levels.plus_sign",
                        "c_plus > 0 on the upper coupling branch",
                        *th.c_N_plus, 0.0, "b > b1"));
                else
                    checks.push_back(check_gt(
                        "levels.plus_sign",
                        "c_plus <= 0 on the lower coupling branch", 0.0,
                        *th.c_N_plus, "b <= b1"));
            }
            if (opt.full) {
                auto bgrid = grid;
                double eps = eps_for_mass(*bgrid, p.c);
                if (eps < 0.25 * gs.eps_hint || eps > 4.0 * gs.eps_hint) {
                    // Rebuild around the width the mass constraint selects,
                    // otherwise the bubble core is under-resolved.
                    GridSpec gs2 = gs;
                    gs2.eps_hint = eps;
                    bgrid = make_grid(gs2);
                    eps = eps_for_mass(*bgrid, p.c);
                    std::ostringstream os;
                    os << "bubble grid rebuilt for eps = " << eps;
                    rep.notes.push_back(os.str());
                }
                RadialField u = project_mass(make_bubble(bgrid, eps), p.c);
                FiberReport fr = fiber_project(norm_tuple(u, 0.0), p);
                const bool shape = fr.roots.size() == 2 &&
                                   fr.roots[0].cls == FiberClass::minus &&
                                   fr.roots[1].cls == FiberClass::plus;
                checks.push_back(check_that(
                    "fiber.two_roots",
                    "fiber of the extremal profile has a peak/valley pair",
                    shape, double(fr.roots.size()), 2.0));
                if (shape && th.c_N_minus && th.c_N_plus) {
                    checks.push_back(check_that(
                        "fiber.level_minus",
                        "peak level matches c_minus within 1%",
                        std::fabs(fr.roots[0].psi - *th.c_N_minus) <=
                            0.01 * std::fabs(*th.c_N_minus),
                        fr.roots[0].psi, *th.c_N_minus));
                    checks.push_back(check_that(
                        "fiber.level_plus",
                        "valley level matches c_plus within 1%",
                        std::fabs(fr.roots[1].psi - *th.c_N_plus) <=
                            0.01 * std::fabs(*th.c_N_plus),
                        fr.roots[1].psi, *th.c_N_plus));
                }
                PathReport pr = mp_path_mu0(bgrid, p, S);
                if (th.c_N_minus)
                    checks.push_back(check_that(
                        "path.sup_matches_minus",
                        "explicit path sup matches c_minus within 1%",
                        std::fabs(pr.sup_level - *th.c_N_minus) <=
                            0.01 * std::fabs(*th.c_N_minus),
                        pr.sup_level, *th.c_N_minus));
            }
            break;
        }
        case RegimeTag::th21ii: {
            checks.push_back(check_that(
                "roots.single", "f has exactly one root for b < 0",
                th.xi1.has_value() && !th.xi_minus, th.xi1.value_or(0.0),
                0.0));
            if (th.c_N)
                checks.push_back(check_gt("levels.single_positive",
                                          "c_N > 0", *th.c_N, 0.0));
            if (opt.full) {
                auto bgrid = grid;
                double eps = eps_for_mass(*bgrid, p.c);
                if (eps < 0.25 * gs.eps_hint || eps > 4.0 * gs.eps_hint) {
                    GridSpec gs2 = gs;
                    gs2.eps_hint = eps;
                    bgrid = make_grid(gs2);
                    eps = eps_for_mass(*bgrid, p.c);
                }
                RadialField u = project_mass(make_bubble(bgrid, eps), p.c);
                FiberReport fr = fiber_project(norm_tuple(u, 0.0), p);
                const bool shape = fr.roots.size() == 1 &&
                                   fr.roots[0].cls == FiberClass::minus;
                checks.push_back(check_that(
                    "fiber.single_minus",
                    "fiber of the extremal profile has one peak root", shape,
                    double(fr.roots.size()), 1.0));
                if (shape && th.c_N)
                    checks.push_back(check_that(
                        "fiber.level", "peak level matches c_N within 1%",
                        std::fabs(fr.roots[0].psi - *th.c_N) <=
                            0.01 * std::fabs(*th.c_N),
                        fr.roots[0].psi, *th.c_N));
            }
            break;
        }
        case RegimeTag::th21iii: {
            const double mn = min_f_scan(ctx);
            checks.push_back(check_gt(
                "landscape.min_positive",
                "min f > 0: the constraint manifold is empty", mn, 0.0));
            if (opt.full) {
                std::mt19937_64 rng(opt.seed);
                std::size_t no_root = 0;
                for (std::size_t i = 0; i < opt.random_samples; ++i) {
                    NormTuple t = tuple_mass_projected(
                        norm_tuple(make_random_field(grid, rng), qeff), p.c,
                        p.N, qeff > 0.0, p.q, p.two_star());
                    if (fiber_project(t, p).status == ScanStatus::no_root)
                        ++no_root;
                }
                checks.push_back(check_that(
                    "pohozaev.positive_on_fibers",
                    "no dilation of any sampled field meets the constraint",
                    no_root == opt.random_samples, double(no_root),
                    double(opt.random_samples)));
            }
            break;
        }
        case RegimeTag::th23: {
            const double coeff = p.mu * (1.0 - p.delta_q());
            checks.push_back(check_gt(
                "multiplier.negative",
                "mu (1 - delta_q) < 0: constrained critical points carry a "
                "negative multiplier (convention: +lambda u on the gradient "
                "side)",
                0.0, coeff));
            if (opt.full) {
                std::mt19937_64 rng(opt.seed);
                std::size_t roots_total = 0, in_window = 0;
                double min_level = 1e300;
                std::size_t no_root = 0;
                for (std::size_t i = 0; i < opt.random_samples; ++i) {
                    NormTuple t = tuple_mass_projected(
                        norm_tuple(make_random_field(grid, rng), p.q), p.c,
                        p.N, true, p.q, p.two_star());
                    FiberReport fr = fiber_project(t, p);
                    if (fr.status == ScanStatus::no_root) ++no_root;
                    for (const FiberRoot& root : fr.roots) {
                        ++roots_total;
                        min_level = std::min(min_level, root.psi);
                        if (th.xi_minus && th.xi_plus &&
                            root.grad_norm >= *th.xi_minus * (1.0 - 1e-9) &&
                            root.grad_norm <= *th.xi_plus * (1.0 + 1e-9))
                            ++in_window;
                    }
                }
                if (th.xi_minus && th.xi_plus) {
                    checks.push_back(check_that(
                        "fiber_roots.window",
                        "constraint points live in the gradient-norm window "
                        "[xi_minus, xi_plus]",
                        in_window == roots_total, double(in_window),
                        double(roots_total),
                        std::to_string(roots_total) +
                            " constraint points across samples"));
                    if (roots_total > 0 && th.c_N_plus)
                        checks.push_back(check_gt(
                            "levels.floor",
                            "every constraint point sits above c_plus",
                            min_level, *th.c_N_plus));
                } else {
                    checks.push_back(check_that(
                        "pohozaev.positive_on_fibers",
                        "above the two-root window no dilation meets the "
                        "constraint",
                        no_root == opt.random_samples, double(no_root),
                        double(opt.random_samples)));
                }
            }
            break;
        }
        case RegimeTag::th24: {
            const double s2inv = 1.0 / (S * S);
            checks.push_back(check_that(
                "thresholds.collapse",
                "both coupling thresholds equal S^-2 exactly",
                th.b0 == th.b1 && th.b0 == s2inv, th.b0, s2inv));
            const bool coercive = p.b > s2inv;
            if (coercive)
                checks.push_back(check_gt(
                    "energy.coercive",
                    "b > S^-2: the reduced energy is nonnegative", p.b,
                    s2inv));
            else if (th.Lambda)
                checks.push_back(check_gt("level.Lambda_positive",
                                          "Lambda > 0", *th.Lambda, 0.0));
            if (opt.full) {
                if (coercive) {
                    std::mt19937_64 rng(opt.seed);
                    std::size_t positive = 0;
                    double worst_tail = 0.0;
                    for (std::size_t i = 0; i < opt.random_samples; ++i) {
                        NormTuple t = tuple_mass_projected(
                            norm_tuple(make_random_field(grid, rng), 0.0),
                            p.c, p.N, false, 0.0, p.two_star());
                        const double e0 = energy_I(t, p);
                        if (e0 > 0.0) ++positive;
                        const double far =
                            energy_I(t.dilated(-20.0, p.N), p);
                        worst_tail = std::max(
                            worst_tail, std::fabs(far) /
                                            std::max(std::fabs(e0), 1e-300));
                    }
                    checks.push_back(check_that(
                        "energy.positive_samples",
                        "reduced energy positive on every sampled field",
                        positive == opt.random_samples, double(positive),
                        double(opt.random_samples)));
                    checks.push_back(check_gt(
                        "dilation.infimum_zero",
                        "wide dilations drive the energy to zero", 1e-8,
                        worst_tail));
                } else {
                    const double L = *th.Lambda;
                    const double e1 = 0.2, e2 = 0.1, e3 = 0.05;
                    const double q1 = lambda_probe_quotient(p, grid, e1);
                    const double q2 = lambda_probe_quotient(p, grid, e2);
                    const double q3 = lambda_probe_quotient(p, grid, e3);
                    checks.push_back(check_that(
                        "probe.decreasing_to_Lambda",
                        "extremal probe quotient decreases toward Lambda",
                        q1 > q2 && q2 > q3 && q3 > L, q3, L));
                    // Least-squares line q(eps) = A + B eps; A should hit
                    // Lambda and the fit should be nearly exact.
                    const double xs[3] = {e1, e2, e3},
                                 ys[3] = {q1, q2, q3};
                    double sx = 0, sy = 0, sxx = 0, sxy = 0;
                    for (int i = 0; i < 3; ++i) {
                        sx += xs[i];
                        sy += ys[i];
                        sxx += xs[i] * xs[i];
                        sxy += xs[i] * ys[i];
                    }
                    const double B =
                        (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
                    const double A = (sy - B * sx) / 3.0;
                    double ss_res = 0, ss_tot = 0;
                    const double ym = sy / 3.0;
                    for (int i = 0; i < 3; ++i) {
                        const double fit = A + B * xs[i];
                        ss_res += (ys[i] - fit) * (ys[i] - fit);
                        ss_tot += (ys[i] - ym) * (ys[i] - ym);
                    }
                    const double r2 = 1.0 - ss_res / ss_tot;
                    checks.push_back(check_gt("probe.linear_fit",
                                              "quotient is linear in eps",
                                              r2, 0.99));
                    checks.push_back(check_that(
                        "probe.extrapolates_to_Lambda",
                        "eps -> 0 intercept within 5% of Lambda",
                        std::fabs(A - L) <= 0.05 * L, A, L));
                    // Unboundedness below along the probe fiber.  The probe
                    // satisfies l4 > b grad2^2 (the quotient denominator),
                    // so I(s) = (a/2) G e^{2s} - (D/4) e^{4s} with D > 0 and
                    // dips negative once e^{2s} passes 2aG/D; evaluate past
                    // that point.  Amplitude rescaling to mass c preserves
                    // the sign of D.
                    const NormTuple t0 = tuple_mass_projected(
                        probe_tuple(grid, e3), p.c, p.N, false, 0.0,
                        p.two_star());
                    const double D =
                        t0.l2star - p.b * t0.grad2 * t0.grad2;
                    const double s_neg =
                        0.5 * std::log(4.0 * p.a * t0.grad2 / D);
                    const double dip =
                        energy_I(t0.dilated(s_neg, p.N), p);
                    checks.push_back(check_gt(
                        "energy.unbounded_below",
                        "a dilation of the probe has negative energy", 0.0,
                        dip));
                }
            }
            break;
        }
        case RegimeTag::th25:
        case RegimeTag::th27: {
            if (th.k0)
                checks.push_back(check_gt("thresholds.k0_positive", "k0 > 0",
                                          *th.k0, 0.0));
            if (th.c0)
                checks.push_back(check_gt("thresholds.c_below_c0", "c < c0",
                                          *th.c0, p.c));
            if (rep.tag == RegimeTag::th27 && th.c1)
                checks.push_back(check_gt("thresholds.c_below_c1", "c < c1",
                                          *th.c1, p.c));
            if (th.k0)
                checks.push_back(check_gt(
                    "landscape.fc_at_k0_positive",
                    "f_c is positive at the region radius for c < c0",
                    eval_fc(*th.k0, ctx), 0.0));
            if (th.fc_at_kc)
                checks.push_back(check_gt("landscape.fc_max_positive",
                                          "max f_c > 0 below the mass "
                                          "threshold",
                                          *th.fc_at_kc, 0.0));
            if (opt.full) {
                FlowConfig fc;
                FlowResult fI = local_minimizer(grid, p, S, Cq, fc);
                note_flow(rep, "flow.I", fI);
                checks.push_back(check_that(
                    "flow.I_converged", "descent flow for I converges",
                    fI.status == FlowStatus::converged,
                    double(int(fI.status)), 0.0, to_string(fI.status)));
                if (fI.status == FlowStatus::converged && th.k0) {
                    checks.push_back(check_gt("flow.I_in_region",
                                              "minimizer stays inside the "
                                              "gradient-norm region",
                                              *th.k0, fI.tuple.grad2));
                    checks.push_back(check_gt("flow.I_negative",
                                              "I-minimum is negative", 0.0,
                                              fI.objective));
                    checks.push_back(check_gt("flow.I_multiplier_positive",
                                              "multiplier positive for "
                                              "mu > 0",
                                              fI.lambda, 0.0));
                    const auto [lo, hi] =
                        std::minmax_element(fI.u.values.begin(),
                                            fI.u.values.end());
                    const double floor =
                        -std::numeric_limits<double>::epsilon() * *hi;
                    checks.push_back(check_that(
                        "flow.I_positive_nodes",
                        "minimizer positive at all nodes (to roundoff)",
                        *lo >= floor, *lo, floor));
                }
                FlowConfig fcJ;
                fcJ.use_J = true;
                FlowResult fJ = local_minimizer(grid, p, S, Cq, fcJ);
                note_flow(rep, "flow.J", fJ);
                checks.push_back(check_that(
                    "flow.J_converged",
                    "descent flow for the auxiliary objective converges",
                    fJ.status == FlowStatus::converged,
                    double(int(fJ.status)), 0.0, to_string(fJ.status)));
                if (fJ.status == FlowStatus::converged) {
                    checks.push_back(check_gt("flow.J_negative",
                                              "auxiliary minimum is negative",
                                              0.0, fJ.objective));
                    checks.push_back(check_gt(
                        "flows.J_dominates_I",
                        "auxiliary objective dominates the energy at the "
                        "auxiliary minimizer",
                        fJ.objective, fJ.energy_I));
                }
                if (rep.tag == RegimeTag::th27 &&
                    fJ.status == FlowStatus::converged &&
                    fI.status == FlowStatus::converged) {
                    WPathConfig wc;
                    WPathReport wr = mp_path_W(fJ, p, S, fI.objective, wc);
                    {
                        std::ostringstream os;
                        os << "path.W: sup=" << wr.path.sup_level
                           << " threshold=" << wr.threshold
                           << " margin=" << wr.margin
                           << " t_star=" << wr.t_star << " t_bar=" << wr.t_bar
                           << " tau_max_dev=" << wr.tau_max_dev;
                        rep.notes.push_back(os.str());
                    }
                    checks.push_back(check_gt(
                        "path.threshold_margin",
                        "path sup sits strictly below the compactness "
                        "threshold",
                        wr.threshold, wr.path.sup_level));
                    MpEstimate est =
                        mp_level_estimate(p, S, Cq, {wr.path}, grid);
                    checks.push_back(check_gt(
                        "barrier.positive",
                        "sampled boundary barrier is positive",
                        est.barrier_lower, 0.0));
                    checks.push_back(check_gt(
                        "barrier.analytic_positive",
                        "closed-form boundary bound is positive",
                        est.barrier_analytic, 0.0));
                    checks.push_back(check_gt(
                        "bound.sandwich",
                        "upper estimate dominates the sampled barrier",
                        est.level_upper, est.barrier_lower));
                }
            }
            break;
        }
        case RegimeTag::th26: {
            checks.push_back(check_gt("thresholds.b_above_b1", "b > b1", p.b,
                                      th.b1));
            checks.push_back(check_gt("thresholds.b_below_b0", "b < b0",
                                      th.b0, p.b));
            const double pr_count = (th.xi0_mu ? 1.0 : 0.0) +
                                    (th.xi_minus_mu ? 1.0 : 0.0) +
                                    (th.xi_plus_mu ? 1.0 : 0.0);
            checks.push_back(check_that(
                "admissibility.perturbed_roots",
                "the perturbed landscape keeps three roots (mu small enough)",
                pr_count == 3.0, pr_count, 3.0));
            if (th.h1_at_xi_plus_mu)
                checks.push_back(check_gt(
                    "admissibility.h1_margin",
                    "h1 stays positive at the outer perturbed root",
                    *th.h1_at_xi_plus_mu, 0.0));
            checks.push_back(check_that(
                "admissibility.region_radius",
                "h1 has its sign change radius (region well defined)",
                th.xi0_mu1.has_value(), th.xi0_mu1.value_or(0.0), 0.0));
            if (th.xi0_mu && th.xi_minus_mu && th.xi_plus_mu && th.xi_minus &&
                th.xi_plus) {
                const bool ord = *th.xi0_mu < *th.xi_minus_mu &&
                                 *th.xi_minus_mu < *th.xi_minus &&
                                 *th.xi_minus < *th.xi_plus &&
                                 *th.xi_plus < *th.xi_plus_mu;
                checks.push_back(check_that(
                    "roots.interlace",
                    "perturbed roots interlace the unperturbed pair", ord,
                    *th.xi_minus_mu, *th.xi_minus));
            }
            if (opt.full) {
                FlowConfig fc;
                FlowResult fr = local_minimizer(grid, p, S, Cq, fc);
                note_flow(rep, "flow.minimizer", fr);
                checks.push_back(check_that(
                    "flow.converged", "descent flow converges",
                    fr.status == FlowStatus::converged,
                    double(int(fr.status)), 0.0, to_string(fr.status)));
                if (fr.status == FlowStatus::converged) {
                    checks.push_back(check_gt("flow.negative_level",
                                              "minimum level is negative",
                                              0.0, fr.objective));
                    if (th.xi0_mu1)
                        checks.push_back(check_gt(
                            "flow.in_region",
                            "minimizer stays inside the gradient-norm region",
                            *th.xi0_mu1 * *th.xi0_mu1, fr.tuple.grad2));
                    checks.push_back(check_gt(
                        "flow.multiplier_positive",
                        "multiplier positive for mu > 0", fr.lambda, 0.0));
                    const auto [lo, hi] =
                        std::minmax_element(fr.u.values.begin(),
                                            fr.u.values.end());
                    const double floor =
                        -std::numeric_limits<double>::epsilon() * *hi;
                    checks.push_back(check_that(
                        "flow.positive_nodes",
                        "minimizer positive at all nodes (to roundoff)",
                        *lo >= floor, *lo, floor));
                    // Vanishing trend: decreasing mu pulls both the level
                    // and the gradient norm toward zero.
                    double prev_m = std::fabs(fr.objective);
                    double prev_g = fr.tuple.grad2;
                    bool monotone = true;
                    for (int k = 1; k <= 3; ++k) {
                        ProblemParams ps = p;
                        ps.mu = p.mu * std::pow(0.5, k);
                        FlowResult fs = local_minimizer(grid, ps, S, Cq, fc);
                        if (fs.status != FlowStatus::converged) {
                            monotone = false;
                            break;
                        }
                        if (!(std::fabs(fs.objective) < prev_m &&
                              fs.tuple.grad2 < prev_g)) {
                            monotone = false;
                            break;
                        }
                        prev_m = std::fabs(fs.objective);
                        prev_g = fs.tuple.grad2;
                    }
                    checks.push_back(check_that(
                        "trend.vanishing_mu",
                        "|level| and grad2 decrease along a mu halving "
                        "sequence",
                        monotone, prev_m, 0.0));
                }
            }
            break;
        }
        default:
            break;
    }
    return rep;
}

std::vector<SweepRow> sweep(const ProblemParams& base, const std::string& axis,
                            const std::vector<double>& values,
                            const VerifyOptions& opt) {
    if (axis != "b" && axis != "c" && axis != "mu" && axis != "q")
        throw std::invalid_argument("sweep: axis must be one of b, c, mu, q");
    std::vector<SweepRow> rows(values.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(values.size()); ++i) {
        SweepRow& row = rows[i];
        row.axis_value = values[i];
        try {
            ProblemParams pp = base;
            if (axis == "b") pp.b = values[i];
            else if (axis == "c") pp.c = values[i];
            else if (axis == "mu") pp.mu = values[i];
            else pp.q = values[i];
            VerifyOptions o = opt;
            o.full = false;
            RegimeReport rep = verify(pp, o);
            row.tag = rep.tag;
            row.verify_pass = rep.passed();
            row.thresholds = rep.thresholds;
            row.checks = rep.checks;
        } catch (const std::exception& e) {
            row.error = true;
            row.error_text = e.what();
        } catch (...) {
            row.error = true;
            row.error_text = "unknown error";
        }
    }
    return rows;
}

} // namespace kirchnorm
