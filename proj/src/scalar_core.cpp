#include "kirchnorm/scalar_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kirchnorm {

namespace {

void require_positive(double t, const char* who) {
    if (!(t > 0.0)) {
        std::ostringstream os;
        os << who << ": argument must be positive, got " << t;
        throw std::domain_error(os.str());
    }
}

// S^{-2*/2} = S^{-N/(N-2)}
double crit_coef(const ScalarContext& ctx) {
    const double N = ctx.p.N;
    return std::pow(ctx.S, -N / (N - 2.0));
}

} // namespace

void ProblemParams::validate() const {
    if (N < 4) throw RegimeError("N >= 4 required (got N = " + std::to_string(N) + ")");
    if (!(a > 0.0)) throw RegimeError("a > 0 required");
    if (!(c > 0.0)) throw RegimeError("c > 0 required");
    if (mu != 0.0) {
        const double qsup = (N == 4) ? 4.0 : two_star();
        if (!(q > 2.0)) throw RegimeError("q > 2 required (got q = " + std::to_string(q) + ")");
        if (!(q < qsup))
            throw RegimeError("q < " + std::to_string(qsup) + " required (got q = " +
                              std::to_string(q) + ")");
    }
}

std::string ProblemParams::describe() const {
    std::ostringstream os;
    os << "N=" << N << " a=" << a << " b=" << b << " mu=" << mu << " q=" << q
       << " c=" << c;
    return os.str();
}

double ScalarContext::cq_or_throw(const char* who) const {
    if (!Cq)
        throw std::logic_error(std::string(who) +
                               ": Gagliardo-Nirenberg constant has not been injected");
    return *Cq;
}

double eval_g(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_g");
    const double N = ctx.p.N;
    return ctx.p.b * std::pow(ctx.S, N / 2.0) * t * t -
           std::pow(t, 4.0 / (N - 2.0)) + ctx.p.a;
}

double eval_f(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_f");
    const double N = ctx.p.N;
    return ctx.p.b * t * t - crit_coef(ctx) * std::pow(t, 4.0 / (N - 2.0)) + ctx.p.a;
}

double eval_f1(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_f1");
    const double Cq = ctx.cq_or_throw("eval_f1");
    const double dq = ctx.p.delta_q();
    return eval_f(t, ctx) * t * t -
           ctx.p.mu_tilde() * std::pow(Cq, ctx.p.q) * dq * std::pow(t, ctx.p.q * dq);
}

double eval_h(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_h");
    const double ts = ctx.p.two_star();
    return 0.5 * ctx.p.a * t * t + 0.25 * ctx.p.b * std::pow(t, 4) -
           crit_coef(ctx) / ts * std::pow(t, ts);
}

double eval_h1(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_h1");
    const double Cq = ctx.cq_or_throw("eval_h1");
    return eval_h(t, ctx) - ctx.p.mu_tilde() * std::pow(Cq, ctx.p.q) / ctx.p.q *
                                std::pow(t, ctx.p.q * ctx.p.delta_q());
}

double eval_k(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_k");
    const double ts = ctx.p.two_star();
    return 0.25 * ctx.p.a * t * t -
           (1.0 / ts - 0.25) * crit_coef(ctx) * std::pow(t, ts);
}

double eval_fc(double k, const ScalarContext& ctx) {
    require_positive(k, "eval_fc");
    if (ctx.p.N != 4) throw RegimeError("eval_fc: defined for N = 4 only");
    const double Cq = ctx.cq_or_throw("eval_fc");
    const double S2 = ctx.S * ctx.S;
    const double q = ctx.p.q;
    return 0.5 * ctx.p.a -
           ctx.p.mu * std::pow(Cq, q) / q * std::pow(ctx.p.c, (4.0 - q) / 2.0) *
               std::pow(k, q - 3.0) -
           (1.0 - ctx.p.b * S2) / (4.0 * S2) * k;
}

double eval_I0_reduced(double t, const ScalarContext& ctx) {
    require_positive(t, "eval_I0_reduced");
    const double N = ctx.p.N;
    return ctx.p.a * t / N - (N - 4.0) / (4.0 * N) * ctx.p.b * t * t;
}

RootScan find_roots(const std::function<double(double)>& fn, double t_env,
                    int lead_sign, int max_roots) {
    RootScan out;
    double T = 10.0 * std::max(t_env, 1.0);
    for (int tries = 0; tries < 200; ++tries) {
        const double v = fn(T);
        if ((lead_sign > 0 && v > 0.0) || (lead_sign < 0 && v < 0.0)) break;
        T *= 2.0;
    }
    out.t_max_used = T;

    // log-spaced sign scan over (T*1e-14, T]
    constexpr int K = 4096;
    const double lo = T * 1e-14;
    const double step = std::log(T / lo) / (K - 1);
    double prev_t = lo;
    double prev_v = fn(prev_t);
    std::vector<std::pair<double, double>> brackets;
    for (int j = 1; j < K; ++j) {
        const double t = lo * std::exp(step * j);
        const double v = fn(t);
        if (prev_v == 0.0) {
            brackets.emplace_back(prev_t, prev_t);
        } else if (v != 0.0 && std::signbit(v) != std::signbit(prev_v)) {
            brackets.emplace_back(prev_t, t);
        }
        prev_t = t;
        prev_v = v;
    }

    for (auto [bl, bh] : brackets) {
        double x;
        if (bl == bh) {
            x = bl;
        } else {
            double fl = fn(bl);
            // bisection to 1e-6 relative
            while (bh - bl > 1e-6 * bh) {
                const double m = 0.5 * (bl + bh);
                const double fm = fn(m);
                if (fm == 0.0) { bl = bh = m; break; }
                if (std::signbit(fm) == std::signbit(fl)) { bl = m; fl = fm; }
                else bh = m;
            }
            // secant polish to 1e-12 relative, kept inside the bracket
            double x0 = bl, x1 = bh;
            double f0 = fn(x0), f1 = fn(x1);
            x = 0.5 * (x0 + x1);
            for (int it = 0; it < 80; ++it) {
                if (f1 == f0) break;
                double xn = x1 - f1 * (x1 - x0) / (f1 - f0);
                if (!(xn > bl && xn < bh)) xn = 0.5 * (x0 + x1);
                const double fnv = fn(xn);
                x0 = x1; f0 = f1;
                x1 = xn; f1 = fnv;
                if (std::fabs(x1 - x0) <= 1e-12 * std::fabs(x1)) break;
            }
            x = x1;
        }
        out.roots.push_back(x);
        out.residuals.push_back(fn(x));
    }

    std::sort(out.roots.begin(), out.roots.end());
    if (out.roots.empty()) {
        out.status = ScanStatus::no_root;
    } else if (static_cast<int>(out.roots.size()) > max_roots) {
        out.status = ScanStatus::too_many;
    } else {
        out.status = ScanStatus::ok;
    }
    for (std::size_t i = 1; i < out.roots.size(); ++i) {
        if (out.roots[i] - out.roots[i - 1] < 1e-6 * out.roots[i])
            out.ill_conditioned_pair = true;
    }
    return out;
}

namespace {

// Analytic envelope for the roots of f: balance each pair of terms.
double envelope_f(const ScalarContext& ctx) {
    const double N = ctx.p.N;
    const double a = ctx.p.a, b = ctx.p.b;
    const double cc = std::pow(ctx.S, -N / (N - 2.0));
    double env = std::pow(a / cc, (N - 2.0) / 4.0); // a vs critical term
    if (b > 0.0) {
        env = std::max(env, std::sqrt(a / b));
        if (N > 4) // critical term vs b t^2 (only balances for N >= 5)
            env = std::max(env, std::pow(cc / b, (N - 2.0) / (2.0 * (N - 4.0))));
    } else if (b < 0.0) {
        env = std::max(env, std::sqrt(a / -b));
    }
    return env;
}

} // namespace

ThresholdSet thresholds(const ScalarContext& ctx) {
    const ProblemParams& p = ctx.p;
    p.validate();
    ThresholdSet T;
    T.N = p.N;
    T.a = p.a;
    T.S = ctx.S;
    const double N = p.N;
    const double SN2 = std::pow(ctx.S, N / 2.0);

    T.b0 = 2.0 / (N - 2.0) * std::pow((N - 4.0) / (p.a * (N - 2.0)), (N - 4.0) / 2.0) / SN2;
    T.b1 = 4.0 / N * std::pow((N - 4.0) / (p.a * N), (N - 4.0) / 2.0) / SN2;

    auto absent = [&T](const char* field, const char* why) {
        T.absent.emplace_back(field, why);
    };

    if (p.N >= 5 && p.b > 0.0) {
        T.eta = std::sqrt(2.0 * p.a / ((N - 4.0) * p.b));
    } else {
        absent("eta", p.N == 4 ? "undefined for N = 4" : "requires b > 0, N >= 5");
    }

    // roots of f
    const double env = envelope_f(ctx);
    auto f = [&](double t) { return eval_f(t, ctx); };
    if (p.N >= 5 && p.b > 0.0 && p.b < T.b0) {
        RootScan scan = find_roots(f, env, +1, 2);
        if (scan.status == ScanStatus::ok && scan.roots.size() == 2) {
            T.xi_minus = scan.roots[0];
            T.xi_plus = scan.roots[1];
            T.xi_pair_ill_conditioned = scan.ill_conditioned_pair;
            T.c_N_minus = eval_I0_reduced(scan.roots[0] * scan.roots[0], ctx);
            T.c_N_plus = eval_I0_reduced(scan.roots[1] * scan.roots[1], ctx);
        } else {
            absent("xi_minus/xi_plus", "root scan did not find the expected pair");
        }
    } else if (p.b < 0.0) {
        RootScan scan = find_roots(f, env, -1, 1);
        if (scan.status == ScanStatus::ok && scan.roots.size() == 1) {
            T.xi1 = scan.roots[0];
            T.c_N = eval_I0_reduced(scan.roots[0] * scan.roots[0], ctx);
        } else {
            absent("xi1", "root scan did not find the single root");
        }
    } else if (p.N == 4 && p.b > 0.0 && p.b * ctx.S * ctx.S < 1.0) {
        RootScan scan = find_roots(f, env, -1, 1);
        if (scan.status == ScanStatus::ok && scan.roots.size() == 1) T.xi1 = scan.roots[0];
    } else {
        absent("xi_minus/xi_plus", "f has no positive root in this regime");
    }

    if (p.N == 4) {
        const double S2 = ctx.S * ctx.S;
        if (p.b > 0.0 && p.b < 1.0 / S2) {
            T.Lambda = p.a * p.a * S2 / (4.0 * (1.0 - p.b * S2));
        } else {
            absent("Lambda", "requires N = 4 with 0 < b < S^-2");
        }
        if (p.mu > 0.0 && p.q > 2.0 && p.q < 3.0 && p.b > 0.0 && p.b < 1.0 / S2) {
            const double omb = 1.0 - p.b * S2;
            T.k0 = 2.0 * p.a * S2 * (3.0 - p.q) / (omb * (4.0 - p.q));
            if (ctx.Cq) {
                const double Cqq = std::pow(*ctx.Cq, p.q);
                const double q = p.q;
                T.c0 = *T.k0 * *T.k0 *
                       std::pow(q * omb / (4.0 * p.mu * Cqq * S2 * (3.0 - q)),
                                2.0 / (4.0 - q));
                T.c1 = std::pow(p.a * q * std::pow(*T.k0, 3.0 - q) /
                                    (2.0 * p.mu * Cqq * (4.0 - q) * omb),
                                2.0 / (4.0 - q));
                T.k_c = std::pow(4.0 * p.mu * Cqq * S2 * (3.0 - q) / (q * omb),
                                 1.0 / (4.0 - q)) *
                        std::sqrt(p.c);
                T.fc_at_kc = eval_fc(*T.k_c, ctx);
            } else {
                absent("c0/c1/k_c", "requires C_q");
            }
        } else {
            absent("k0/c0/c1/k_c", "requires N = 4, mu > 0, 2 < q < 3, 0 < b < S^-2");
        }
    } else {
        absent("Lambda/k0/c0/c1/k_c", "defined for N = 4 only");
    }

    // perturbed landscape roots (N >= 5, mu > 0)
    if (p.N >= 5 && p.mu > 0.0 && p.q > 2.0 && p.q < 2.0 + 4.0 / N) {
        if (ctx.Cq) {
            auto f1 = [&](double t) { return eval_f1(t, ctx); };
            RootScan scan = find_roots(f1, envelope_f(ctx), +1, 3);
            if (scan.status == ScanStatus::ok && scan.roots.size() == 3) {
                T.xi0_mu = scan.roots[0];
                T.xi_minus_mu = scan.roots[1];
                T.xi_plus_mu = scan.roots[2];
                T.h1_at_xi_plus_mu = eval_h1(scan.roots[2], ctx);
                auto h1 = [&](double t) { return eval_h1(t, ctx); };
                RootScan hscan = find_roots(h1, envelope_f(ctx), +1, 3);
                if (!hscan.roots.empty() && *T.h1_at_xi_plus_mu > 0.0) {
                    T.xi0_mu1 = hscan.roots.front();
                } else {
                    absent("xi0_mu1", "h1 admits no unique positive zero here");
                }
            } else {
                absent("xi0_mu/xi_minus_mu/xi_plus_mu",
                       "perturbed landscape lost its three-root structure");
            }
        } else {
            absent("xi0_mu/xi_minus_mu/xi_plus_mu/xi0_mu1", "requires C_q");
        }
    } else if (p.mu != 0.0) {
        absent("xi0_mu/xi_minus_mu/xi_plus_mu/xi0_mu1",
               "requires N >= 5, mu > 0, 2 < q < 2 + 4/N");
    }

    return T;
}

CriticalLevels critical_levels(const ScalarContext& ctx) {
    ThresholdSet T = thresholds(ctx);
    CriticalLevels L;
    L.c_minus = T.c_N_minus;
    L.c_plus = T.c_N_plus;
    L.c_single = T.c_N;
    L.Lambda = T.Lambda;
    return L;
}

double mu_tilde_max(const ScalarContext& ctx) {
    const ProblemParams& p = ctx.p;
    if (p.N < 5) throw RegimeError("mu_tilde_max: N >= 5 required");
    if (!(p.q > 2.0 && p.q < 2.0 + 4.0 / p.N))
        throw RegimeError("mu_tilde_max: 2 < q < 2 + 4/N required");
    ctx.cq_or_throw("mu_tilde_max");

    auto admissible = [&](double mt) {
        ScalarContext c2 = ctx;
        c2.p.mu = mt; // with c = 1 mu_tilde == mu
        c2.p.c = 1.0;
        auto f1 = [&](double t) { return eval_f1(t, c2); };
        RootScan scan = find_roots(f1, envelope_f(c2), +1, 3);
        if (scan.status != ScanStatus::ok || scan.roots.size() != 3) return false;
        return eval_h1(scan.roots[2], c2) > 0.0;
    };

    double lo = 0.0, hi = 1.0;
    if (!admissible(1e-12)) return 0.0;
    while (admissible(hi) && hi < 1e12) { lo = hi; hi *= 2.0; }
    if (hi >= 1e12) return hi;
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        (admissible(m) ? lo : hi) = m;
    }
    return lo;
}

} // namespace kirchnorm
