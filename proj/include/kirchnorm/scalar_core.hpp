#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kirchnorm/params.hpp"

namespace kirchnorm {

// Inputs every scalar landscape function needs: the problem parameters,
// the Sobolev constant S (computed once per N by the field module), and
// the Gagliardo-Nirenberg constant C_q, which is injected lazily because
// it requires a grid to compute.  Functions that need C_q throw
// std::logic_error when it has not been supplied.
struct ScalarContext {
    ProblemParams p;
    double S = 0.0;
    std::optional<double> Cq;

    double cq_or_throw(const char* who) const;
};

// --- landscape functions -------------------------------------------------
//
// All evaluators require t > 0 and throw std::domain_error otherwise.

// g(t) = b S^{N/2} t^2 - t^{4/(N-2)} + a
double eval_g(double t, const ScalarContext& ctx);
// f(t) = b t^2 - S^{-2*/2} t^{4/(N-2)} + a           (roots xi_-, xi_+)
double eval_f(double t, const ScalarContext& ctx);
// f1(t) = f(t) t^2 - mu_tilde C_q^q delta_q t^{q delta_q}
double eval_f1(double t, const ScalarContext& ctx);
// h(t) = (a/2) t^2 + (b/4) t^4 - (S^{-2*/2}/2*) t^{2*}
double eval_h(double t, const ScalarContext& ctx);
// h1(t) = h(t) - (mu_tilde C_q^q / q) t^{q delta_q}
double eval_h1(double t, const ScalarContext& ctx);
// k(t) = (1/4) a t^2 - (1/2* - 1/4) S^{-2*/2} t^{2*}
double eval_k(double t, const ScalarContext& ctx);
// f_c(k) = a/2 - (mu C_q^q / q) c^{(4-q)/2} k^{q-3} - ((1-bS^2)/(4S^2)) k
// (N = 4 only; throws RegimeError otherwise)
double eval_fc(double k, const ScalarContext& ctx);
// I0(t) = (1/N) a t - ((N-4)/(4N)) b t^2   with t standing for |grad u|_2^2
double eval_I0_reduced(double t, const ScalarContext& ctx);

// --- root finding ---------------------------------------------------------

enum class ScanStatus { ok, no_root, too_many };

struct RootScan {
    ScanStatus status = ScanStatus::no_root;
    std::vector<double> roots;          // ascending
    std::vector<double> residuals;      // f at each reported root
    // Set when two adjacent roots nearly coalesce (gap < 1e-6 * larger).
    bool ill_conditioned_pair = false;
    double t_max_used = 0.0;
};

// Scans (0, T] for sign changes of fn and refines each bracket by bisection
// (to 1e-6 relative) followed by secant polish (to 1e-12 relative).
// T starts at 10 * max(t_env, 1) and doubles until sign(fn(T)) == lead_sign,
// so roots beyond the analytic envelope estimate are still caught.
// status: no_root when no sign change exists, too_many when the number of
// sign changes exceeds max_roots (all refined roots are still returned).
RootScan find_roots(const std::function<double(double)>& fn, double t_env,
                    int lead_sign, int max_roots);

// --- thresholds -----------------------------------------------------------

struct ThresholdSet {
    int    N = 0;
    double a = 0.0;
    double S = 0.0;

    double b0 = 0.0;   // coupling threshold: two-root landscape below it
    double b1 = 0.0;   // sign threshold for the plus-level (N >= 5)

    // Populated when the defining regime applies; absent otherwise.
    std::optional<double> eta;          // peak of the reduced level map
    std::optional<double> xi_minus;     // roots of f (N>=5, 0<b<b0)
    std::optional<double> xi_plus;
    std::optional<double> xi1;          // single root of f (b<0, or N=4 b<S^-2)
    std::optional<double> c_N_minus;    // I0(xi_-^2)
    std::optional<double> c_N_plus;     // I0(xi_+^2)
    std::optional<double> c_N;          // I0(xi1^2), b<0 branch
    std::optional<double> Lambda;       // a^2 S^2 / (4 (1-b S^2)), N=4
    std::optional<double> k0;           // N=4, mu>0, 2<q<3 region radius
    std::optional<double> c0;           // mass threshold where max f_c hits 0
    std::optional<double> c1;           // second mass threshold (path regime)
    std::optional<double> k_c;          // argmax of f_c at the given mass
    std::optional<double> fc_at_kc;     // max value of f_c
    std::optional<double> xi0_mu;       // roots of f1 (N>=5, small mu>0)
    std::optional<double> xi_minus_mu;
    std::optional<double> xi_plus_mu;
    std::optional<double> xi0_mu1;      // unique zero of h1
    std::optional<double> h1_at_xi_plus_mu; // admissibility margin, want > 0

    bool xi_pair_ill_conditioned = false;

    // field name -> reason it is not defined for these parameters
    std::vector<std::pair<std::string, std::string>> absent;

    bool has(const std::optional<double>& f) const { return f.has_value(); }
};

// Computes every threshold the parameter tuple admits.  C_q-dependent
// fields (f1/h1 roots, c0, c1, k_c) are filled only when ctx.Cq is set;
// otherwise they are listed in `absent` with the reason "requires C_q".
ThresholdSet thresholds(const ScalarContext& ctx);

struct CriticalLevels {
    std::optional<double> c_minus;  // level of the peak root pair
    std::optional<double> c_plus;
    std::optional<double> c_single; // b<0 branch
    std::optional<double> Lambda;   // N=4 branch
};

CriticalLevels critical_levels(const ScalarContext& ctx);

// Largest mu_tilde = mu c^{q(1-delta_q)/2} (searched by bisection) for which
// the perturbed landscape keeps its three-root structure and h1 stays
// positive at the outer root.  N>=5 with b1 < b < b0 and 2 < q < 2+4/N.
double mu_tilde_max(const ScalarContext& ctx);

} // namespace kirchnorm
