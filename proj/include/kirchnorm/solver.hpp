#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kirchnorm/functionals.hpp"
#include "kirchnorm/radial_field.hpp"

namespace kirchnorm {

enum class FlowStatus { converged, region_exit, stalled, max_iters };
const char* to_string(FlowStatus s);

struct FlowConfig {
    double      residual_tol = 0.0;  // 0 => 1e-9 * initial gradient scale
    std::size_t max_iters    = 400000;
    double      region_cap   = 0.0;  // stop with region_exit when grad2 > cap
    bool        use_J        = false; // N=4 auxiliary objective
    double      tau          = 0.0;  // preconditioner shift; 0 => mass/grad2
    int         recenter_rounds = 8; // fiber recentering passes at the end
    std::size_t trace_stride = 0;    // record (iter, energy, grad2) every k
};

struct FlowResult {
    FlowStatus status = FlowStatus::stalled;
    RadialField u;
    NormTuple tuple;          // q-slot filled when mu != 0
    double objective = 0.0;   // I, or J when config.use_J
    double energy_I = 0.0;    // always reported
    double lambda = 0.0;      // tangency multiplier at the last step
    double el_residual = 0.0; // weighted L2 norm of the EL expression
    double pohozaev = 0.0;    // P at the reported tuple (effective params)
    double residual_tol = 0.0;
    std::size_t iterations = 0;
    std::vector<std::string> flags;
    std::vector<std::array<double, 3>> trace; // (iter, objective, grad2)
};

// Projected descent on the mass sphere |u|_2^2 = c: tangential
// preconditioned gradient steps with backtracking, exact mass
// renormalization after every step, stopping on the Euler-Lagrange
// residual.  Converged results are fiber-recentered (a final exact-scaling
// dilation) so the Pohozaev value at the reported tuple is at root-finding
// accuracy rather than grid accuracy.
FlowResult gradient_flow(const RadialField& init, const ProblemParams& p,
                         double S, const FlowConfig& cfg);

// Flow started from a wide positive bump placed deep inside the admissible
// region (grad2 = 0.1 * cap).  The cap is k0 for N=4 and (xi0_mu1)^2 for
// N>=5; pass it via cfg.region_cap or leave 0 to have it derived from the
// thresholds (requires Cq when mu != 0).
FlowResult local_minimizer(std::shared_ptr<const RadialGrid> grid,
                           const ProblemParams& p, double S,
                           std::optional<double> Cq, FlowConfig cfg);

struct PathReport {
    std::vector<double> t;       // path parameter samples in [0, 1]
    std::vector<double> level;   // objective along the path
    std::vector<double> grad2;   // gradient norm square along the path
    double sup_level = 0.0;
    double sup_t = 0.0;
    double end_level = 0.0;
    std::string kind;
    std::vector<std::string> notes;
};

// Explicit dilation path for the pure critical problem (mu = 0, N >= 5,
// 0 < b < b0): s(t) = t s_+ + (1-t) s_0 across the fiber of the bubble,
// evaluated by exact tuple scaling.  The supremum recovers the peak level.
PathReport mp_path_mu0(std::shared_ptr<const RadialGrid> grid,
                       const ProblemParams& p, double S);

struct WPathConfig {
    int    n = 160;          // truncation index of the compact bubble
    std::size_t t_samples = 256;
    double t_bar = 0.0;      // 0 => 2 t_*, doubled until I < 2 m(c)
};

struct WPathReport {
    PathReport path;          // parameterized by t in [0, t_bar]
    double t_star = 0.0;
    double t_bar = 0.0;
    double tau_max_dev = 0.0; // worst |tau - 1| mass correction along the path
    double threshold = 0.0;   // m_bar + Lambda
    double margin = 0.0;      // threshold - sup
};

// N=4 mountain-pass path W_{n,t} = tau [u_bar(tau x) + t U_n(tau x)] with
// tau normalizing the mass back to c.  u_bar is the converged auxiliary
// minimizer, m_bar its J-level, m_c the I-minimum used for the t_bar
// doubling rule.  Norms along the path are evaluated by the exact N=4
// scaling laws; a field-level mass spot check guards the construction
// (MassMismatch on violation).
WPathReport mp_path_W(const FlowResult& u_bar, const ProblemParams& p,
                      double S, double m_c, const WPathConfig& cfg);

struct MpEstimate {
    double level_upper = 0.0;   // min over supplied path sups
    double barrier_lower = 0.0; // sampled inf of the objective on the region boundary
    double barrier_analytic = 0.0; // closed-form boundary bound
    bool   barrier_positive = false;
};

// Bound pair for the mountain-pass level: not a certified level, just the
// best path upper bound against the sampled boundary barrier.
MpEstimate mp_level_estimate(const ProblemParams& p, double S,
                             std::optional<double> Cq,
                             const std::vector<PathReport>& paths,
                             std::shared_ptr<const RadialGrid> grid);

} // namespace kirchnorm
