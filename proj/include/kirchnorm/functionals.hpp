#pragma once

#include <optional>
#include <vector>

#include "kirchnorm/norm_tuple.hpp"
#include "kirchnorm/params.hpp"
#include "kirchnorm/radial_field.hpp"
#include "kirchnorm/scalar_core.hpp"

namespace kirchnorm {

// I(u) = (a/2)|grad u|^2 + (b/4)|grad u|^4 - (mu/q)|u|_q^q - (1/2*)|u|_{2*}^{2*}
double energy_I(const NormTuple& t, const ProblemParams& p);

// Parameters with the Kirchhoff coefficients inflated by 1/(1 - b S^2);
// the auxiliary functional J is I under these.  N=4 with 0 < b < S^-2
// required, otherwise RegimeError.
ProblemParams effective_params_J(const ProblemParams& p, double S);
double energy_J(const NormTuple& t, const ProblemParams& p, double S);

// P(u) = a|grad u|^2 + b|grad u|^4 - mu delta_q |u|_q^q - |u|_{2*}^{2*}
double pohozaev_P(const NormTuple& t, const ProblemParams& p);

// Psi''(0) of the fiber through t:
// 2a G + 4b G^2 - mu q delta_q^2 lq - 2* l2star
double psi_second(const NormTuple& t, const ProblemParams& p);

struct FiberPoint {
    double s;
    double psi;   // I at the scaled tuple
    double psi1;  // dPsi/ds == P at the scaled tuple (identity by construction)
    double psi2;  // d2Psi/ds2
};

// Evaluates the fiber map at s by scaling the tuple exactly and reusing the
// energy/constraint formulas, so psi1 equals pohozaev_P(t.dilated(s)) to the
// last bit.  Throws std::domain_error once any exponent would overflow
// (|s| beyond the exp() range for the stiffest term).
FiberPoint fiber_eval(const NormTuple& t, const ProblemParams& p, double s);

enum class FiberClass { minus, plus, degenerate };
const char* to_string(FiberClass c);

struct FiberRoot {
    double s = 0.0;
    double psi = 0.0;       // level at the root
    double psi2 = 0.0;      // second derivative (classifier)
    FiberClass cls = FiberClass::degenerate;
    double grad_norm = 0.0; // |grad (s*u)|_2 at the root
};

struct FiberReport {
    NormTuple base;
    ScanStatus status = ScanStatus::no_root;
    std::vector<FiberRoot> roots;   // ascending in s
    bool ill_conditioned = false;
};

// All roots of psi1 on the fiber through t, classified by the sign of psi2.
// The degenerate band |psi2| <= 1e-8 * a * grad2(scaled) maps to
// FiberClass::degenerate.
FiberReport fiber_project(const NormTuple& t, const ProblemParams& p);

// Closed-form multiplier mu (1 - delta_q) |u|_q^q / c carried by a
// constrained critical point.
double multiplier_closed_form(const NormTuple& t, const ProblemParams& p);

struct Diagnostics {
    double K = 0.0; // (a/2 + b A^2/4)|grad u|^2 - (1/2*)|u|_{2*}^{2*} - (mu/q)|u|_q^q
    double Q = 0.0; // (a + b A^2)|grad u|^2 - mu delta_q |u|_q^q - |u|_{2*}^{2*}
};

// A2 is the frozen gradient-norm square of the limiting profile; it is a
// free diagnostic input (callers typically pass t.grad2, which turns Q into
// P exactly).
Diagnostics diagnostics_K_Q(const NormTuple& t, const ProblemParams& p, double A2);

// --- Gagliardo-Nirenberg constant -----------------------------------------

struct GnResult {
    double Cq = 0.0;          // best constant (quotient at the maximizer)
    RadialField maximizer;    // mass-normalized extremal profile on the grid
    std::size_t iterations = 0;   // amplitude bisection rounds
    double last_rel_step = 0.0;   // final relative bracket width
};

// Sharp constant of |u|_q <= C |grad u|_2^{delta_q} |u|_2^{1-delta_q}.  The
// quotient is maximized by the positive radial profile solving
// Q'' + (N-1)/r Q' = Q - |Q|^{q-2} Q, whose own integral identities reduce
// the constant to the profile mass: |grad Q|_2^2 = delta_q |Q|_q^q and
// |Q|_2^2 = (1 - delta_q) |Q|_q^q.  The profile is found by amplitude
// shooting (RK4 + bisection), independent of the grid; the grid only hosts
// the returned maximizer samples.  Deterministic.
GnResult gn_constant_compute(std::shared_ptr<const RadialGrid> grid, double q);

// Memoized constant keyed by (N, q); single writer, idempotent fill, safe
// for concurrent readers.
double gn_constant(std::shared_ptr<const RadialGrid> grid, double q);

// The Sobolev constant S with S^{N/2} = |grad U_{1,0}|_2^2 computed by
// quadrature on a dedicated reference grid; memoized per N.
double sobolev_constant(int N);

} // namespace kirchnorm
