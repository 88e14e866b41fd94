#pragma once

#include <cmath>
#include <string>

#include "kirchnorm/errors.hpp"

namespace kirchnorm {

// Parameter tuple of the mass-constrained problem
//
//   -(a + b |grad u|_2^2) Lap u + lambda u = mu |u|^{q-2} u + |u|^{2s-2} u,
//   |u|_2^2 = c,  x in R^N,
//
// where 2s = 2N/(N-2) is the critical exponent.  `b` may be negative
// (degenerate Kirchhoff coupling); `mu` may take either sign; `q` is the
// subcritical exponent of the perturbation and is only meaningful when
// mu != 0.
struct ProblemParams {
    int    N  = 5;
    double a  = 1.0;
    double b  = 0.0;
    double mu = 0.0;
    double q  = 2.5;
    double c  = 1.0;

    double two_star() const { return 2.0 * N / (N - 2.0); }
    double delta_q()  const { return N * (q - 2.0) / (2.0 * q); }

    // L^q exponent of the Gagliardo-Nirenberg mass factor, q(1-delta_q)/2.
    double mass_exponent() const { return q * (1.0 - delta_q()) / 2.0; }

    // Scale-free perturbation strength mu * c^{q(1-delta_q)/2}.
    double mu_tilde() const { return mu * std::pow(c, mass_exponent()); }

    // Throws RegimeError naming the violated bound.  q is only checked
    // when mu != 0 (the pure critical problem never evaluates it).
    void validate() const;

    std::string describe() const;
};

} // namespace kirchnorm
