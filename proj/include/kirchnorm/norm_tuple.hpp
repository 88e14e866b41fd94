#pragma once

#include <cmath>

namespace kirchnorm {

// The four integral quantities every functional in this toolkit consumes.
// Fields are reduced to a NormTuple once; all energy/constraint arithmetic
// downstream is exact closed-form work on the tuple.
struct NormTuple {
    double grad2  = 0.0; // |grad u|_2^2
    double mass2  = 0.0; // |u|_2^2
    double lq     = 0.0; // |u|_q^q      (0 when q was not requested)
    double l2star = 0.0; // |u|_{2*}^{2*}
    double q      = 0.0; // exponent the lq slot was computed with

    // Exact scaling of the tuple under u -> e^{Ns/2} u(e^s x).
    // Mass is invariant; the other entries pick up pure exponential factors.
    NormTuple dilated(double s, int N) const {
        const double two_star = 2.0 * N / (N - 2.0);
        NormTuple t = *this;
        t.grad2  = std::exp(2.0 * s) * grad2;
        t.l2star = std::exp(two_star * s) * l2star;
        if (q > 0.0) {
            const double qdelta = N * (q - 2.0) / 2.0; // q * delta_q
            t.lq = std::exp(qdelta * s) * lq;
        }
        return t;
    }
};

} // namespace kirchnorm
