#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kirchnorm/norm_tuple.hpp"
#include "kirchnorm/radial_grid.hpp"

namespace kirchnorm {

// Radial function sampled at the grid nodes.
struct RadialField {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> values;

    RadialField() = default;
    explicit RadialField(std::shared_ptr<const RadialGrid> g)
        : grid(std::move(g)), values(grid->size(), 0.0) {}
};

// Aubin-Talenti bubble U_eps(r) = (sqrt(N(N-2)eps)/(eps+r^2))^{(N-2)/2}.
RadialField make_bubble(std::shared_ptr<const RadialGrid> grid, double eps);

// Compactly supported bubble profile used by the N=4 path construction:
// 2*sqrt(2) * { n/(1+n^2 r^2) on [0,1),
//               n/(1+n^2) * (2-r) on [1,2), 0 beyond }.
// It is U_{1/n^2} truncated by a linear ramp, so its gradient and L4 norms
// approach the extremal values while its mass vanishes like log(n)/n^2.
// Throws RegimeError unless the grid dimension is 4 and r_max >= 2.
RadialField make_truncated_bubble(std::shared_ptr<const RadialGrid> grid, int n);

// Gaussian bump A exp(-r^2/(2 sigma^2)).
RadialField make_gaussian(std::shared_ptr<const RadialGrid> grid, double sigma,
                          double amplitude);

// Quadrature reduction of the field.  q <= 0 skips the lq slot.
NormTuple norm_tuple(const RadialField& u, double q);

// u -> e^{Ns/2} u(e^s r) by monotone cubic resampling; values beyond r_max
// are taken as zero.  Throws SupportOverflow when the resampled mass
// deviates from the original by more than mass_tol (relative): the tail
// pushed off the grid was not negligible.  s = 0 returns a bitwise copy.
RadialField dilate(const RadialField& u, double s, double mass_tol = 1e-6);

// Rescales values so the quadrature mass equals c exactly.
RadialField project_mass(const RadialField& u, double c);

// Pointwise radial Laplacian of the field (see RadialGrid::laplacian).
RadialField laplacian_apply(const RadialField& u);

// Width parameter eps with |U_eps|_2^2 = c on this grid, via the exact
// scaling |U_eps|_2^2 = eps * |U_1|_2^2.  N >= 5 only (the N=4 bubble mass
// diverges); throws RegimeError otherwise.
double eps_for_mass(const RadialGrid& grid, double c);

// --- snapshots ------------------------------------------------------------
//
// Round-trips are bit-exact: values are written with enough digits to
// reproduce every double exactly on import.

void write_csv(const RadialField& u, std::ostream& os);
std::vector<std::pair<double, double>> read_csv(std::istream& is);

void write_json(const RadialField& u, std::ostream& os);
// Reads a snapshot written by write_json; the grid is rebuilt from the
// embedded spec and must reproduce the stored signature.
RadialField read_json(std::istream& is);

} // namespace kirchnorm
