#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kirchnorm/banded.hpp"

namespace kirchnorm {

struct GridSpec {
    int         N        = 5;
    std::size_t cells    = 8192;  // number of cells M (made even); M+1 nodes
    double      r_max    = 0.0;   // 0 => tail policy decides
    double      h0       = 0.0;   // first cell width; 0 => min(1,sqrt(eps))/512
    double      eps_hint = 1.0;   // width scale the grid core must resolve
    double      q_hint   = 0.0;   // subcritical exponent for the tail policy
    double      tail_rel = 1e-8;  // tail policy target (relative to core)
};

// Outermost radius at which the closed-form power-law tails of the standard
// bubble of width eps drop below `target` relative to each norm it feeds.
// The N=4 mass norm is divergent and is exempted from the policy.
double tail_policy_r_max(int N, double eps, double q_hint, double target);

// Graded radial grid on [0, r_max]: geometrically stretched nodes, dense at
// the origin, with quadrature weights built per node pair so that
// polynomials of degree <= 2 integrate exactly against r^{N-1} (ball
// measure, sphere surface factor included).  Interior pair nodes are nudged
// into the window that keeps every weight strictly positive.
class RadialGrid {
public:
    explicit RadialGrid(const GridSpec& spec);

    int dim() const { return N_; }
    double r_max() const { return nodes_.back(); }
    std::size_t size() const { return nodes_.size(); } // M+1
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::string& signature() const { return signature_; }
    const GridSpec& spec() const { return spec_; }

    // sum_i w_i f_i
    double integrate(std::span<const double> f) const;

    // 3-point nonuniform derivative samples, centered at interior nodes;
    // du[0] = 0 (radial symmetry), one-sided at r_max.  Pointwise
    // diagnostics only -- the Dirichlet energy goes through dirichlet().
    void derivative(std::span<const double> u, std::span<double> du) const;

    // Pointwise second-order radial Laplacian u'' + (N-1) u'/r with the
    // even-extension stencil at the origin and Dirichlet value at r_max.
    void laplacian(std::span<const double> u, std::span<double> lap) const;

    // <u, K v> where K is the stiffness matrix of the piecewise-quadratic
    // interpolant: K_ij = int l_i' l_j' r^{N-1} (surface factor included),
    // integrated exactly per pair block.  dirichlet(u, u) is the discrete
    // |grad u|_2^2.  Unlike any pointwise-sampled derivative rule, this
    // form prices mesh-frequency oscillation at its true Dirichlet cost,
    // so energy descent cannot hide gradient mass in a sawtooth the
    // sampling happens to miss.  Kernel: exactly the constants.
    double dirichlet(std::span<const double> u, std::span<const double> v) const;

    // y = W^{-1} K u: the W-metric gradient of (1/2) dirichlet(u, u), so
    // <y, u>_w == dirichlet(u, u) holds to roundoff.  The flow solver
    // differentiates the discrete energy through this operator.
    void stiffness_apply(std::span<const double> u, std::span<double> y) const;

    // A = W + tau K (SPD for tau >= 0, bandwidth 2); preconditioner backbone.
    BandedSPD shifted_stiffness(double tau) const;

    // Exact moments int_0^{r_max} r^{N-1+k} dr (surface factor included),
    // k = 0,1,2; used by the quadrature exactness tests.
    double moment(int k) const;

private:
    void build_nodes();
    void build_weights();
    void build_derivative();
    void build_stiffness();

    GridSpec spec_;
    int N_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    // derivative stencil: row i uses columns col_[i] .. col_[i]+2
    std::vector<std::size_t> dcol_;
    std::vector<std::array<double, 3>> dcoef_;
    // Per-pair-block Dirichlet data.  The block quadratic's derivative at
    // its middle node is alpha = sum pa[i] u_i and its half-curvature is
    // B = sum qc[i] u_i, so the exact block energy is
    //   alpha^2 T0 + 4 alpha B T1 + 4 B^2 T2,
    // with Tk the centered moments int t^k (x1+t)^{N-1} dt over the block
    // (surface factor folded in).  Everything is built from node
    // differences, so no term carries the u- or r-scale cancellation that
    // an assembled stiffness matrix would reintroduce at application time.
    struct BlockForm {
        std::array<double, 3> pa, qc;
        std::array<double, 3> T;
    };
    std::vector<BlockForm> kblocks_;
    std::string signature_;
};

std::shared_ptr<const RadialGrid> make_grid(const GridSpec& spec);

} // namespace kirchnorm
