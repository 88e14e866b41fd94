#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kirchnorm {

// Symmetric positive definite banded matrix, lower-triangle storage:
// entry(d, i) holds A(i+d, i) for d = 0..kl.  Used for the shifted
// stiffness systems of the constrained flow; bandwidth stays <= 4.
class BandedSPD {
public:
    BandedSPD(std::size_t n, std::size_t kl);

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return kl_; }

    double& entry(std::size_t d, std::size_t i) { return data_[d * n_ + i]; }
    double  entry(std::size_t d, std::size_t i) const { return data_[d * n_ + i]; }

    // Adds v to A(row, col) (and its mirror), row >= col, row-col <= kl.
    void add(std::size_t row, std::size_t col, double v);

    // y = A x (symmetric banded product).
    void multiply(std::span<const double> x, std::span<double> y) const;

    // In-place Cholesky A = L L^T.  Returns false if a pivot is not
    // strictly positive (matrix not SPD to rounding).
    bool factor();

    // Solves A x = rhs using the factor; rhs is overwritten with x.
    void solve(std::span<double> rhs) const;

private:
    std::size_t n_;
    std::size_t kl_;
    std::vector<double> data_;
    bool factored_ = false;
};

} // namespace kirchnorm
