#include "kirchnorm/random_fields.hpp"

#include <cmath>

namespace kirchnorm {

RadialField make_random_field(std::shared_ptr<const RadialGrid> grid,
                              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int bumps = 3 + int(rng() % 4);
    RadialField u(std::move(grid));
    const auto& r = u.grid->nodes();
    for (int b = 0; b < bumps; ++b) {
        const double center = 8.0 * U(rng);
        const double sigma = 0.25 + 2.25 * U(rng);
        double amp = 0.2 + 0.8 * U(rng);
        if (U(rng) < 0.3) amp = -amp;
        const double inv = 1.0 / (2.0 * sigma * sigma);
        // Mirror the bump across the origin so the radial profile is even
        // (flat at r = 0, as any smooth radial function must be).
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double dm = r[i] - center, dp = r[i] + center;
            u.values[i] +=
                amp * (std::exp(-dm * dm * inv) + std::exp(-dp * dp * inv));
        }
    }
    return u;
}

} // namespace kirchnorm
