#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "kirchnorm/radial_field.hpp"

namespace kirchnorm {

// Smooth decaying radial field: a few gaussian bumps with random centers,
// widths and amplitudes.  Deterministic for a given engine state.
RadialField make_random_field(std::shared_ptr<const RadialGrid> grid,
                              std::mt19937_64& rng);

} // namespace kirchnorm
