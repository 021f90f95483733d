// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_PARAMS_HPP
#define HYPERCONE_PARAMS_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "hypercone/error.hpp"

namespace hypercone {

/// Truncated spacetime lattice [-R, R]^4 with step h, axes (x1, x2, x', t).
struct SpacetimeGrid {
    double half_width = 16.0;
    double step = 1.0;

    int half_count() const { return static_cast<int>(std::floor(half_width / step + 1e-12)); }
    int points_per_axis() const { return 2 * half_count() + 1; }
    double coord(int i) const { return (i - half_count()) * step; }
    double cell_volume() const { return step * step * step * step; }

    /// Frequencies on the surface are bounded by 2 in magnitude, so h <= pi/2
    /// keeps the lattice free of aliasing.
    void validate() const {
        if (!(step > 0.0)) throw AliasingError("step must be positive");
        if (step > std::numbers::pi / 2) {
            throw AliasingError("step " + std::to_string(step) + " exceeds pi/2");
        }
        if (!(half_width >= 0.0)) throw AliasingError("half-width must be non-negative");
    }

    friend bool operator==(const SpacetimeGrid&, const SpacetimeGrid&) = default;
};

/// Exponent q and the admissible constants. A and C0 are derived.
struct Params {
    double q = 1.75;
    double B = 8.0;
    double C = 8.0;
    SpacetimeGrid grid{};
    int subdivision = 1;

    double q_prime() const { return q / (q - 1.0); }
    double A() const { return 1.0 / (1.0 / q - 0.5); }
    double C0() const { return 18.0 * B + 6.0 * A() + 5.0 * C + 7.0; }

    void validate() const {
        if (!(q > 1.5 && q < 2.0)) {
            throw PreconditionError("q must lie in (3/2, 2), got " + std::to_string(q));
        }
        if (!(B > 0.0) || !(C > 0.0)) throw PreconditionError("B and C must be positive");
        if (subdivision < 1) throw PreconditionError("subdivision must be >= 1");
        grid.validate();
    }
};

} // namespace hypercone

#endif
