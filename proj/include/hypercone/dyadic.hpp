// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_DYADIC_HPP
#define HYPERCONE_DYADIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hypercone/error.hpp"

namespace hypercone {

/// Half-open dyadic interval [index * 2^-scale, (index + 1) * 2^-scale).
struct DyadicInterval {
    int scale = 0;
    std::int64_t index = 0;

    double length() const { return std::ldexp(1.0, -scale); }
    double lo() const { return std::ldexp(static_cast<double>(index), -scale); }
    double hi() const { return std::ldexp(static_cast<double>(index + 1), -scale); }

    // Arithmetic shift: floor division for negative indices as well.
    DyadicInterval parent() const { return {scale - 1, index >> 1}; }

    DyadicInterval ancestor(int coarser_scale) const {
        if (coarser_scale > scale) {
            throw InvalidScale("ancestor scale " + std::to_string(coarser_scale) +
                               " is finer than " + std::to_string(scale));
        }
        return {coarser_scale, index >> (scale - coarser_scale)};
    }

    bool contains(double x) const { return lo() <= x && x < hi(); }

    bool contains(const DyadicInterval& other) const {
        return other.scale >= scale && other.ancestor(scale) == *this;
    }

    friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
    friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

/// Distinct intervals whose closures intersect.
inline bool adjacent(const DyadicInterval& a, const DyadicInterval& b) {
    if (a == b) return false;
    return a.lo() <= b.hi() && b.lo() <= a.hi();
}

/// Distance between the closures (0 when they touch or overlap).
inline double separation(const DyadicInterval& a, const DyadicInterval& b) {
    return std::max({0.0, b.lo() - a.hi(), a.lo() - b.hi()});
}

/// Product of two dyadic intervals; a member of T_{j,k} with j = x.scale, k = y.scale.
struct Tile {
    DyadicInterval x;
    DyadicInterval y;

    int j() const { return x.scale; }
    int k() const { return y.scale; }
    double area() const { return x.length() * y.length(); }
    /// Volume of the extrusion tile x [1,2).
    double box_volume() const { return area(); }

    friend bool operator==(const Tile&, const Tile&) = default;
    friend auto operator<=>(const Tile&, const Tile&) = default;
};

/// A run of `count` consecutive dyadic intervals of one scale. [0,1) is one
/// scale-0 interval; the coordinate range [-1,1) is the two scale-0 intervals
/// starting at index -1. Longer runs would break exact-once Whitney coverage.
struct Domain1d {
    int scale = 0;
    std::int64_t first = 0;
    int count = 1;

    static Domain1d unit() { return {0, 0, 1}; }
    static Domain1d symmetric() { return {0, -1, 2}; }
    static Domain1d of(const DyadicInterval& i) { return {i.scale, i.index, 1}; }

    double lo() const { return std::ldexp(static_cast<double>(first), -scale); }
    double hi() const { return std::ldexp(static_cast<double>(first + count), -scale); }
    double length() const { return hi() - lo(); }

    /// Index range [begin, end) of the scale-j intervals inside the domain.
    std::pair<std::int64_t, std::int64_t> index_range(int j) const {
        if (j < scale) {
            throw InvalidScale("scale " + std::to_string(j) + " is coarser than the domain scale " +
                               std::to_string(scale));
        }
        const int shift = j - scale;
        return {first * (std::int64_t{1} << shift), (first + count) * (std::int64_t{1} << shift)};
    }

    bool contains(const DyadicInterval& i) const {
        if (i.scale < scale) return false;
        const auto top = i.ancestor(scale).index;
        return top >= first && top < first + count;
    }

    bool contains(double x) const { return lo() <= x && x < hi(); }

    /// The top-level interval of the domain that contains x.
    DyadicInterval top_interval(double x) const {
        const auto n = static_cast<std::int64_t>(std::floor(std::ldexp(x, scale)));
        return {scale, std::clamp(n, first, first + count - 1)};
    }

    void validate() const {
        if (count < 1 || count > 2) {
            throw InvalidScale("domain must consist of one or two top-level intervals");
        }
    }

    friend bool operator==(const Domain1d&, const Domain1d&) = default;
};

struct Domain2d {
    Domain1d x = Domain1d::symmetric();
    Domain1d y = Domain1d::symmetric();
};

using IntervalPair = std::pair<DyadicInterval, DyadicInterval>;

/// Ordered pairs (I, I') of scale-j intervals in `domain` that are not adjacent
/// but have distinct adjacent parents. Sorted by (I, I').
inline std::vector<IntervalPair> whitney_pairs_1d(int j, const Domain1d& domain) {
    domain.validate();
    const auto [begin, end] = domain.index_range(j);
    std::vector<IntervalPair> out;
    if (j == domain.scale) return out; // parents would leave the domain
    for (std::int64_t n = begin; n < end; ++n) {
        const DyadicInterval self{j, n};
        const std::int64_t p = n >> 1;
        for (std::int64_t partner_parent : {p - 1, p + 1}) {
            for (std::int64_t child : {2 * partner_parent, 2 * partner_parent + 1}) {
                if (child < begin || child >= end) continue;
                const DyadicInterval other{j, child};
                if (adjacent(self, other)) continue;
                out.emplace_back(self, other);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Same-scale tile pair tau ~ kappa.
struct WhitneyPair {
    Tile tau;
    Tile kappa;

    int j() const { return tau.j(); }
    int k() const { return tau.k(); }
};

/// Cartesian product of the one-dimensional Whitney relations on each axis.
inline std::vector<WhitneyPair> whitney_tiles(int j, int k, const Domain2d& domain = {}) {
    const auto xs = whitney_pairs_1d(j, domain.x);
    const auto ys = whitney_pairs_1d(k, domain.y);
    std::vector<WhitneyPair> out;
    out.reserve(xs.size() * ys.size());
    for (const auto& [x0, x1] : xs) {
        for (const auto& [y0, y1] : ys) {
            out.push_back({Tile{x0, y0}, Tile{x1, y1}});
        }
    }
    return out;
}

struct WhitneyCoverReport {
    int resolution = 0;
    bool exact_once = false;
    /// multiplicity -> number of ordered off-diagonal cell pairs with it
    std::map<int, std::int64_t> histogram;
    /// cell pairs sharing a coordinate midpoint that were covered anyway
    std::int64_t diagonal_hits = 0;
    std::int64_t off_diagonal_pairs = 0;
};

/// Brute-force check that the Whitney pairs over [-1,1)^2 cover every ordered
/// pair of level-L cell midpoints that differ in both coordinates exactly once.
inline WhitneyCoverReport whitney_cover_check(int L) {
    if (L < 0 || L > 5) throw InvalidScale("whitney_cover_check supports 0 <= L <= 5");
    const Domain2d domain{};
    const std::int64_t side = std::int64_t{1} << (L + 1);
    const std::int64_t offset = std::int64_t{1} << L; // cell index -2^L maps to 0
    const std::int64_t cells = side * side;
    std::vector<std::uint8_t> mult(static_cast<std::size_t>(cells * cells), 0);

    // Cells (as 0-based column indices) whose midpoint lies in I.
    auto cells_in = [&](const DyadicInterval& i) {
        // Midpoint of cell c (signed index) is (2c+1) * 2^-(L+1).
        const int fine = L + 1;
        const std::int64_t span = std::int64_t{1} << (fine - i.scale);
        const std::int64_t m_lo = i.index * span;
        const std::int64_t m_hi = m_lo + span; // exclusive, in level-(L+1) units
        std::vector<std::int64_t> out;
        for (std::int64_t m = m_lo; m < m_hi; ++m) {
            if ((m & 1) == 0) continue;
            out.push_back(((m - 1) >> 1) + offset);
        }
        return out;
    };

    for (int j = 0; j <= L + 1; ++j) {
        for (int k = 0; k <= L + 1; ++k) {
            for (const auto& pair : whitney_tiles(j, k, domain)) {
                const auto ax = cells_in(pair.tau.x);
                const auto ay = cells_in(pair.tau.y);
                const auto bx = cells_in(pair.kappa.x);
                const auto by = cells_in(pair.kappa.y);
                for (auto cx : ax) {
                    for (auto cy : ay) {
                        const std::int64_t a = cx * side + cy;
                        for (auto dx : bx) {
                            for (auto dy : by) {
                                auto& m = mult[static_cast<std::size_t>(a * cells + dx * side + dy)];
                                if (m < 255) ++m;
                            }
                        }
                    }
                }
            }
        }
    }

    WhitneyCoverReport report;
    report.resolution = L;
    bool ok = true;
    for (std::int64_t a = 0; a < cells; ++a) {
        const auto ax = a / side, ay = a % side;
        for (std::int64_t b = 0; b < cells; ++b) {
            const auto bx = b / side, by = b % side;
            const int m = mult[static_cast<std::size_t>(a * cells + b)];
            if (ax != bx && ay != by) {
                ++report.histogram[m];
                ++report.off_diagonal_pairs;
                if (m != 1) ok = false;
            } else if (m != 0) {
                ++report.diagonal_hits;
                ok = false;
            }
        }
    }
    report.exact_once = ok;
    return report;
}

} // namespace hypercone

#endif
