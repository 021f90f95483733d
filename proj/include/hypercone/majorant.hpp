// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_MAJORANT_HPP
#define HYPERCONE_MAJORANT_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hypercone/error.hpp"
#include "hypercone/gridset.hpp"
#include "hypercone/params.hpp"

namespace hypercone {

enum class CapProfile { measured, fubini };

inline std::string to_string(CapProfile c) { return c == CapProfile::measured ? "measured" : "fubini"; }

struct MajorantTerm {
    int j = 0;
    int k = 0;
    double cap = 0.0;
    double term = 0.0;
};

struct MajorantReport {
    double total = 0.0;
    double tail = 0.0;
    int truncation = 0; // last explicit scale
    CapProfile profile = CapProfile::measured;
    std::vector<MajorantTerm> terms;
};

/// Continuum measure of g inside clipped axis-aligned zeta rectangles. Uses a
/// prefix sum of the per-column volume; partial cells contribute their
/// area fraction, so the result is exact for the union of cells.
class OverlapIndex {
public:
    explicit OverlapIndex(const GridSet& g)
        : n1_(g.n1()), n2_(g.n2()), w1_(g.width1()), w2_(g.width2()),
          prefix_(static_cast<std::size_t>(n1_ + 1) * (n2_ + 1), 0.0) {
        std::vector<double> col(static_cast<std::size_t>(n1_) * n2_, 0.0);
        g.for_each([&](int i1, int i2, int) { col[static_cast<std::size_t>(i1) * n2_ + i2] += g.cell_volume(); });
        for (int a = 0; a < n1_; ++a)
            for (int b = 0; b < n2_; ++b)
                at(a + 1, b + 1) = col[static_cast<std::size_t>(a) * n2_ + b] + at(a, b + 1) + at(a + 1, b) - at(a, b);
    }

    /// Measure of g over [x0,x1) x [y0,y1) x [1,2).
    double measure(double x0, double x1, double y0, double y1) const {
        x0 = std::clamp(x0, -1.0, 1.0);
        x1 = std::clamp(x1, -1.0, 1.0);
        y0 = std::clamp(y0, -1.0, 1.0);
        y1 = std::clamp(y1, -1.0, 1.0);
        if (x1 <= x0 || y1 <= y0) return 0.0;
        return phi(x1, y1) - phi(x0, y1) - phi(x1, y0) + phi(x0, y0);
    }

    /// |g cap factor*tau~| with the dilate clipped to the domain.
    double dilated_tile(const Tile& t, double factor) const {
        const double cx = 0.5 * (t.x.lo() + t.x.hi()), hx = 0.5 * t.x.length() * factor;
        const double cy = 0.5 * (t.y.lo() + t.y.hi()), hy = 0.5 * t.y.length() * factor;
        return measure(cx - hx, cx + hx, cy - hy, cy + hy);
    }

private:
    double& at(int a, int b) { return prefix_[static_cast<std::size_t>(a) * (n2_ + 1) + b]; }
    double at(int a, int b) const { return prefix_[static_cast<std::size_t>(a) * (n2_ + 1) + b]; }

    // Bilinear interpolation of the prefix table at fractional cell coordinates.
    double phi(double x, double y) const {
        const double u = (x + 1.0) / w1_, v = (y + 1.0) / w2_;
        const int a = std::min(static_cast<int>(std::floor(u)), n1_ - 1);
        const int b = std::min(static_cast<int>(std::floor(v)), n2_ - 1);
        const double fu = u - a, fv = v - b;
        return (1 - fu) * (1 - fv) * at(a, b) + fu * (1 - fv) * at(a + 1, b) + (1 - fu) * fv * at(a, b + 1) +
               fu * fv * at(a + 1, b + 1);
    }

    int n1_, n2_;
    double w1_, w2_;
    std::vector<double> prefix_;
};

/// max over tau in T_{j,k} inside [-1,1)^2 of |g cap 10 tau~|.
inline double measured_cap(const OverlapIndex& idx, int j, int k, double factor = 10.0) {
    const Domain1d d = Domain1d::symmetric();
    const auto [xb, xe] = d.index_range(j);
    const auto [yb, ye] = d.index_range(k);
    double best = 0.0;
    for (auto a = xb; a < xe; ++a)
        for (auto b = yb; b < ye; ++b) best = std::max(best, idx.dilated_tile(Tile{{j, a}, {k, b}}, factor));
    return best;
}

/// min{2^-J, 2^-j} min{2^-K, 2^-k}.
inline double fubini_cap(int J, int K, int j, int k) {
    return std::ldexp(1.0, -std::max(J, j)) * std::ldexp(1.0, -std::max(K, k));
}

/// Ratio 2^-(2 - 3/q) of consecutive terms once caps follow 2^-j-k.
inline double tail_ratio(double q) { return std::exp2(-(2.0 - 3.0 / q)); }

inline double whitney_term(double q, int j, int k, double cap, double set_measure) {
    if (cap <= 0.0) return 0.0;
    return std::exp2(-(j + k) * (1.0 - 2.0 / q)) * std::pow(cap, 1.0 - 1.0 / q) * std::pow(set_measure, 1.0 / q);
}

namespace detail {

inline void check_q(double q) {
    if (!(q > 1.5 && q < 2.0)) throw PreconditionError("q must lie in (3/2, 2), got " + std::to_string(q));
}

/// Sums term(j,k) over 0 <= j,k <= T and closes with geometric tails in each
/// direction.
template <class Term>
MajorantReport truncated_sum(double q, int T, const Term& term) {
    MajorantReport rep;
    rep.truncation = T;
    std::vector<double> row(static_cast<std::size_t>(T + 1) * (T + 1));
    for (int j = 0; j <= T; ++j)
        for (int k = 0; k <= T; ++k) {
            const auto [cap, value] = term(j, k);
            rep.terms.push_back({j, k, cap, value});
            row[static_cast<std::size_t>(j) * (T + 1) + k] = value;
        }
    double edge_j = 0.0, edge_k = 0.0;
    for (int i = 0; i <= T; ++i) {
        edge_j += row[static_cast<std::size_t>(T) * (T + 1) + i];
        edge_k += row[static_cast<std::size_t>(i) * (T + 1) + T];
    }
    const double r = tail_ratio(q), g = r / (1.0 - r);
    rep.tail = g * (edge_j + edge_k) + row.back() * g * g;
    double explicit_sum = 0.0;
    for (double v : row) explicit_sum += v;
    rep.total = explicit_sum + rep.tail;
    return rep;
}

} // namespace detail

/// Whitney-sum majorant of ||E chi_Omega'||_{2q}^2 over subsets Omega' of g:
/// sum_{j,k} 2^-(j+k)(1-2/q) cap(j,k)^(1-1/q) |g|^(1/q).
inline MajorantReport whitney_majorant(const GridSet& g, const Params& params,
                                       CapProfile profile = CapProfile::measured) {
    detail::check_q(params.q);
    const auto& res = g.resolution();
    const int lmax = std::max({res.l1, res.l2, res.l3});
    if (g.empty()) {
        MajorantReport rep;
        rep.profile = profile;
        rep.truncation = lmax + 4;
        return rep;
    }
    const double mu = g.measure();
    MajorantReport rep;
    if (profile == CapProfile::measured) {
        const OverlapIndex idx(g);
        rep = detail::truncated_sum(params.q, lmax + 4, [&](int j, int k) {
            const double cap = measured_cap(idx, j, k);
            return std::pair{cap, whitney_term(params.q, j, k, cap, mu)};
        });
    } else {
        const int J = projection_bucket(g, Axis::zeta1);
        const int K = stratify_constant_fiber(g, Axis::zeta1).front().K;
        const int T = std::max({lmax, J, K}) + 4;
        rep = detail::truncated_sum(params.q, T, [&](int j, int k) {
            const double cap = fubini_cap(J, K, j, k);
            return std::pair{cap, whitney_term(params.q, j, k, cap, mu)};
        });
    }
    rep.profile = profile;
    return rep;
}

struct ClosedFormBound {
    double total = 0.0;
    /// (i) j<=J,k<=K  (ii) j>J,k<=K  (iii) j<=J,k>K  (iv) j>J,k>K
    double region[4] = {0, 0, 0, 0};
};

/// Four geometric sums of the Whitney majorant with the Fubini cap and
/// |Omega| = 2^-J-K. The sum factorizes per axis.
inline ClosedFormBound closed_form_bound(int J, int K, double q) {
    detail::check_q(q);
    if (J < -1 || K < -1) throw InvalidScale("J and K must be >= -1");
    const double a = std::exp2(2.0 / q - 1.0), r = tail_ratio(q);
    auto low = [&](int n) { // sum_{j=0}^{n} 2^-j(1-2/q) 2^-n(1-1/q)
        if (n < 0) return 0.0;
        return std::exp2(-n * (1.0 - 1.0 / q)) * (std::pow(a, n + 1) - 1.0) / (a - 1.0);
    };
    auto high = [&](int n) { return std::pow(r, n + 1) / (1.0 - r); }; // sum_{j>n} r^j
    const double pre = std::exp2(-(J + K) / q);
    ClosedFormBound out;
    out.region[0] = pre * low(J) * low(K);
    out.region[1] = pre * high(J) * low(K);
    out.region[2] = pre * low(J) * high(K);
    out.region[3] = pre * high(J) * high(K);
    out.total = out.region[0] + out.region[1] + out.region[2] + out.region[3];
    return out;
}

inline double closed_form_bound(int J, int K, const Params& p) { return closed_form_bound(J, K, p.q).total; }

struct RegionedBound {
    double total = 0.0;
    double offset = 0.0; // C log2(1/rho)
    /// contribution of the (j,k) assigned to each region by its smallest cap
    double region[4] = {0, 0, 0, 0};
    double tail = 0.0;
};

/// Region membership for the four-region bound.
struct RegionTest {
    int J, K;
    double D;
    bool r1(int j, int k) const { return (j <= J - D && k <= K) || (j <= J && k <= K - D); }
    bool r2(int j, int k) const { return (j >= J + D && k <= K) || (j >= J && k <= K - D); }
    bool r3(int j, int k) const { return (j >= J + D && k >= K) || (j >= J && k >= K + D); }
    bool r4(int j, int k) const { return j <= J + D && k >= K - D; }
    bool any(int j, int k) const { return r1(j, k) || r2(j, k) || r3(j, k) || r4(j, k); }
};

/// Whitney sum with |Omega| = 2^-J-K and, at each (j,k), the smallest cap
/// among the regions containing it:
/// R1 2^-J-K, R2 2^-j-K, R3 2^-j-k, R4 rho^2C 2^-J-k.
inline RegionedBound regioned_bound(int J, int K, double rho, double q, double C) {
    detail::check_q(q);
    int e = 0;
    if (!(rho > 0.0 && rho <= 1.0) || std::frexp(rho, &e) != 0.5)
        throw PreconditionError("rho must be a dyadic number in (0, 1]");
    if (J < -1 || K < -1) throw InvalidScale("J and K must be >= -1");
    const double D = C * std::log2(1.0 / rho);
    const RegionTest rt{J, K, D};
    const double mu = std::exp2(-(J + K));
    const double rho2c = std::pow(rho, 2.0 * C);
    RegionedBound out;
    out.offset = D;
    const int T = std::max(J, K) + static_cast<int>(std::ceil(D)) + 2;
    std::vector<double> grid(static_cast<std::size_t>(T + 1) * (T + 1), 0.0);
    for (int j = 0; j <= T; ++j)
        for (int k = 0; k <= T; ++k) {
            double best = INFINITY;
            int which = -1;
            const double caps[4] = {std::exp2(-(J + K)), std::exp2(-(j + K)), std::exp2(-(j + k)),
                                    rho2c * std::exp2(-(J + k))};
            const bool in[4] = {rt.r1(j, k), rt.r2(j, k), rt.r3(j, k), rt.r4(j, k)};
            for (int i = 0; i < 4; ++i)
                if (in[i] && caps[i] < best) {
                    best = caps[i];
                    which = i;
                }
            if (which < 0) throw PreconditionError("region cover failed");
            const double t = whitney_term(q, j, k, best, mu);
            grid[static_cast<std::size_t>(j) * (T + 1) + k] = t;
            out.region[which] += t;
        }
    // Beyond T every point lies in R3 (cap 2^-j-k), so the tail is geometric.
    double edge_j = 0.0, edge_k = 0.0;
    for (int i = 0; i <= T; ++i) {
        edge_j += grid[static_cast<std::size_t>(T) * (T + 1) + i];
        edge_k += grid[static_cast<std::size_t>(i) * (T + 1) + T];
    }
    const double r = tail_ratio(q), g = r / (1.0 - r);
    out.tail = g * (edge_j + edge_k) + grid.back() * g * g;
    out.total = out.region[0] + out.region[1] + out.region[2] + out.region[3] + out.tail;
    return out;
}

inline RegionedBound regioned_bound(int J, int K, double rho, const Params& p) {
    return regioned_bound(J, K, rho, p.q, p.C);
}

} // namespace hypercone

#endif
