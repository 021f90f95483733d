// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_EXTENSION_HPP
#define HYPERCONE_EXTENSION_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "hypercone/error.hpp"
#include "hypercone/gridset.hpp"
#include "hypercone/params.hpp"
#include "hypercone/summation.hpp"

namespace hypercone {

using cplx = std::complex<double>;

/// Plain complex product; skips the NaN/inf recovery of operator*.
inline cplx mul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Samples of the extension of a characteristic function on a truncated
/// lattice. Layout is [x1][x2][x'][t] with t fastest.
struct ExtensionField {
    SpacetimeGrid grid{};
    int subdivision = 1;
    std::uint64_t set_id = 0;
    int n = 0;
    std::vector<cplx> values;

    std::size_t index(int a, int b, int c, int d) const {
        return ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d;
    }
    const cplx& at(int a, int b, int c, int d) const { return values[index(a, b, c, d)]; }
    cplx& at(int a, int b, int c, int d) { return values[index(a, b, c, d)]; }
    const cplx& origin() const {
        const int m = n / 2;
        return at(m, m, m, m);
    }
    std::size_t size() const { return values.size(); }
};

/// Midpoint nodes of the s^3 subdivision of every lattice cell.
struct QuadratureNodes {
    int subdivision = 1;
    std::vector<double> z1, z2, sigma;
    double weight = 0.0;

    QuadratureNodes(const GridSet& g, int s) : subdivision(s) {
        if (s < 1) throw PreconditionError("subdivision must be >= 1");
        auto fill = [s](std::vector<double>& v, int n, double lo, double w) {
            v.resize(static_cast<std::size_t>(n) * s);
            const double sub = w / s;
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = lo + (static_cast<double>(k) + 0.5) * sub;
        };
        fill(z1, g.n1(), -1.0, g.width1());
        fill(z2, g.n2(), -1.0, g.width2());
        fill(sigma, g.n3(), 1.0, g.width3());
        weight = g.cell_volume() / (static_cast<double>(s) * s * s);
    }
};

enum class EvalMethod {
    direct,    ///< plane-wave sum per lattice point; the reference path
    separable  ///< exact factorization of the same sum, one 2-d transform per (sigma, t)
};

namespace detail {

inline void check_grid(const SpacetimeGrid& grid) { grid.validate(); }

inline std::vector<cplx> phase_table(const std::vector<double>& freq, const SpacetimeGrid& grid) {
    const int n = grid.points_per_axis();
    std::vector<cplx> out(static_cast<std::size_t>(n) * freq.size());
    for (int i = 0; i < n; ++i) {
        const double x = grid.coord(i);
        for (std::size_t k = 0; k < freq.size(); ++k) {
            const double ph = x * freq[k];
            out[static_cast<std::size_t>(i) * freq.size() + k] = {std::cos(ph), std::sin(ph)};
        }
    }
    return out;
}

inline ExtensionField empty_field(const GridSet& g, const SpacetimeGrid& grid, int s) {
    ExtensionField f;
    f.grid = grid;
    f.subdivision = s;
    f.set_id = g.fingerprint();
    f.n = grid.points_per_axis();
    f.values.assign(static_cast<std::size_t>(f.n) * f.n * f.n * f.n, cplx{});
    return f;
}

inline ExtensionField evaluate_direct(const GridSet& g, const SpacetimeGrid& grid, int s) {
    ExtensionField f = empty_field(g, grid, s);
    const QuadratureNodes nodes(g, s);
    struct Node {
        double a, b, c, d;
    };
    std::vector<Node> freq;
    g.for_each([&](int i1, int i2, int i3) {
        for (int u = 0; u < s; ++u)
            for (int v = 0; v < s; ++v)
                for (int w = 0; w < s; ++w) {
                    const double z1 = nodes.z1[static_cast<std::size_t>(i1 * s + u)];
                    const double z2 = nodes.z2[static_cast<std::size_t>(i2 * s + v)];
                    const double sg = nodes.sigma[static_cast<std::size_t>(i3 * s + w)];
                    freq.push_back({z1, z2, sg, z1 * z2 / sg});
                }
    });
    const int n = f.n;
    const std::int64_t total = static_cast<std::int64_t>(f.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        std::int64_t r = idx;
        const int d = static_cast<int>(r % n);
        r /= n;
        const int c = static_cast<int>(r % n);
        r /= n;
        const int b = static_cast<int>(r % n);
        const int a = static_cast<int>(r / n);
        const double x1 = grid.coord(a), x2 = grid.coord(b), x3 = grid.coord(c), x4 = grid.coord(d);
        double re = 0.0, im = 0.0;
        for (const auto& nd : freq) {
            const double ph = x1 * nd.a + x2 * nd.b + x3 * nd.c + x4 * nd.d;
            re += std::cos(ph);
            im += std::sin(ph);
        }
        f.values[static_cast<std::size_t>(idx)] = {re * nodes.weight, im * nodes.weight};
    }
    return f;
}

inline ExtensionField evaluate_separable(const GridSet& g, const SpacetimeGrid& grid, int s) {
    ExtensionField f = empty_field(g, grid, s);
    if (g.empty()) return f;
    const QuadratureNodes nodes(g, s);
    const int n = f.n;
    const std::size_t na_all = nodes.z1.size(), nb_all = nodes.z2.size();
    const auto e1 = phase_table(nodes.z1, grid);
    const auto e2 = phase_table(nodes.z2, grid);
    const auto e3 = phase_table(nodes.sigma, grid);
    const std::size_t ns = nodes.sigma.size();

    std::vector<cplx> hc(static_cast<std::size_t>(n) * n * n); // [x1][x2][t]
    for (std::size_t c = 0; c < ns; ++c) {
        const int i3 = static_cast<int>(c) / s;
        // Active sub-rows and sub-columns for this sigma node.
        std::vector<int> rows, cols;
        std::vector<std::uint8_t> colmark(nb_all, 0);
        for (std::size_t a = 0; a < na_all; ++a) {
            const int i1 = static_cast<int>(a) / s;
            bool any = false;
            for (int i2 = 0; i2 < g.n2(); ++i2) {
                if (g.test(i1, i2, i3)) {
                    any = true;
                    for (int v = 0; v < s; ++v) colmark[static_cast<std::size_t>(i2 * s + v)] = 1;
                }
            }
            if (any) rows.push_back(static_cast<int>(a));
        }
        if (rows.empty()) continue;
        for (std::size_t b = 0; b < nb_all; ++b)
            if (colmark[b]) cols.push_back(static_cast<int>(b));
        const std::size_t nr = rows.size(), nc = cols.size();
        std::vector<std::uint8_t> occ(nr * nc, 0);
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t q = 0; q < nc; ++q)
                occ[r * nc + q] = g.test(rows[r] / s, cols[q] / s, i3) ? 1 : 0;
        const double sg = nodes.sigma[c];

#pragma omp parallel for schedule(static)
        for (int t = 0; t < n; ++t) {
            const double xt = grid.coord(t);
            std::vector<double> mre(nr * nc), mim(nr * nc);
            for (std::size_t r = 0; r < nr; ++r) {
                const double z1 = nodes.z1[static_cast<std::size_t>(rows[r])];
                for (std::size_t q = 0; q < nc; ++q) {
                    if (!occ[r * nc + q]) {
                        mre[r * nc + q] = mim[r * nc + q] = 0.0;
                        continue;
                    }
                    const double ph = xt * z1 * nodes.z2[static_cast<std::size_t>(cols[q])] / sg;
                    mre[r * nc + q] = nodes.weight * std::cos(ph);
                    mim[r * nc + q] = nodes.weight * std::sin(ph);
                }
            }
            // Y[r][x2] = sum_q M[r][q] e2[x2][q]
            std::vector<double> yre(nr * n, 0.0), yim(nr * n, 0.0);
            for (std::size_t r = 0; r < nr; ++r) {
                for (int x2 = 0; x2 < n; ++x2) {
                    double sr = 0.0, si = 0.0;
                    const cplx* row = &e2[static_cast<std::size_t>(x2) * nb_all];
                    for (std::size_t q = 0; q < nc; ++q) {
                        const cplx e = row[cols[q]];
                        const double ar = mre[r * nc + q], ai = mim[r * nc + q];
                        sr += ar * e.real() - ai * e.imag();
                        si += ar * e.imag() + ai * e.real();
                    }
                    yre[r * n + static_cast<std::size_t>(x2)] = sr;
                    yim[r * n + static_cast<std::size_t>(x2)] = si;
                }
            }
            // H[x1][x2] = sum_r e1[x1][r] Y[r][x2]
            for (int x1 = 0; x1 < n; ++x1) {
                const cplx* row = &e1[static_cast<std::size_t>(x1) * na_all];
                for (int x2 = 0; x2 < n; ++x2) {
                    double sr = 0.0, si = 0.0;
                    for (std::size_t r = 0; r < nr; ++r) {
                        const cplx e = row[rows[r]];
                        const double br = yre[r * n + static_cast<std::size_t>(x2)];
                        const double bi = yim[r * n + static_cast<std::size_t>(x2)];
                        sr += e.real() * br - e.imag() * bi;
                        si += e.real() * bi + e.imag() * br;
                    }
                    hc[(static_cast<std::size_t>(x1) * n + x2) * n + t] = {sr, si};
                }
            }
        }

        // F[x1][x2][x'][t] += e3[x'][c] H[x1][x2][t]
#pragma omp parallel for schedule(static)
        for (int x1 = 0; x1 < n; ++x1) {
            for (int x2 = 0; x2 < n; ++x2) {
                const cplx* h = &hc[(static_cast<std::size_t>(x1) * n + x2) * n];
                for (int x3 = 0; x3 < n; ++x3) {
                    const cplx e = e3[static_cast<std::size_t>(x3) * ns + c];
                    cplx* out = &f.values[f.index(x1, x2, x3, 0)];
                    for (int t = 0; t < n; ++t) {
                        out[t] = {out[t].real() + e.real() * h[t].real() - e.imag() * h[t].imag(),
                                  out[t].imag() + e.real() * h[t].imag() + e.imag() * h[t].real()};
                    }
                }
            }
        }
    }
    return f;
}

} // namespace detail

/// Midpoint-rule samples of E chi_Omega on the lattice: sum over occupied
/// cells and their s^3 sub-midpoints m of (vol/s^3) e^{i x . xi(m)}, with
/// xi(z1, z2, sigma) = (z1, z2, sigma, z1 z2 / sigma).
inline ExtensionField evaluate_field(const GridSet& g, const SpacetimeGrid& grid = {}, int subdivision = 1,
                                     EvalMethod method = EvalMethod::separable) {
    detail::check_grid(grid);
    if (subdivision < 1) throw PreconditionError("subdivision must be >= 1");
    return method == EvalMethod::direct ? detail::evaluate_direct(g, grid, subdivision)
                                        : detail::evaluate_separable(g, grid, subdivision);
}

/// Direct evaluation at an arbitrary spacetime point (x1, x2, x', t).
inline cplx evaluate_at(const GridSet& g, const std::array<double, 4>& x, int subdivision = 1) {
    const QuadratureNodes nodes(g, subdivision);
    const int s = subdivision;
    double re = 0.0, im = 0.0;
    g.for_each([&](int i1, int i2, int i3) {
        for (int u = 0; u < s; ++u)
            for (int v = 0; v < s; ++v)
                for (int w = 0; w < s; ++w) {
                    const double z1 = nodes.z1[static_cast<std::size_t>(i1 * s + u)];
                    const double z2 = nodes.z2[static_cast<std::size_t>(i2 * s + v)];
                    const double sg = nodes.sigma[static_cast<std::size_t>(i3 * s + w)];
                    const double ph = x[0] * z1 + x[1] * z2 + x[2] * sg + x[3] * z1 * z2 / sg;
                    re += std::cos(ph);
                    im += std::sin(ph);
                }
    });
    return {re * nodes.weight, im * nodes.weight};
}

/// Adds sign * (field of one lattice cell) into f. The single-cell field is a
/// product of four one-dimensional plane waves per sub-midpoint.
inline void accumulate_cell(ExtensionField& f, const GridSet& g, int i1, int i2, int i3, double sign) {
    const QuadratureNodes nodes(g, f.subdivision);
    const int s = f.subdivision, n = f.n;
    std::vector<cplx> w1(static_cast<std::size_t>(n)), w2(w1), w3(w1), w4(w1);
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v)
            for (int w = 0; w < s; ++w) {
                const double z1 = nodes.z1[static_cast<std::size_t>(i1 * s + u)];
                const double z2 = nodes.z2[static_cast<std::size_t>(i2 * s + v)];
                const double sg = nodes.sigma[static_cast<std::size_t>(i3 * s + w)];
                const double z4 = z1 * z2 / sg;
                for (int i = 0; i < n; ++i) {
                    const double x = f.grid.coord(i);
                    w1[static_cast<std::size_t>(i)] = {std::cos(x * z1), std::sin(x * z1)};
                    w2[static_cast<std::size_t>(i)] = {std::cos(x * z2), std::sin(x * z2)};
                    w3[static_cast<std::size_t>(i)] = {std::cos(x * sg), std::sin(x * sg)};
                    w4[static_cast<std::size_t>(i)] = {std::cos(x * z4), std::sin(x * z4)};
                }
                const double scale = sign * nodes.weight;
#pragma omp parallel for schedule(static)
                for (int a = 0; a < n; ++a) {
                    const cplx pa = w1[static_cast<std::size_t>(a)] * scale;
                    for (int b = 0; b < n; ++b) {
                        const cplx e = w2[static_cast<std::size_t>(b)];
                        const cplx pb{pa.real() * e.real() - pa.imag() * e.imag(),
                                      pa.real() * e.imag() + pa.imag() * e.real()};
                        for (int c = 0; c < n; ++c) {
                            const cplx e3 = w3[static_cast<std::size_t>(c)];
                            const cplx pc{pb.real() * e3.real() - pb.imag() * e3.imag(),
                                          pb.real() * e3.imag() + pb.imag() * e3.real()};
                            cplx* out = &f.values[f.index(a, b, c, 0)];
                            for (int d = 0; d < n; ++d) {
                                const cplx e4 = w4[static_cast<std::size_t>(d)];
                                out[d] = {out[d].real() + pc.real() * e4.real() - pc.imag() * e4.imag(),
                                          out[d].imag() + pc.real() * e4.imag() + pc.imag() * e4.real()};
                            }
                        }
                    }
                }
            }
}

/// (sum_x |v(x)|^p h^4)^(1/p) with pairwise summation.
inline double lp_norm(const std::vector<cplx>& values, double p, double cell_volume) {
    if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("p must be finite and positive");
    if (values.empty()) return 0.0;
    const double half = 0.5 * p;
    const double sum = pairwise_sum(values.size(), [&](std::size_t i) {
        const double m2 = std::norm(values[i]);
        return m2 == 0.0 ? 0.0 : std::pow(m2, half);
    });
    return sum == 0.0 ? 0.0 : std::pow(sum * cell_volume, 1.0 / p);
}

inline double lp_norm(const ExtensionField& f, double p) {
    return lp_norm(f.values, p, f.grid.cell_volume());
}

/// Pointwise product of two fields on the same lattice.
inline std::vector<cplx> product(const ExtensionField& a, const ExtensionField& b) {
    if (!(a.grid == b.grid) || a.n != b.n) throw MismatchError("fields live on different lattices");
    std::vector<cplx> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx x = a.values[i], y = b.values[i];
        out[i] = {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
    }
    return out;
}

/// ||E chi_Omega||_{2q} / |Omega|^{1/q'} on the truncated lattice.
inline double quotient(const GridSet& g, const Params& params) {
    params.validate();
    if (g.empty()) throw UndefinedQuotient("empty set");
    const auto f = evaluate_field(g, params.grid, params.subdivision);
    return lp_norm(f, 2.0 * params.q) / std::pow(g.measure(), 1.0 / params.q_prime());
}

/// Same quotient from a precomputed field.
inline double quotient(const ExtensionField& f, double set_measure, double q) {
    if (!(set_measure > 0.0)) throw UndefinedQuotient("empty set");
    return lp_norm(f, 2.0 * q) / std::pow(set_measure, (q - 1.0) / q);
}

/// ||E chi_1 . E chi_2||_q.
inline double bilinear_norm(const ExtensionField& a, const ExtensionField& b, double q) {
    return lp_norm(product(a, b), q, a.grid.cell_volume());
}

inline double bilinear_norm(const GridSet& a, const GridSet& b, double q, const SpacetimeGrid& grid = {},
                            int subdivision = 1) {
    a.require_same(b);
    if (a.empty() || b.empty()) return 0.0;
    return bilinear_norm(evaluate_field(a, grid, subdivision), evaluate_field(b, grid, subdivision), q);
}

} // namespace hypercone

#endif
