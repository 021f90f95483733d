// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "hypercone/extension.hpp"

using namespace hypercone;
using Catch::Matchers::WithinRel;

namespace {

SpacetimeGrid small_grid() { return {4.0, 1.0}; }

double max_abs_diff(const ExtensionField& a, const ExtensionField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace

TEST_CASE("spacetime grid geometry") {
    const SpacetimeGrid g{};
    CHECK(g.points_per_axis() == 33);
    CHECK(g.coord(16) == 0.0);
    CHECK(g.coord(0) == -16.0);
    CHECK(SpacetimeGrid{2.5, 0.5}.points_per_axis() == 11);
    CHECK_THROWS_AS(evaluate_field(GridSet(Resolution{1, 1, 1}), SpacetimeGrid{4.0, 1.6}), AliasingError);
    CHECK_NOTHROW(SpacetimeGrid{4.0, std::numbers::pi / 2}.validate());
}

TEST_CASE("field at the origin is the measure") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = make_grid_set(RandomCells{0.1 + 0.15 * static_cast<double>(seed), seed}, Resolution{4, 4, 3});
        const auto f = evaluate_field(g);
        CHECK(std::abs(f.origin() - cplx(g.measure(), 0.0)) <= 1e-12 * g.measure());
    }
    const auto empty = evaluate_field(GridSet(Resolution{2, 2, 1}), small_grid());
    CHECK(lp_norm(empty, 3.5) == 0.0);
}

TEST_CASE("single cell has constant modulus") {
    GridSet g(Resolution{3, 3, 2});
    g.set(5, 9, 2);
    const auto f = evaluate_field(g, small_grid());
    for (const auto& v : f.values) CHECK_THAT(std::abs(v), WithinRel(g.cell_volume(), 1e-12));
}

TEST_CASE("separable path matches direct plane-wave sums") {
    const auto grid = small_grid();
    for (int s : {1, 2}) {
        const auto g = make_grid_set(RandomCells{0.3, 4}, Resolution{2, 3, 1});
        const auto d = evaluate_field(g, grid, s, EvalMethod::direct);
        const auto f = evaluate_field(g, grid, s, EvalMethod::separable);
        CHECK(max_abs_diff(d, f) <= 1e-12 * g.measure());
        CHECK_THAT(lp_norm(f, 3.5), WithinRel(lp_norm(d, 3.5), 1e-6));
    }
    // A point off the lattice through evaluate_at, and a lattice point.
    const auto g = make_grid_set(RandomCells{0.2, 9}, Resolution{3, 3, 2});
    const auto f = evaluate_field(g, grid);
    const auto v = evaluate_at(g, {grid.coord(1), grid.coord(7), grid.coord(4), grid.coord(2)});
    CHECK(std::abs(v - f.at(1, 7, 4, 2)) <= 1e-12 * g.measure());
}

TEST_CASE("midpoint quadrature converges at second order") {
    // Full domain at x = (1,0,0,0): integral of e^{i zeta1} over [-1,1]^2 x [1,2) is 4 sin 1.
    const double exact = 4.0 * std::sin(1.0);
    double prev_err = 0.0;
    for (int L = 1; L <= 5; ++L) {
        const auto full = make_grid_set(FullDomain{}, Resolution{L, 1, 1});
        const cplx v = evaluate_at(full, {1.0, 0.0, 0.0, 0.0});
        const double err = std::abs(v - cplx(exact, 0.0));
        if (L > 1) CHECK_THAT(prev_err / err, WithinRel(4.0, 0.05));
        prev_err = err;
    }
    // At x = (pi,0,0,0) the midpoint sum over a full period is already zero.
    const auto full = make_grid_set(FullDomain{}, Resolution{3, 2, 1});
    CHECK(std::abs(evaluate_at(full, {std::numbers::pi, 0.0, 0.0, 0.0})) < 1e-12);
}

TEST_CASE("lp norms of constant-modulus fields") {
    const double h = 0.5;
    std::vector<cplx> zero(81, cplx{});
    CHECK(lp_norm(zero, 2.0, h * h * h * h) == 0.0);
    std::vector<cplx> c(81, std::polar(0.3, 1.1));
    const double nh = 81.0 * std::pow(h, 4);
    CHECK_THAT(lp_norm(c, 3.5, std::pow(h, 4)), WithinRel(0.3 * std::pow(nh, 1.0 / 3.5), 1e-12));
    CHECK_THROWS_AS(lp_norm(c, 0.0, 1.0), PreconditionError);
}

TEST_CASE("quotient of a single cell") {
    GridSet g(Resolution{2, 2, 2});
    g.set(1, 2, 3);
    Params p;
    p.grid = small_grid();
    const double n4h4 = std::pow(9.0, 4);
    const double expect = std::pow(g.cell_volume(), 1.0 / p.q) * std::pow(n4h4, 1.0 / (2 * p.q));
    CHECK_THAT(quotient(g, p), WithinRel(expect, 1e-12));
    CHECK_THROWS_AS(quotient(GridSet(Resolution{2, 2, 2}), p), UndefinedQuotient);
}

TEST_CASE("quotient refinement oracles") {
    const Params p1{};
    Params p2{};
    p2.subdivision = 2;
    const auto full = make_grid_set(FullDomain{}, Resolution{4, 4, 3});
    const double q1 = quotient(full, p1), q2 = quotient(full, p2);
    CHECK(std::abs(q1 - q2) <= 0.02 * q2);

    // The same continuum box at two resolutions.
    const Tile tau{{2, 0}, {1, -1}};
    const double coarse = quotient(make_grid_set(BoxOf{tau}, Resolution{3, 3, 2}), p1);
    const double fine = quotient(make_grid_set(BoxOf{tau}, Resolution{4, 4, 3}), p1);
    CHECK(std::abs(coarse - fine) <= 0.05 * fine);
}

TEST_CASE("field symmetries") {
    const auto grid = small_grid();
    const auto g = make_grid_set(RandomCells{0.3, 21}, Resolution{3, 3, 2});
    const auto sym = g | g.swapped();
    const auto f = evaluate_field(sym, grid);
    const int n = f.n;
    double conj_err = 0.0, swap_err = 0.0, bound_err = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const cplx v = f.at(a, b, c, d);
                    conj_err = std::max(conj_err, std::abs(f.at(n - 1 - a, n - 1 - b, n - 1 - c, n - 1 - d) - std::conj(v)));
                    swap_err = std::max(swap_err, std::abs(f.at(b, a, c, d) - v));
                    bound_err = std::max(bound_err, std::abs(v) - sym.measure());
                }
    CHECK(conj_err <= 1e-12 * sym.measure());
    CHECK(swap_err <= 1e-12 * sym.measure());
    CHECK(bound_err <= 1e-12 * sym.measure());
}

TEST_CASE("linearity over disjoint unions and single-cell updates") {
    const auto grid = small_grid();
    const auto a = make_grid_set(RandomCells{0.3, 1}, Resolution{3, 3, 2});
    const auto b = make_grid_set(RandomCells{0.3, 2}, Resolution{3, 3, 2}) - a;
    const auto fa = evaluate_field(a, grid), fb = evaluate_field(b, grid), fu = evaluate_field(a | b, grid);
    double err = 0.0;
    for (std::size_t i = 0; i < fu.size(); ++i) err = std::max(err, std::abs(fa.values[i] + fb.values[i] - fu.values[i]));
    CHECK(err <= 1e-12 * (a | b).measure());

    // Add one cell in place.
    GridSet c = a;
    int i1 = 0, i2 = 0, i3 = 0;
    while (c.test(i1, i2, i3)) ++i2;
    c.set(i1, i2, i3);
    auto fc = evaluate_field(a, grid, 2);
    accumulate_cell(fc, a, i1, i2, i3, 1.0);
    CHECK(max_abs_diff(fc, evaluate_field(c, grid, 2)) <= 1e-12 * c.measure());
}

TEST_CASE("bilinear norms") {
    const auto grid = small_grid();
    const Resolution r{2, 2, 2};
    GridSet one(r), two(r);
    one.set(0, 0, 0);
    two.set(3, 6, 2);
    CHECK(bilinear_norm(one, GridSet(r), 1.75, grid) == 0.0);
    const double q = 1.75;
    const double expect = one.cell_volume() * two.cell_volume() * std::pow(std::pow(9.0, 4), 1.0 / q);
    CHECK_THAT(bilinear_norm(one, two, q, grid), WithinRel(expect, 1e-12));
    CHECK_THROWS_AS(bilinear_norm(one, GridSet(Resolution{2, 2, 1}), q, grid), MismatchError);
    const auto fa = evaluate_field(one, grid);
    const auto fb = evaluate_field(two, SpacetimeGrid{3.0, 1.0});
    CHECK_THROWS_AS(bilinear_norm(fa, fb, q), MismatchError);
}

TEST_CASE("evaluation is deterministic") {
    const auto g = make_grid_set(RandomCells{0.2, 77}, Resolution{4, 4, 3});
    const auto a = evaluate_field(g), b = evaluate_field(g);
    CHECK(a.values == b.values);
    CHECK(lp_norm(a, 3.5) == lp_norm(b, 3.5));
}
