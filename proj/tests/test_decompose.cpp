// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "hypercone/decompose.hpp"

using namespace hypercone;

namespace {

CellSet1D unit_line(int level, std::initializer_list<std::size_t> cells) {
    CellSet1D s(Domain1d::unit(), level);
    for (auto c : cells) s.bits[c] = 1;
    return s;
}

// Scans every dyadic interval in the domain that holds x and keeps the longest
// dense one.
double longest_dense(const CellSet1D& s, double x, double theta) {
    double best = 0.0;
    for (int scale = s.domain.scale; scale <= s.level; ++scale) {
        const double w = std::ldexp(1.0, -scale);
        const double lo = std::floor(x / w) * w;
        double covered = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double c = s.cell(i).lo();
            if (s.test(i) && c >= lo && c < lo + w) covered += s.cell_width();
        }
        if (covered >= theta * w * (1 - 1e-12)) best = std::max(best, w);
    }
    return best;
}

int label_of(const std::vector<Piece>& ps, int i1, int i2, int i3, int Labels::*field) {
    for (const auto& p : ps)
        if (p.subset.test(i1, i2, i3)) return p.labels.*field;
    return -99;
}

} // namespace

TEST_CASE("alpha stratification of a box has a single zero label") {
    const auto box = make_grid_set(BoxOf{Tile{{1, 0}, {2, 1}}}, Resolution{3, 3, 2});
    const auto s = alpha_stratify(box, Axis::zeta1, 14.0);
    REQUIRE(s.size() == 1);
    CHECK(s[0].labels.alpha == 0);
    CHECK(s[0].stage == 1);
    CHECK(s[0].subset == box);
    CHECK(alpha_stratify(GridSet(Resolution{3, 3, 2}), Axis::zeta1, 14.0).empty());
}

TEST_CASE("alpha stratification separates sigma heights") {
    // Column 0 spans half of [1,2) in sigma, column 3 one cell of 2^-5.
    GridSet g(Resolution{2, 2, 5});
    for (int i2 = 0; i2 < g.n2(); ++i2) {
        for (int i3 = 0; i3 < 16; ++i3) g.set(0, i2, i3);
        g.set(3, i2, 0);
    }
    const auto s = alpha_stratify(g, Axis::zeta1, 4.0);
    REQUIRE(s.size() == 2);
    CHECK(label_of(s, 0, 0, 0, &Labels::alpha) == 1);
    CHECK(label_of(s, 3, 0, 0, &Labels::alpha) == 2);
    CHECK(is_partition(g, s));

    GridSet uneven(Resolution{2, 2, 1});
    uneven.set(0, 0, 0);
    uneven.set(0, 1, 0);
    uneven.set(1, 0, 0);
    CHECK_THROWS_AS(alpha_stratify(uneven, Axis::zeta1, 4.0), PreconditionError);
    CHECK_NOTHROW(alpha_stratify(uneven, Axis::zeta1, 4.0, FiberCheck::skip));
    CHECK_THROWS_AS(alpha_stratify(g, Axis::zeta1, 0.0), PreconditionError);
}

TEST_CASE("maximal density intervals") {
    // S = [0,1/4) u [5/8,3/4) in [0,1).
    const auto s = unit_line(3, {0, 1, 5});
    CHECK(maximal_density_interval(s, 0.05, 0.5) == DyadicInterval{1, 0});
    CHECK(maximal_density_interval(s, 0.05, 0.75) == DyadicInterval{2, 0});
    CHECK(maximal_density_interval(s, 0.65, 0.5) == DyadicInterval{2, 2});
    CHECK(maximal_density_interval(s, 0.65, 1.0) == DyadicInterval{3, 5});
    CHECK_THROWS_AS(maximal_density_interval(s, 0.3, 0.5), PreconditionError);
    CHECK_THROWS_AS(maximal_density_interval(s, 0.05, 0.0), PreconditionError);
    CHECK_THROWS_AS(maximal_density_interval(s, 0.05, 1.5), PreconditionError);

    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.4);
    for (int t = 0; t < 40; ++t) {
        CellSet1D r(Domain1d::unit(), 5);
        for (auto& b : r.bits) b = coin(rng) ? 1 : 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!r.test(i)) continue;
            const double x = r.cell(i).lo() + 0.5 * r.cell_width();
            for (double theta : {1.0, 0.5, 0.3, 0.1}) {
                const auto I = maximal_density_interval(r, x, theta);
                CHECK(I.contains(x));
                CHECK(I.length() == longest_dense(r, x, theta));
            }
        }
    }
}

TEST_CASE("density filter of a box is a single shell") {
    const auto box = make_grid_set(BoxOf{Tile{{2, 0}, {3, -1}}}, Resolution{4, 4, 3});
    const auto s1 = alpha_stratify(box, Axis::zeta1, 14.0);
    REQUIRE(s1.size() == 1);
    const auto d = density_filter(s1[0], Axis::zeta1, 8.0, 0);
    REQUIRE(d.pieces.size() == 1);
    REQUIRE(d.covers.size() == 1);
    CHECK(d.pieces[0].labels.eta == 0);
    CHECK(d.pieces[0].subset == box);
    REQUIRE(d.covers[0].intervals.size() == 1);
    CHECK(d.covers[0].intervals[0] == DyadicInterval{2, 0});
    CHECK(d.covers[0].within_bound());

    // Without the outer label the step is undefined.
    CHECK_THROWS_AS(density_filter(Piece{0, {}, box, false}, Axis::zeta1, 8.0, 0), PreconditionError);
}

TEST_CASE("density shells exhaust sparse projections") {
    // Scattered columns force several shells; every shell respects its count bound.
    const Resolution r{5, 3, 2};
    GridSet g(r);
    for (int i1 : {0, 1, 2, 3, 20, 40, 63})
        for (int i2 = 0; i2 < g.n2(); ++i2) g.set(i1, i2, 1);
    const auto s1 = alpha_stratify(g, Axis::zeta1, 14.0);
    const auto d = density_filter(s1, Axis::zeta1, 0.5, [](const Piece&) { return 0; });
    CHECK(is_partition(g, d.pieces));
    CHECK(d.covers.size() >= 2);
    for (const auto& c : d.covers) {
        CHECK(c.within_bound());
        for (std::size_t i = 1; i < c.intervals.size(); ++i) CHECK(!c.intervals[i - 1].contains(c.intervals[i]));
    }
}

TEST_CASE("rho labels follow the fiber bucket") {
    Params p;
    p.C = 0.2;
    const double X = 3 * p.B + p.A() + 1 + p.C;
    for (int m = 0; m <= 6; ++m)
        for (int J = 0; J <= 4; ++J)
            for (int e = 0; e <= 3; ++e) {
                const auto [r, clamped] = rho_label(m, J, e, p);
                const int raw = static_cast<int>(std::ceil((m - J + e * X) / (5 * p.C) - 1e-9));
                const int floor_r = std::max(0, (e + 4) / 5);
                CHECK(r == std::max(raw, floor_r));
                CHECK(clamped == (raw < floor_r));
                // rho^{5C} <= 2^-m 2^J eta^X whenever nothing was clamped.
                if (!clamped) CHECK(-5 * p.C * r <= -m + J - e * X + 1e-9);
            }

    // A stage-2 piece with three zeta2 fiber lengths, labelled cell by cell.
    const Resolution res{3, 3, 1};
    GridSet g(res);
    for (int i1 = 0; i1 < 16; ++i1) g.set(i1, 0, 0);
    for (int i1 = 0; i1 < 4; ++i1) g.set(i1, 5, 0);
    g.set(7, 9, 1);
    Piece piece{2, {}, g, false};
    piece.labels.alpha = 0;
    piece.labels.eta = 0;
    const auto ps = rho_stratify(piece, 0, p);
    CHECK(is_partition(g, ps));
    CHECK(ps.size() >= 2);
    g.for_each([&](int i1, int i2, int i3) {
        int c = 0;
        for (int a = 0; a < g.n1(); ++a) c += g.test(a, i2, i3);
        const int m = dyadic_bucket(c * g.width1());
        CHECK(label_of(ps, i1, i2, i3, &Labels::rho) == rho_label(m, 0, 0, p).first);
    });
    CHECK_THROWS_AS(rho_stratify(Piece{1, {}, g, false}, 0, p), PreconditionError);
}

TEST_CASE("decomposition of a box is its own tile") {
    const Resolution r{4, 4, 3};
    const Tile tau{{2, 1}, {3, -2}};
    const auto box = make_grid_set(BoxOf{tau}, r);
    const auto rep = prop2_decompose(box, Params{});
    CHECK(rep.ok());
    CHECK(rep.J == 2);
    CHECK(rep.K == 3);
    REQUIRE(rep.groups.size() == 1);
    REQUIRE(rep.groups[0].cover.tiles.size() == 1);
    CHECK(rep.groups[0].cover.tiles[0] == tau);
    CHECK(rep.groups[0].delta == 0);
    CHECK(rep.stage_counts == std::vector<std::size_t>{1, 1, 1, 1, 1});

    const auto empty = prop2_decompose(GridSet(r), Params{});
    CHECK(empty.ok());
    CHECK(empty.pieces.empty());
    CHECK(empty.groups.empty());

    GridSet uneven(r);
    uneven.set(0, 0, 0);
    uneven.set(0, 1, 0);
    uneven.set(1, 0, 0);
    CHECK_THROWS_AS(prop2_decompose(uneven, Params{}), PreconditionError);
}

TEST_CASE("tiles meeting a set") {
    const Resolution r{3, 3, 1};
    GridSet g(r);
    g.set(0, 0, 0);
    g.set(15, 15, 1);
    const auto t = tiles_meeting(g, 1, 1);
    REQUIRE(t.size() == 2);
    CHECK(covered_by(g, t));
    CHECK(!covered_by(g, {t[0]}));
    CHECK_THROWS_AS(tiles_meeting(g, 4, 0), InvalidScale);
}

TEST_CASE("decomposition of random constant-fiber sets") {
    const Resolution r{4, 4, 3};
    const Params p{};
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int K = static_cast<int>(seed % 5);
        const double density = 0.1 + 0.2 * static_cast<double>(seed % 4);
        const auto g = make_grid_set(RandomConstantFiber{K, density, seed}, r);
        if (g.empty()) continue;
        ++checked;
        const auto rep = prop2_decompose(g, p);
        INFO("seed " << seed);
        for (bool ok : rep.stage_partition) CHECK(ok);
        CHECK(rep.shells_ok);
        std::uint64_t cells = 0;
        for (const auto& dg : rep.groups) {
            CHECK(dg.contained);
            CHECK(dg.no_padding);
            cells += dg.subset.count();
        }
        CHECK(cells == g.count());
        CHECK(rep.K == K);
        CHECK(rep.ok());

        // Each shell's piece lies inside the preimage of its cover.
        for (const auto& sc : rep.shells) CHECK(sc.intervals.size() <= sc.bound * (1 + 1e-12));
    }
    CHECK(checked >= 15);
}
