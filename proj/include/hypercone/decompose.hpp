// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_DECOMPOSE_HPP
#define HYPERCONE_DECOMPOSE_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <functional>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypercone/dyadic.hpp"
#include "hypercone/error.hpp"
#include "hypercone/gridset.hpp"
#include "hypercone/params.hpp"

namespace hypercone {

/// Dyadic labels stored as exponents: alpha = 2^-alpha etc. -1 means unset.
struct Labels {
    int alpha = -1;
    int eta = -1;
    int rho = -1;
    int beta = -1;
    int delta = -1;

    friend bool operator==(const Labels&, const Labels&) = default;
    friend auto operator<=>(const Labels&, const Labels&) = default;
};

struct Piece {
    int stage = 0;
    Labels labels;
    GridSet subset;
    bool clamped = false; // a label was pulled back into its admissible range
};

/// Distinct maximal intervals covering one density shell.
struct ShellCover {
    int stage = 0;
    Labels labels;
    int base_bucket = 0; // J_alpha (stage 2) or K_beta (stage 5)
    double base_measure = 0.0;
    std::vector<DyadicInterval> intervals;
    double bound = 0.0; // |S| / (eta^2B 2^-base_bucket)

    bool within_bound() const { return static_cast<double>(intervals.size()) <= bound * (1.0 + 1e-12); }
};

enum class FiberCheck { strict, skip };

namespace detail {

/// ceil that ignores rounding noise just above an integer.
inline int guarded_ceil(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

/// Labels stay dyadic and ordered; fold new merged pieces into `out`.
inline void merge_into(std::map<Labels, Piece>& out, const Piece& p) {
    auto it = out.find(p.labels);
    if (it == out.end()) {
        out.emplace(p.labels, p);
    } else {
        it->second.subset |= p.subset;
        it->second.clamped = it->second.clamped || p.clamped;
    }
}

inline std::vector<Piece> values_of(std::map<Labels, Piece>& m) {
    std::vector<Piece> out;
    out.reserve(m.size());
    for (auto& [k, v] : m) out.push_back(std::move(v));
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Step 1 / Step 4

/// Splits `piece` by the dyadic bucket m' of the sigma-section measure of
/// pi_{i,3}(piece) over each zeta_i column and labels it alpha = 2^-ceil(m'/A).
/// `axis` is zeta1 for Step 1 and zeta2 for Step 4; the label lands in alpha or
/// beta accordingly.
inline std::vector<Piece> alpha_stratify(const Piece& piece, Axis axis, double A,
                                         FiberCheck check = FiberCheck::strict) {
    const GridSet& g = piece.subset;
    if (g.empty()) return {};
    if (!(A > 0.0)) throw PreconditionError("A must be positive");
    if (check == FiberCheck::strict && !constant_fiber_bucket(g, axis)) {
        throw PreconditionError("alpha_stratify needs constant fiber length along the stratified axis");
    }
    const auto proj = project(g, axis);
    std::vector<int> label(static_cast<std::size_t>(proj.rows), -1);
    for (int r = 0; r < proj.rows; ++r) {
        std::uint64_t c = 0;
        for (int s = 0; s < proj.cols; ++s) c += proj.test(r, s) ? 1 : 0;
        if (c == 0) continue;
        const int m = count_bucket(c, g.resolution().l3);
        label[static_cast<std::size_t>(r)] = detail::guarded_ceil(m / A);
    }
    std::map<Labels, Piece> out;
    g.for_each([&](int i1, int i2, int i3) {
        const int col = axis == Axis::zeta1 ? i1 : i2;
        Labels l = piece.labels;
        (axis == Axis::zeta1 ? l.alpha : l.beta) = label[static_cast<std::size_t>(col)];
        auto it = out.find(l);
        if (it == out.end()) it = out.emplace(l, Piece{axis == Axis::zeta1 ? 1 : 4, l, GridSet(g.resolution()), piece.clamped}).first;
        it->second.subset.set(i1, i2, i3);
    });
    return detail::values_of(out);
}

inline std::vector<Piece> alpha_stratify(const GridSet& g, Axis axis, double A,
                                         FiberCheck check = FiberCheck::strict) {
    return alpha_stratify(Piece{0, {}, g, false}, axis, A, check);
}

// ---------------------------------------------------------------------------
// Step 2 / Step 5

namespace detail {

struct LinePrefix {
    const CellSet1D* s;
    std::vector<std::int64_t> prefix;

    explicit LinePrefix(const CellSet1D& set) : s(&set), prefix(set.size() + 1, 0) {
        for (std::size_t i = 0; i < set.size(); ++i) prefix[i + 1] = prefix[i] + (set.test(i) ? 1 : 0);
    }

    /// Occupied cells of S inside I (I no finer than the cell level).
    std::int64_t count_in(const DyadicInterval& I) const {
        const int shift = s->level - I.scale;
        const std::int64_t lo = (I.index << shift) - s->first_index();
        const std::int64_t hi = lo + (std::int64_t{1} << shift);
        const auto n = static_cast<std::int64_t>(s->size());
        return prefix[static_cast<std::size_t>(std::clamp<std::int64_t>(hi, 0, n))] -
               prefix[static_cast<std::size_t>(std::clamp<std::int64_t>(lo, 0, n))];
    }

    double density(const DyadicInterval& I) const {
        return static_cast<double>(count_in(I)) * s->cell_width() / I.length();
    }
};

inline DyadicInterval maximal_density_interval(const LinePrefix& lp, std::size_t cell, double theta) {
    const CellSet1D& S = *lp.s;
    const DyadicInterval c = S.cell(cell);
    DyadicInterval best = c;
    for (int scale = S.level - 1; scale >= S.domain.scale; --scale) {
        const DyadicInterval I = c.ancestor(scale);
        if (lp.density(I) >= theta * (1.0 - 1e-12)) best = I;
    }
    return best;
}

} // namespace detail

/// Largest dyadic I containing the cell of x, inside the domain of S, with
/// |I cap S| / |I| >= theta.
inline DyadicInterval maximal_density_interval(const CellSet1D& S, double x, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw PreconditionError("theta must lie in (0, 1]");
    const std::size_t cell = S.locate(x);
    if (cell >= S.size() || !S.test(cell)) throw PreconditionError("point is not in an occupied cell of S");
    return detail::maximal_density_interval(detail::LinePrefix(S), cell, theta);
}

struct DensityResult {
    std::vector<Piece> pieces;
    std::vector<ShellCover> covers;
};

/// Density shells of S = pi_1(pi_{i,3}(piece)). T_eta collects the zeta with
/// |I_eta(zeta)| >= eta^B 2^-J_S; shells are T_eta minus T_2eta. Labels at or
/// above `cap_exponent` (epsilon for Step 2, rho for Step 5) start at the cap
/// and share its label, so their pieces merge.
inline DensityResult density_filter(const Piece& piece, Axis axis, double B, int cap_exponent) {
    DensityResult res;
    const GridSet& g = piece.subset;
    if (g.empty()) return res;
    if (!(B > 0.0)) throw PreconditionError("B must be positive");
    const bool first = axis == Axis::zeta1;
    const int outer = first ? piece.labels.alpha : piece.labels.beta;
    if (outer < 0) throw PreconditionError("density_filter needs the outer label");

    const CellSet1D S = project_to_line(g, axis);
    const detail::LinePrefix lp(S);
    const double s_measure = S.measure();
    const int JS = dyadic_bucket(s_measure);
    const int top = std::max(outer, cap_exponent);
    const int level = S.level;

    std::vector<std::uint8_t> in_prev(S.size(), 0);
    std::uint64_t prev_count = 0;
    const std::uint64_t total = S.count();
    std::map<Labels, Piece> merged;
    for (int e = top; prev_count < total; ++e) {
        if (e > top + 64 + level) throw PreconditionError("density shells failed to exhaust S");
        const double eta_b = std::exp2(-e * B);
        const double cutoff = eta_b * std::exp2(-JS);
        std::vector<std::uint8_t> in_t(S.size(), 0);
        std::set<DyadicInterval> cover;
        CellSet1D shell(S.domain, level);
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < S.size(); ++i) {
            if (!S.test(i)) continue;
            const DyadicInterval I = detail::maximal_density_interval(lp, i, eta_b);
            if (I.length() >= cutoff * (1.0 - 1e-12)) {
                in_t[i] = 1;
                ++count;
                if (!in_prev[i]) {
                    shell.bits[i] = 1;
                    cover.insert(I);
                }
            }
        }
        if (!shell.empty()) {
            Labels l = piece.labels;
            (first ? l.alpha : l.beta) = top;
            (first ? l.eta : l.delta) = e;
            Piece p{first ? 2 : 5, l, preimage_of_line(g, axis, shell), piece.clamped};
            ShellCover sc;
            sc.stage = p.stage;
            sc.labels = l;
            sc.base_bucket = JS;
            sc.base_measure = s_measure;
            sc.intervals.assign(cover.begin(), cover.end());
            sc.bound = s_measure / (std::exp2(-2.0 * e * B) * std::exp2(-JS));
            res.covers.push_back(std::move(sc));
            detail::merge_into(merged, p);
        }
        in_prev = std::move(in_t);
        prev_count = count;
    }
    res.pieces = detail::values_of(merged);
    return res;
}

/// Applies density_filter to every piece and merges equal labels.
inline DensityResult density_filter(const std::vector<Piece>& pieces, Axis axis, double B,
                                    const std::function<int(const Piece&)>& cap_of) {
    DensityResult out;
    std::map<Labels, Piece> merged;
    for (const auto& p : pieces) {
        auto r = density_filter(p, axis, B, cap_of(p));
        for (auto& q : r.pieces) detail::merge_into(merged, q);
        for (auto& c : r.covers) out.covers.push_back(std::move(c));
    }
    out.pieces = detail::values_of(merged);
    return out;
}

// ---------------------------------------------------------------------------
// Step 3

/// rho exponent for a pi_{2,3}-fiber bucket m: the largest dyadic rho with
/// rho^5C <= 2^-m 2^J eta^(3B+A+1+C). Returns {exponent, clamped}; the exponent
/// is pulled up to max(0, ceil(e/5)) so that rho <= min(1, eta^(1/5)).
inline std::pair<int, bool> rho_label(int m, int J, int eta_exponent, const Params& p) {
    const double X = 3.0 * p.B + p.A() + 1.0 + p.C;
    const int raw = detail::guarded_ceil((m - J + eta_exponent * X) / (5.0 * p.C));
    const int floor_r = std::max(0, detail::guarded_ceil(eta_exponent / 5.0));
    return {std::max(raw, floor_r), raw < floor_r};
}

/// Buckets each point of a stage-2 piece by its pi_{2,3}-fiber length inside
/// the piece and maps buckets to rho labels; equal labels merge.
inline std::vector<Piece> rho_stratify(const Piece& piece, int J, const Params& params) {
    const GridSet& g = piece.subset;
    if (g.empty()) return {};
    if (piece.labels.eta < 0) throw PreconditionError("rho_stratify needs a stage-2 piece");
    const auto counts = fiber_counts(g, Axis::zeta2);
    std::map<Labels, Piece> out;
    g.for_each([&](int i1, int i2, int i3) {
        const auto c = counts[static_cast<std::size_t>(i2) * g.n3() + i3];
        const int m = count_bucket(static_cast<std::uint64_t>(c), g.resolution().l1);
        const auto [r, clamped] = rho_label(m, J, piece.labels.eta, params);
        Labels l = piece.labels;
        l.rho = r;
        auto it = out.find(l);
        if (it == out.end()) it = out.emplace(l, Piece{3, l, GridSet(g.resolution()), piece.clamped}).first;
        it->second.subset.set(i1, i2, i3);
        it->second.clamped = it->second.clamped || clamped;
    });
    return detail::values_of(out);
}

// ---------------------------------------------------------------------------
// Assembly

struct BoxCover {
    int delta = 0; // exponent
    int j = 0;
    int k = 0;
    std::vector<Tile> tiles;
};

struct DeltaGroup {
    int delta = 0;
    GridSet subset;
    BoxCover cover;
    std::size_t piece_count = 0;
    bool contained = false;
    bool no_padding = false;
    bool count_ok = false;
    double log2_count = 0.0;
    double log2_bound = 0.0; // C0 * delta exponent
};

struct DecompositionReport {
    int J = 0;
    int K = 0;
    int tile_j = 0; // tile scales after clamping to [0, l]
    int tile_k = 0;
    int eps_exponent = 0;
    double C0 = 0.0;
    std::vector<std::size_t> stage_counts; // pieces after stages 1..5
    std::vector<bool> stage_partition;     // exact partition of Omega at stages 1..5
    std::vector<ShellCover> shells;
    std::vector<Piece> pieces; // stage 5
    std::vector<DeltaGroup> groups;
    bool labels_clamped = false;
    bool shells_ok = true;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Pieces pairwise disjoint with union equal to g.
inline bool is_partition(const GridSet& g, const std::vector<Piece>& pieces) {
    GridSet acc(g.resolution());
    std::uint64_t total = 0;
    for (const auto& p : pieces) {
        acc |= p.subset;
        total += p.subset.count();
    }
    return acc == g && total == g.count();
}

/// Scale-(j,k) tiles inside [-1,1)^2 that meet g.
inline std::vector<Tile> tiles_meeting(const GridSet& g, int j, int k) {
    const auto& r = g.resolution();
    if (j < 0 || k < 0 || j > r.l1 || k > r.l2) throw InvalidScale("tile scale outside [0, l]");
    std::set<Tile> out;
    g.for_each([&](int i1, int i2, int) {
        const DyadicInterval x{r.l1, i1 - (1 << r.l1)};
        const DyadicInterval y{r.l2, i2 - (1 << r.l2)};
        out.insert(Tile{x.ancestor(j), y.ancestor(k)});
    });
    return {out.begin(), out.end()};
}

/// Cells of g inside the union of tiles.
inline bool covered_by(const GridSet& g, const std::vector<Tile>& tiles) {
    GridSet u(g.resolution());
    for (const auto& t : tiles) detail::add_box(u, t);
    return g.subset_of(u);
}

/// Steps 1-5 on a constant-fiber set, grouped by delta, with box covers in
/// T_{J,K} and every structural check recorded in the report.
inline DecompositionReport prop2_decompose(const GridSet& omega, const Params& params, int eps_exponent = 0) {
    params.validate();
    DecompositionReport rep;
    rep.C0 = params.C0();
    rep.eps_exponent = eps_exponent;
    if (omega.empty()) return rep;
    const auto k_bucket = constant_fiber_bucket(omega, Axis::zeta1);
    if (!k_bucket) throw PreconditionError("prop2_decompose needs a constant-fiber set");
    const auto& res = omega.resolution();
    rep.K = *k_bucket;
    rep.J = projection_bucket(omega, Axis::zeta1);
    rep.tile_j = std::clamp(rep.J, 0, res.l1);
    rep.tile_k = std::clamp(rep.K, 0, res.l2);

    auto record = [&](const std::vector<Piece>& ps, int stage) {
        rep.stage_counts.push_back(ps.size());
        const bool ok = is_partition(omega, ps);
        rep.stage_partition.push_back(ok);
        if (!ok) rep.violations.push_back("stage " + std::to_string(stage) + " is not a partition");
    };

    const auto s1 = alpha_stratify(omega, Axis::zeta1, params.A());
    record(s1, 1);
    auto d2 = density_filter(s1, Axis::zeta1, params.B, [&](const Piece&) { return eps_exponent; });
    record(d2.pieces, 2);
    std::vector<Piece> s3;
    for (const auto& p : d2.pieces)
        for (auto& q : rho_stratify(p, rep.J, params)) s3.push_back(std::move(q));
    record(s3, 3);
    std::vector<Piece> s4;
    for (const auto& p : s3)
        for (auto& q : alpha_stratify(p, Axis::zeta2, params.A(), FiberCheck::skip)) s4.push_back(std::move(q));
    record(s4, 4);
    auto d5 = density_filter(s4, Axis::zeta2, params.B, [](const Piece& p) { return p.labels.rho; });
    record(d5.pieces, 5);

    rep.shells = std::move(d2.covers);
    for (auto& c : d5.covers) rep.shells.push_back(std::move(c));
    for (const auto& sc : rep.shells) {
        if (!sc.within_bound()) {
            rep.shells_ok = false;
            rep.violations.push_back("shell cover exceeds eta^-2B bound at stage " + std::to_string(sc.stage));
        }
    }

    std::map<int, DeltaGroup> groups;
    for (const auto& p : d5.pieces) {
        rep.labels_clamped = rep.labels_clamped || p.clamped;
        auto it = groups.find(p.labels.delta);
        if (it == groups.end()) {
            DeltaGroup dg;
            dg.delta = p.labels.delta;
            dg.subset = GridSet(res);
            it = groups.emplace(p.labels.delta, std::move(dg)).first;
        }
        it->second.subset |= p.subset;
        ++it->second.piece_count;
    }
    for (auto& [d, dg] : groups) {
        dg.cover.delta = d;
        dg.cover.j = rep.tile_j;
        dg.cover.k = rep.tile_k;
        dg.cover.tiles = tiles_meeting(dg.subset, rep.tile_j, rep.tile_k);
        dg.contained = covered_by(dg.subset, dg.cover.tiles);
        dg.no_padding = true;
        for (const auto& t : dg.cover.tiles) {
            GridSet box(res);
            detail::add_box(box, t);
            if (box.disjoint_from(dg.subset)) dg.no_padding = false;
        }
        dg.log2_count = std::log2(static_cast<double>(dg.cover.tiles.size()));
        dg.log2_bound = rep.C0 * d;
        dg.count_ok = dg.log2_count <= dg.log2_bound + 1e-12;
        const std::string tag = "delta=2^-" + std::to_string(d);
        if (!dg.contained) rep.violations.push_back(tag + ": cover misses cells");
        if (!dg.no_padding) rep.violations.push_back(tag + ": cover has a tile disjoint from the piece");
        if (!dg.count_ok) {
            rep.violations.push_back(tag + ": " + std::to_string(dg.cover.tiles.size()) + " tiles exceed delta^-C0");
        }
        rep.groups.push_back(std::move(dg));
    }
    rep.pieces = std::move(d5.pieces);
    return rep;
}

} // namespace hypercone

#endif
