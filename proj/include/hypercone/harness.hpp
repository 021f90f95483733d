// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_HARNESS_HPP
#define HYPERCONE_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hypercone/decompose.hpp"
#include "hypercone/dyadic.hpp"
#include "hypercone/error.hpp"
#include "hypercone/extension.hpp"
#include "hypercone/gridset.hpp"
#include "hypercone/majorant.hpp"
#include "hypercone/params.hpp"
#include "hypercone/summation.hpp"

namespace hypercone {

/// One independent generator per named operation.
inline std::mt19937_64 named_stream(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

/// Keeps each occupied cell of g with probability p.
inline GridSet random_subset(const GridSet& g, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(p);
    GridSet out(g.resolution());
    g.for_each([&](int i1, int i2, int i3) {
        if (keep(rng)) out.set(i1, i2, i3);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Surrogate constant

struct SurrogateConstant {
    double value = 0.0;    // dyadic round-up of raw
    double raw = 0.0;      // max over the family
    int exponent = 0;      // value = 2^-exponent
    std::string witness;   // which family member attained raw
    std::size_t family = 0;
};

struct SurrogateOptions {
    int max_tile_scale = 3;
    int random_subsets = 16;
};

/// Computable stand-in for the subset constant: the largest
/// ||E chi_Omega'||_2q / |Omega|^(1/q') over {Omega}, the nonempty slices
/// Omega cap tau~ with tau in T_{j,k}, j,k <= 3, and seeded random subsets.
inline SurrogateConstant surrogate(const GridSet& g, const Params& params, std::uint64_t seed,
                                   const SurrogateOptions& opt = {}) {
    params.validate();
    if (g.empty()) throw UndefinedQuotient("surrogate of an empty set");
    const double denom = std::pow(g.measure(), 1.0 / params.q_prime());
    SurrogateConstant out;
    std::set<std::uint64_t> seen;
    auto consider = [&](const GridSet& sub, const std::string& name) {
        if (sub.empty() || !seen.insert(sub.fingerprint()).second) return;
        const auto f = evaluate_field(sub, params.grid, params.subdivision);
        const double v = lp_norm(f, 2.0 * params.q) / denom;
        ++out.family;
        if (v > out.raw) {
            out.raw = v;
            out.witness = name;
        }
    };
    consider(g, "omega");
    const auto& res = g.resolution();
    const Domain1d d = Domain1d::symmetric();
    for (int j = 0; j <= std::min(opt.max_tile_scale, res.l1); ++j)
        for (int k = 0; k <= std::min(opt.max_tile_scale, res.l2); ++k) {
            const auto [xb, xe] = d.index_range(j);
            const auto [yb, ye] = d.index_range(k);
            for (auto a = xb; a < xe; ++a)
                for (auto b = yb; b < ye; ++b) {
                    const Tile t{{j, a}, {k, b}};
                    GridSet box(res);
                    detail::add_box(box, t);
                    consider(g & box, "slice(" + std::to_string(j) + "," + std::to_string(k) + "," +
                                          std::to_string(a) + "," + std::to_string(b) + ")");
                }
        }
    auto rng = named_stream(seed, "surrogate");
    std::uniform_real_distribution<double> dens(0.2, 0.8);
    for (int i = 0; i < opt.random_subsets; ++i) {
        const double p = dens(rng);
        consider(random_subset(g, p, rng), "random#" + std::to_string(i));
    }
    out.value = dyadic_round_up(out.raw);
    out.exponent = -static_cast<int>(std::lround(std::log2(out.value)));
    return out;
}

// ---------------------------------------------------------------------------
// Bilinear scaling scan

struct ScanRow {
    int j = 0;
    int k = 0;
    Tile tau, kappa;
    double norm = 0.0;
    double predicted = 0.0;
    double ratio = 0.0; // (norm / predicted) relative to the (0,0) row
};

/// 2^-(j+k)(1-2/q) |tau~|^(1/2) |kappa~|^(1/2).
inline double scan_predicted(int j, int k, double q, double vol_tau, double vol_kappa) {
    return std::exp2(-(j + k) * (1.0 - 2.0 / q)) * std::sqrt(vol_tau) * std::sqrt(vol_kappa);
}

/// Whitney pair for row (j,k): scale-(j+1,k+1) tiles at indices -2 and 1 on
/// each axis, so both gaps are 2^-j and 2^-k.
inline std::pair<Tile, Tile> scan_pair(int j, int k) {
    const Tile tau{{j + 1, -2}, {k + 1, -2}};
    const Tile kappa{{j + 1, 1}, {k + 1, 1}};
    return {tau, kappa};
}

inline std::vector<ScanRow> bilinear_scan(const Params& params, Resolution res, int max_scale = 3) {
    params.validate();
    if (max_scale + 1 > std::min(res.l1, res.l2)) throw InvalidScale("resolution too coarse for the scan");
    std::vector<ScanRow> rows;
    for (int j = 0; j <= max_scale; ++j)
        for (int k = 0; k <= max_scale; ++k) {
            const auto [tau, kappa] = scan_pair(j, k);
            const GridSet a = make_grid_set(BoxOf{tau}, res);
            const GridSet b = make_grid_set(BoxOf{kappa}, res);
            ScanRow r{j, k, tau, kappa};
            r.norm = bilinear_norm(a, b, params.q, params.grid, params.subdivision);
            r.predicted = scan_predicted(j, k, params.q, a.measure(), b.measure());
            r.ratio = r.norm / r.predicted;
            rows.push_back(r);
        }
    const double ref = rows.front().ratio;
    for (auto& r : rows) r.ratio /= ref;
    return rows;
}

// ---------------------------------------------------------------------------
// Cross-scale decay

struct CrossScalePoint {
    int gap = 0; // |K - K'|
    double value = 0.0;
    double normalized = 0.0; // value / (2^-gap)^(2/q')
};

struct CrossScaleFit {
    std::vector<CrossScalePoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double c0 = 0.0; // -slope
};

/// Least-squares line through (x, y).
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// tau = [0,2^-d) x [0,1) has fibers of length 1 (K = 0); kappa = [0,1) x [0,2^-d)
/// has fibers 2^-d (K' = d). Both have measure 2^-d.
inline std::pair<Tile, Tile> cross_scale_pair(int d) {
    return {Tile{{d, 0}, {0, 0}}, Tile{{0, 0}, {d, 0}}};
}

inline CrossScaleFit fit_cross_scale(std::vector<CrossScalePoint> pts) {
    if (pts.size() < 3) throw PreconditionError("cross-scale fit needs at least 3 points");
    std::vector<double> x, y;
    for (const auto& p : pts) {
        x.push_back(p.gap);
        y.push_back(std::log2(p.normalized));
    }
    CrossScaleFit fit;
    std::tie(fit.slope, fit.intercept) = fit_line(x, y);
    fit.c0 = -fit.slope;
    fit.points = std::move(pts);
    return fit;
}

inline CrossScaleFit cross_scale_decay(const Params& params, const std::vector<int>& gaps = {2, 3, 4, 5, 6},
                                       Resolution res = {6, 6, 1}) {
    params.validate();
    std::vector<CrossScalePoint> pts;
    for (int d : gaps) {
        if (d > std::min(res.l1, res.l2)) throw InvalidScale("gap finer than the resolution");
        const auto [tau, kappa] = cross_scale_pair(d);
        const GridSet a = make_grid_set(BoxOf{tau}, res);
        const GridSet b = make_grid_set(BoxOf{kappa}, res);
        CrossScalePoint p;
        p.gap = d;
        p.value = bilinear_norm(a, b, params.q, params.grid, params.subdivision);
        p.normalized = p.value / std::pow(std::exp2(-d), 2.0 / params.q_prime());
        pts.push_back(p);
    }
    return fit_cross_scale(std::move(pts));
}

// ---------------------------------------------------------------------------
// Decoupling

struct DecouplingResult {
    double ratio = 0.0;
    double numerator = 0.0;
    double sum_pieces = 0.0;
    double log_factor = 0.0; // (log2 1/delta)^2q
    double remainder = 0.0;  // delta |Omega|^(2q/q')
};

/// ||sum F||^2q / [(log2 1/delta)^2q sum ||F||^2q + delta |Omega|^(2q/q')].
inline DecouplingResult decoupling_check(const std::vector<ExtensionField>& fields, double omega_measure, double q,
                                         double delta) {
    if (fields.empty()) throw PreconditionError("decoupling needs at least one piece");
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
    const double p = 2.0 * q;
    std::vector<cplx> total(fields.front().size());
    DecouplingResult r;
    for (const auto& f : fields) {
        if (f.size() != total.size() || !(f.grid == fields.front().grid)) throw MismatchError("fields differ in lattice");
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += f.values[i];
        r.sum_pieces += std::pow(lp_norm(f, p), p);
    }
    const double h4 = fields.front().grid.cell_volume();
    r.numerator = std::pow(lp_norm(total, p, h4), p);
    r.log_factor = std::pow(std::log2(1.0 / delta), p);
    r.remainder = delta * std::pow(omega_measure, p * (q - 1.0) / q);
    r.ratio = r.numerator / (r.log_factor * r.sum_pieces + r.remainder);
    return r;
}

inline DecouplingResult decoupling_check(const std::vector<GridSet>& pieces, const Params& params, double delta) {
    if (pieces.empty()) throw PreconditionError("decoupling needs at least one piece");
    std::vector<ExtensionField> fields;
    GridSet all(pieces.front().resolution());
    for (const auto& g : pieces) {
        fields.push_back(evaluate_field(g, params.grid, params.subdivision));
        all |= g;
    }
    return decoupling_check(fields, all.measure(), params.q, delta);
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineStratum {
    int K = 0;
    double measure = 0.0;
    SurrogateConstant eps;
    DecompositionReport decomposition;
};

struct PipelinePiece {
    int K = 0;
    int delta = 0;
    double measure = 0.0;
    std::size_t tiles = 0;
    double log2_tiles = 0.0;
    double log2_bound = 0.0;
    double normalized_quotient = 0.0; // ||E chi||_2q / |Omega|^(1/q')
};

struct PipelineReport {
    double measure = 0.0;
    double norm = 0.0;      // ||E chi_Omega||_2q
    double target = 0.0;    // |Omega|^(1/q')
    double majorant = 0.0;  // M(Omega), measured caps
    std::vector<PipelineStratum> strata;
    std::map<int, std::vector<int>> groups; // eps exponent -> K values
    std::vector<PipelinePiece> pieces;
    bool strata_conserve = false;
    bool pieces_conserve = false;
    std::vector<std::string> violations;

    double ratio() const { return norm / target; }
    double majorant_ratio() const { return norm * norm / majorant; }
};

inline PipelineReport pipeline(const GridSet& g, const Params& params, std::uint64_t seed,
                               const SurrogateOptions& opt = {}) {
    params.validate();
    if (g.empty()) throw UndefinedQuotient("pipeline of an empty set");
    PipelineReport rep;
    rep.measure = g.measure();
    rep.target = std::pow(rep.measure, 1.0 / params.q_prime());
    rep.norm = lp_norm(evaluate_field(g, params.grid, params.subdivision), 2.0 * params.q);
    rep.majorant = whitney_majorant(g, params, CapProfile::measured).total;

    std::uint64_t strata_cells = 0;
    for (auto& st : stratify_constant_fiber(g, Axis::zeta1)) {
        PipelineStratum ps;
        ps.K = st.K;
        ps.measure = st.subset.measure();
        strata_cells += st.subset.count();
        ps.eps = surrogate(st.subset, params, seed + static_cast<std::uint64_t>(st.K + 1), opt);
        rep.groups[ps.eps.exponent].push_back(st.K);
        ps.decomposition = prop2_decompose(st.subset, params, std::max(0, ps.eps.exponent));
        std::uint64_t piece_cells = 0;
        for (const auto& grp : ps.decomposition.groups) {
            piece_cells += grp.subset.count();
            PipelinePiece pp;
            pp.K = st.K;
            pp.delta = grp.delta;
            pp.measure = grp.subset.measure();
            pp.tiles = grp.cover.tiles.size();
            pp.log2_tiles = grp.log2_count;
            pp.log2_bound = grp.log2_bound;
            pp.normalized_quotient =
                lp_norm(evaluate_field(grp.subset, params.grid, params.subdivision), 2.0 * params.q) / rep.target;
            rep.pieces.push_back(pp);
        }
        if (piece_cells != st.subset.count()) {
            rep.violations.push_back("K=" + std::to_string(st.K) + ": delta pieces do not conserve measure");
        }
        for (const auto& v : ps.decomposition.violations) rep.violations.push_back("K=" + std::to_string(st.K) + ": " + v);
        rep.strata.push_back(std::move(ps));
    }
    rep.strata_conserve = strata_cells == g.count();
    rep.pieces_conserve = std::none_of(rep.violations.begin(), rep.violations.end(),
                                       [](const std::string& s) { return s.find("conserve") != std::string::npos; });
    if (!rep.strata_conserve) rep.violations.push_back("strata do not conserve measure");
    return rep;
}

// ---------------------------------------------------------------------------
// Extremizer search

/// Running L^p objective with single-cell rank-one updates.
class CellFieldObjective {
public:
    CellFieldObjective(const GridSet& g, const Params& params)
        : params_(params), field_(evaluate_field(g, params.grid, params.subdivision)), nodes_(g, params.subdivision),
          res_(g.resolution()) {
        n_ = field_.n;
        value_ = norm_of(nullptr);
    }

    double value() const { return value_; }
    const ExtensionField& field() const { return field_; }

    /// Objective after removing cell `out` and adding cell `in`, without committing.
    double trial(std::array<int, 3> out, std::array<int, 3> in) {
        build_delta(out, in);
        return norm_of(&delta_);
    }

    void commit(std::array<int, 3> out, std::array<int, 3> in) {
        build_delta(out, in);
        apply_delta();
        value_ = norm_of(nullptr);
    }

private:
    // Factorized change: sum over sub-nodes of sign * w * e1 (x) e2 (x) e3 (x) e4.
    struct Wave {
        double sign;
        std::vector<cplx> e1, e2, e3, e4;
    };

    void build_delta(std::array<int, 3> out, std::array<int, 3> in) {
        delta_.clear();
        add_cell(out, -1.0);
        add_cell(in, 1.0);
    }

    void add_cell(std::array<int, 3> c, double sign) {
        const int s = params_.subdivision;
        for (int u = 0; u < s; ++u)
            for (int v = 0; v < s; ++v)
                for (int w = 0; w < s; ++w) {
                    const double z1 = nodes_.z1[static_cast<std::size_t>(c[0] * s + u)];
                    const double z2 = nodes_.z2[static_cast<std::size_t>(c[1] * s + v)];
                    const double sg = nodes_.sigma[static_cast<std::size_t>(c[2] * s + w)];
                    Wave wv{sign * nodes_.weight, {}, {}, {}, {}};
                    const double fr[4] = {z1, z2, sg, z1 * z2 / sg};
                    std::vector<cplx>* tab[4] = {&wv.e1, &wv.e2, &wv.e3, &wv.e4};
                    for (int a = 0; a < 4; ++a) {
                        tab[a]->resize(static_cast<std::size_t>(n_));
                        for (int i = 0; i < n_; ++i) {
                            const double ph = params_.grid.coord(i) * fr[a];
                            (*tab[a])[static_cast<std::size_t>(i)] = {std::cos(ph), std::sin(ph)};
                        }
                    }
                    delta_.push_back(std::move(wv));
                }
    }

    cplx delta_at(int a, int b, int c, int d) const {
        cplx acc{};
        for (const auto& w : delta_) {
            acc += w.sign * mul(mul(w.e1[static_cast<std::size_t>(a)], w.e2[static_cast<std::size_t>(b)]),
                                mul(w.e3[static_cast<std::size_t>(c)], w.e4[static_cast<std::size_t>(d)]));
        }
        return acc;
    }

    void apply_delta() {
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                for (int c = 0; c < n_; ++c)
                    for (int d = 0; d < n_; ++d) field_.at(a, b, c, d) += delta_at(a, b, c, d);
    }

    // ||F + delta||_2q with per-row sums folded pairwise.
    double norm_of(const std::vector<Wave>* delta) {
        const double half = params_.q;
        const std::size_t rows = static_cast<std::size_t>(n_) * n_ * n_;
        row_sums_.assign(rows, 0.0);
        std::vector<cplx> pre(delta ? delta->size() : 0);
#pragma omp parallel for schedule(static) firstprivate(pre)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
            const int c = static_cast<int>(r % n_);
            const int b = static_cast<int>((r / n_) % n_);
            const int a = static_cast<int>(r / (static_cast<std::int64_t>(n_) * n_));
            if (delta) {
                for (std::size_t i = 0; i < delta->size(); ++i) {
                    const auto& w = (*delta)[i];
                    pre[i] = w.sign * mul(mul(w.e1[static_cast<std::size_t>(a)], w.e2[static_cast<std::size_t>(b)]),
                                          w.e3[static_cast<std::size_t>(c)]);
                }
            }
            const cplx* row = &field_.values[field_.index(a, b, c, 0)];
            double s = 0.0;
            for (int d = 0; d < n_; ++d) {
                double re = row[d].real(), im = row[d].imag();
                for (std::size_t i = 0; i < pre.size(); ++i) {
                    const cplx e = (*delta)[i].e4[static_cast<std::size_t>(d)];
                    re += pre[i].real() * e.real() - pre[i].imag() * e.imag();
                    im += pre[i].real() * e.imag() + pre[i].imag() * e.real();
                }
                const double m2 = re * re + im * im;
                s += m2 == 0.0 ? 0.0 : std::pow(m2, half);
            }
            row_sums_[static_cast<std::size_t>(r)] = s;
        }
        const double sum = pairwise_sum(rows, [&](std::size_t i) { return row_sums_[i]; });
        const double p = 2.0 * params_.q;
        return sum == 0.0 ? 0.0 : std::pow(sum * params_.grid.cell_volume(), 1.0 / p);
    }

    Params params_;
    ExtensionField field_;
    QuadratureNodes nodes_;
    Resolution res_;
    int n_ = 0;
    double value_ = 0.0;
    std::vector<Wave> delta_;
    std::vector<double> row_sums_;
};

struct AnnealOptions {
    int iterations = 2000;
    double t0 = 0.05;      // initial temperature, relative to the objective
    double t_final = 1e-4; // final temperature, relative
};

struct AnnealResult {
    GridSet best;
    GridSet initial;
    double initial_quotient = 0.0;
    double best_quotient = 0.0;
    std::vector<double> trace; // best-so-far quotient after each iteration, trace[0] is the start
    int accepted = 0;
};

/// Fixed-cardinality local search for large quotients: single swap moves and
/// geometric cooling. Starts from `start` if given, else a seeded random set.
inline AnnealResult anneal_search(std::uint64_t budget, const Params& params, Resolution res, std::uint64_t seed,
                                  const AnnealOptions& opt = {}, const GridSet* start = nullptr) {
    params.validate();
    if (budget == 0) throw PreconditionError("budget must be positive");
    GridSet cur(res);
    if (budget > cur.cell_count()) throw InfeasibleSpec("budget exceeds the number of cells");
    auto rng = named_stream(seed, "anneal");
    if (start) {
        if (start->count() != budget || !(start->resolution() == res)) {
            throw PreconditionError("start set must match budget and resolution");
        }
        cur = *start;
    } else {
        std::vector<std::uint64_t> all(cur.cell_count());
        std::iota(all.begin(), all.end(), 0);
        for (std::uint64_t i = 0; i < budget; ++i) {
            std::uniform_int_distribution<std::uint64_t> pick(i, all.size() - 1);
            std::swap(all[i], all[pick(rng)]);
            cur.set_linear(all[i]);
        }
    }
    const bool full = budget == cur.cell_count();
    const double denom = std::pow(static_cast<double>(budget) * cur.cell_volume(), 1.0 / params.q_prime());
    CellFieldObjective obj(cur, params);
    AnnealResult out;
    out.initial = cur;
    out.best = cur;
    out.initial_quotient = out.best_quotient = obj.value() / denom;
    out.trace.push_back(out.best_quotient);

    std::vector<std::uint64_t> in, outside;
    for (std::uint64_t i = 0; i < cur.cell_count(); ++i) (cur.test_linear(i) ? in : outside).push_back(i);
    const double cool = opt.iterations > 0 ? std::pow(opt.t_final / opt.t0, 1.0 / opt.iterations) : 1.0;
    double temp = opt.t0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int it = 0; it < opt.iterations && !full; ++it) {
        std::uniform_int_distribution<std::size_t> pick_in(0, in.size() - 1), pick_out(0, outside.size() - 1);
        const std::size_t a = pick_in(rng), b = pick_out(rng);
        const auto ca = cur.unlinear(in[a]), cb = cur.unlinear(outside[b]);
        const double now = obj.value();
        const double next = obj.trial(ca, cb);
        const double u = unit(rng);
        if (next >= now || u < std::exp((next - now) / (temp * now))) {
            obj.commit(ca, cb);
            cur.set_linear(in[a], false);
            cur.set_linear(outside[b], true);
            std::swap(in[a], outside[b]);
            ++out.accepted;
            const double qv = obj.value() / denom;
            if (qv > out.best_quotient) {
                out.best_quotient = qv;
                out.best = cur;
            }
        }
        out.trace.push_back(out.best_quotient);
        temp *= cool;
    }
    return out;
}

} // namespace hypercone

#endif
