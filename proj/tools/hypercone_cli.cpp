// SPDX-License-Identifier: Apache-2.0
//
// hypercone: generate sets, evaluate fields and run the decomposition harness.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "hypercone/hypercone.hpp"

using namespace hypercone;

namespace {

struct Globals {
    double q = 1.75;
    std::vector<int> res{4, 4, 3};
    double R = 16.0;
    double h = 1.0;
    int subdiv = 1;
    double B = 8.0;
    double C = 8.0;
    std::uint64_t seed = 0;
    std::string in;
    std::string out;
    std::string format = "json";

    Resolution resolution() const { return {res[0], res[1], res[2]}; }
    Params params() const {
        Params p;
        p.q = q;
        p.B = B;
        p.C = C;
        p.grid = SpacetimeGrid{R, h};
        p.subdivision = subdiv;
        p.validate();
        return p;
    }
};

Tile parse_tile(const std::string& s) {
    // j,a,k,b
    std::vector<long long> v;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) v.push_back(std::stoll(part));
    if (v.size() != 4) throw PreconditionError("tile must be j,a,k,b, got '" + s + "'");
    return Tile{{static_cast<int>(v[0]), v[1]}, {static_cast<int>(v[2]), v[3]}};
}

struct SetSource {
    std::string generator = "random";
    std::vector<std::string> tiles;
    double density = 0.25;
    int K = 0;
    int period = 1;
};

GridSet load_or_generate(const Globals& g, const SetSource& src, const std::string& path) {
    const Resolution r = g.resolution();
    if (!path.empty()) return make_grid_set(FromFile{path}, r);
    const auto& gen = src.generator;
    if (gen == "full") return make_grid_set(FullDomain{}, r);
    if (gen == "box") {
        if (src.tiles.size() != 1) throw PreconditionError("box needs exactly one --tile");
        return make_grid_set(BoxOf{parse_tile(src.tiles[0])}, r);
    }
    if (gen == "boxes") {
        std::vector<Tile> ts;
        for (const auto& t : src.tiles) ts.push_back(parse_tile(t));
        return make_grid_set(UnionOfBoxes{ts}, r);
    }
    if (gen == "random") return make_grid_set(RandomCells{src.density, g.seed}, r);
    if (gen == "constant-fiber") return make_grid_set(RandomConstantFiber{src.K, src.density, g.seed}, r);
    if (gen == "checkerboard") return make_grid_set(Checkerboard{src.period}, r);
    throw PreconditionError("unknown generator '" + gen + "'");
}

void add_source_options(CLI::App* sub, SetSource& src) {
    sub->add_option("--generator", src.generator, "full|box|boxes|random|constant-fiber|checkerboard (used without --in)")
        ->check(CLI::IsMember({"full", "box", "boxes", "random", "constant-fiber", "checkerboard"}));
    sub->add_option("--tile", src.tiles, "tile j,a,k,b (repeatable)")->allow_extra_args(false);
    sub->add_option("--density", src.density, "cell or footprint density");
    sub->add_option("--K", src.K, "fiber bucket for constant-fiber sets");
    sub->add_option("--period", src.period, "checkerboard period");
}

void emit(const Globals& g, Report& rep, std::chrono::steady_clock::time_point start, bool out_is_report = true) {
    rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const std::string text = g.format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n";
    if (out_is_report && !g.out.empty()) {
        std::ofstream f(g.out);
        if (!f) throw FormatError("cannot write " + g.out);
        f << text;
    } else {
        std::cout << text;
    }
}

json set_summary(const GridSet& s) {
    return {{"cells", s.count()}, {"measure", s.measure()}, {"fingerprint", s.fingerprint()}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extension-operator numerics on the hyperbolic paraboloid-cone"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_flag("--help", "print this help and exit"); // --h is the lattice step

    Globals g;
    app.add_option("--q", g.q, "exponent q in (3/2, 2)")->capture_default_str();
    app.add_option("--res", g.res, "resolution L1,L2,L3")->delimiter(',')->expected(3)->capture_default_str();
    app.add_option("--R", g.R, "lattice half-width")->capture_default_str();
    app.add_option("--h", g.h, "lattice step")->capture_default_str();
    app.add_option("--subdiv", g.subdiv, "midpoint subdivision per cell axis")->capture_default_str();
    app.add_option("--B", g.B, "density constant B")->capture_default_str();
    app.add_option("--C", g.C, "stratification constant C")->capture_default_str();
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--in", g.in, "input GSET file");
    app.add_option("--out", g.out, "output path (GSET for gen and search --save, else the report)");
    app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    SetSource src;

    auto* gen = app.add_subcommand("gen", "generate a set and write it as GSET");
    add_source_options(gen, src);

    auto* eval = app.add_subcommand("eval", "evaluate the extension field of a set");
    add_source_options(eval, src);
    bool dump = false;
    eval->add_flag("--dump", dump, "include every lattice value in the report");

    auto* quot = app.add_subcommand("quotient", "||E chi||_2q / |Omega|^(1/q')");
    add_source_options(quot, src);

    auto* bil = app.add_subcommand("bilinear", "||E chi_A E chi_B||_q");
    std::string with;
    int scan_j = 0, scan_k = 0;
    bil->add_option("--with", with, "second GSET file (with --in)");
    bil->add_option("--j", scan_j, "Whitney pair scale j (without --in)");
    bil->add_option("--k", scan_k, "Whitney pair scale k (without --in)");

    auto* wc = app.add_subcommand("whitney-check", "exact-once coverage of off-diagonal cell pairs");
    int L = 4;
    wc->add_option("--L", L, "cell level")->capture_default_str();

    auto* dec = app.add_subcommand("decompose", "five-step decomposition of a constant-fiber set");
    add_source_options(dec, src);
    int eps = 0;
    dec->add_option("--eps", eps, "epsilon exponent (epsilon = 2^-eps)")->capture_default_str();

    auto* maj = app.add_subcommand("majorant", "Whitney majorant and closed-form bounds");
    add_source_options(maj, src);
    std::string profile = "measured";
    double rho = 1.0;
    maj->add_option("--profile", profile, "measured|fubini")->check(CLI::IsMember({"measured", "fubini"}));
    maj->add_option("--rho", rho, "dyadic rho for the regioned bound")->capture_default_str();

    auto* pipe = app.add_subcommand("pipeline", "stratify, surrogate, decompose and assemble");
    add_source_options(pipe, src);
    int subsets = 16;
    pipe->add_option("--subsets", subsets, "random subsets in the surrogate family")->capture_default_str();

    auto* scan = app.add_subcommand("scan", "bilinear scaling scan or cross-scale sweep");
    std::string kind = "bilinear";
    int max_scale = 3;
    scan->add_option("--kind", kind, "bilinear|cross-scale")->check(CLI::IsMember({"bilinear", "cross-scale"}));
    scan->add_option("--max-scale", max_scale, "largest j,k in the bilinear scan")->capture_default_str();

    auto* search = app.add_subcommand("search", "annealing search for large quotients");
    std::uint64_t budget = 64;
    int iterations = 2000;
    std::string save;
    search->add_option("--budget", budget, "cell count")->capture_default_str();
    search->add_option("--iterations", iterations, "annealing steps")->capture_default_str();
    search->add_option("--save", save, "write the best set as GSET");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = std::chrono::steady_clock::now();
        const Params p = g.params();
        const Resolution r = g.resolution();
        Report rep;
        rep.params = to_json(p, r);
        rep.seed = g.seed;

        if (gen->parsed()) {
            rep.op = "gen";
            if (g.out.empty()) throw PreconditionError("gen needs --out");
            const auto s = load_or_generate(g, src, "");
            write_gset(s, g.out);
            rep.values = set_summary(s);
            rep.values["generator"] = src.generator;
            rep.values["path"] = g.out;
            emit(g, rep, start, false);
        } else if (eval->parsed()) {
            rep.op = "eval";
            const auto s = load_or_generate(g, src, g.in);
            const auto f = evaluate_field(s, p.grid, p.subdivision);
            double peak = 0.0;
            for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
            rep.values = set_summary(s);
            rep.values["points_per_axis"] = f.n;
            rep.values["origin_re"] = f.origin().real();
            rep.values["origin_im"] = f.origin().imag();
            rep.values["max_abs"] = peak;
            rep.values["norm_2q"] = lp_norm(f, 2 * p.q);
            const int c = f.n / 2;
            auto& line = rep.table("x1_line", {"x1", "re", "im", "abs"});
            for (int a = 0; a < f.n; ++a) {
                const cplx v = f.at(a, c, c, c);
                line.add({p.grid.coord(a), v.real(), v.imag(), std::abs(v)});
            }
            if (dump) {
                auto& all = rep.table("field", {"x1", "x2", "xp", "t", "re", "im"});
                for (int a = 0; a < f.n; ++a)
                    for (int b = 0; b < f.n; ++b)
                        for (int e = 0; e < f.n; ++e)
                            for (int t = 0; t < f.n; ++t) {
                                const cplx v = f.at(a, b, e, t);
                                all.add({p.grid.coord(a), p.grid.coord(b), p.grid.coord(e), p.grid.coord(t), v.real(),
                                         v.imag()});
                            }
            }
            emit(g, rep, start);
        } else if (quot->parsed()) {
            rep.op = "quotient";
            const auto s = load_or_generate(g, src, g.in);
            const auto f = evaluate_field(s, p.grid, p.subdivision);
            rep.values = set_summary(s);
            rep.values["norm_2q"] = lp_norm(f, 2 * p.q);
            rep.values["target"] = std::pow(s.measure(), 1.0 / p.q_prime());
            rep.values["quotient"] = quotient(f, s.measure(), p.q);
            emit(g, rep, start);
        } else if (bil->parsed()) {
            rep.op = "bilinear";
            GridSet a, b;
            if (!g.in.empty()) {
                if (with.empty()) throw PreconditionError("bilinear with --in needs --with");
                a = make_grid_set(FromFile{g.in}, r);
                b = make_grid_set(FromFile{with}, r);
            } else {
                const auto [tau, kappa] = scan_pair(scan_j, scan_k);
                a = make_grid_set(BoxOf{tau}, r);
                b = make_grid_set(BoxOf{kappa}, r);
                rep.values["tau"] = to_json(tau);
                rep.values["kappa"] = to_json(kappa);
            }
            rep.values["measure_a"] = a.measure();
            rep.values["measure_b"] = b.measure();
            rep.values["norm_q"] = bilinear_norm(a, b, p.q, p.grid, p.subdivision);
            emit(g, rep, start);
        } else if (wc->parsed()) {
            rep.op = "whitney-check";
            const auto w = whitney_cover_check(L);
            rep.values = {{"L", L},
                          {"exact_once", w.exact_once},
                          {"diagonal_hits", w.diagonal_hits},
                          {"off_diagonal_pairs", w.off_diagonal_pairs}};
            auto& hist = rep.table("multiplicity", {"multiplicity", "pairs"});
            for (const auto& [m, n] : w.histogram) hist.add({m, n});
            emit(g, rep, start);
        } else if (dec->parsed()) {
            rep.op = "decompose";
            if (g.in.empty() && !dec->count("--generator")) src.generator = "constant-fiber";
            const auto s = load_or_generate(g, src, g.in);
            const auto d = prop2_decompose(s, p, eps);
            rep.values = set_summary(s);
            rep.values["J"] = d.J;
            rep.values["K"] = d.K;
            rep.values["tile_j"] = d.tile_j;
            rep.values["tile_k"] = d.tile_k;
            rep.values["eps_exponent"] = d.eps_exponent;
            rep.values["C0"] = d.C0;
            rep.values["labels_clamped"] = d.labels_clamped;
            rep.values["shells_ok"] = d.shells_ok;
            rep.values["ok"] = d.ok();
            rep.values["violations"] = d.violations;
            auto& st = rep.table("stages", {"stage", "pieces", "partition"});
            for (std::size_t i = 0; i < d.stage_counts.size(); ++i)
                st.add({static_cast<int>(i + 1), d.stage_counts[i], static_cast<bool>(d.stage_partition[i])});
            auto& pc = rep.table("pieces", {"alpha", "eta", "rho", "beta", "delta", "cells", "measure", "clamped"});
            for (const auto& x : d.pieces)
                pc.add({x.labels.alpha, x.labels.eta, x.labels.rho, x.labels.beta, x.labels.delta, x.subset.count(),
                        x.subset.measure(), x.clamped});
            auto& gr = rep.table("groups", {"delta", "cells", "pieces", "tiles", "log2_tiles", "log2_bound", "contained",
                                            "no_padding", "count_ok"});
            for (const auto& x : d.groups)
                gr.add({x.delta, x.subset.count(), x.piece_count, x.cover.tiles.size(), x.log2_count, x.log2_bound,
                        x.contained, x.no_padding, x.count_ok});
            auto& sh = rep.table("shells", {"stage", "outer", "inner", "base_bucket", "intervals", "bound"});
            for (const auto& x : d.shells) {
                const bool first = x.stage == 2;
                sh.add({x.stage, first ? x.labels.alpha : x.labels.beta, first ? x.labels.eta : x.labels.delta,
                        x.base_bucket, x.intervals.size(), x.bound});
            }
            emit(g, rep, start);
        } else if (maj->parsed()) {
            rep.op = "majorant";
            const auto s = load_or_generate(g, src, g.in);
            const auto prof = profile == "fubini" ? CapProfile::fubini : CapProfile::measured;
            const auto m = whitney_majorant(s, p, prof);
            rep.values = set_summary(s);
            rep.values["profile"] = to_string(prof);
            rep.values["total"] = m.total;
            rep.values["tail"] = m.tail;
            rep.values["truncation"] = m.truncation;
            if (!s.empty()) {
                rep.values["normalized"] = m.total / std::pow(s.measure(), 2.0 / p.q_prime());
                if (const auto k = constant_fiber_bucket(s, Axis::zeta1)) {
                    const int J = projection_bucket(s, Axis::zeta1);
                    const auto cf = closed_form_bound(J, *k, p.q);
                    const auto rb = regioned_bound(J, *k, rho, p);
                    rep.values["J"] = J;
                    rep.values["K"] = *k;
                    rep.values["closed_form"] = cf.total;
                    rep.values["closed_form_regions"] = cf.region;
                    rep.values["regioned"] = rb.total;
                    rep.values["regioned_offset"] = rb.offset;
                }
            }
            auto& t = rep.table("terms", {"j", "k", "cap", "term"});
            for (const auto& x : m.terms) t.add({x.j, x.k, x.cap, x.term});
            emit(g, rep, start);
        } else if (pipe->parsed()) {
            rep.op = "pipeline";
            const auto s = load_or_generate(g, src, g.in);
            SurrogateOptions opt;
            opt.random_subsets = subsets;
            const auto pr = pipeline(s, p, g.seed, opt);
            rep.values = set_summary(s);
            rep.values["norm_2q"] = pr.norm;
            rep.values["target"] = pr.target;
            rep.values["ratio"] = pr.ratio();
            rep.values["majorant"] = pr.majorant;
            rep.values["majorant_ratio"] = pr.majorant_ratio();
            rep.values["strata_conserve"] = pr.strata_conserve;
            rep.values["pieces_conserve"] = pr.pieces_conserve;
            rep.values["violations"] = pr.violations;
            auto& st = rep.table("strata", {"K", "measure", "surrogate", "surrogate_raw", "surrogate_exponent", "witness",
                                            "family", "J", "groups", "ok"});
            for (const auto& x : pr.strata)
                st.add({x.K, x.measure, x.eps.value, x.eps.raw, x.eps.exponent, x.eps.witness, x.eps.family,
                        x.decomposition.J, x.decomposition.groups.size(), x.decomposition.ok()});
            auto& gr = rep.table("groups", {"surrogate_exponent", "K"});
            for (const auto& [e, ks] : pr.groups)
                for (int k : ks) gr.add({e, k});
            auto& pc = rep.table("pieces", {"K", "delta", "measure", "tiles", "log2_tiles", "log2_bound",
                                            "normalized_quotient"});
            for (const auto& x : pr.pieces)
                pc.add({x.K, x.delta, x.measure, x.tiles, x.log2_tiles, x.log2_bound, x.normalized_quotient});
            emit(g, rep, start);
        } else if (scan->parsed()) {
            rep.op = "scan";
            rep.values["kind"] = kind;
            if (kind == "bilinear") {
                const auto rows = bilinear_scan(p, r, max_scale);
                double lo = INFINITY, hi = 0.0;
                auto& t = rep.table("scan", {"j", "k", "norm", "predicted", "ratio"});
                for (const auto& x : rows) {
                    t.add({x.j, x.k, x.norm, x.predicted, x.ratio});
                    lo = std::min(lo, x.ratio);
                    hi = std::max(hi, x.ratio);
                }
                rep.values["max_over_min"] = hi / lo;
            } else {
                const auto fit = cross_scale_decay(p);
                rep.values["c0"] = fit.c0;
                rep.values["slope"] = fit.slope;
                rep.values["intercept"] = fit.intercept;
                auto& t = rep.table("cross_scale", {"gap", "value", "normalized"});
                for (const auto& x : fit.points) t.add({x.gap, x.value, x.normalized});
            }
            emit(g, rep, start);
        } else if (search->parsed()) {
            rep.op = "search";
            AnnealOptions opt;
            opt.iterations = iterations;
            std::optional<GridSet> from;
            if (!g.in.empty()) from = make_grid_set(FromFile{g.in}, r);
            const auto a = anneal_search(from ? from->count() : budget, p, r, g.seed, opt, from ? &*from : nullptr);
            if (!save.empty()) write_gset(a.best, save);
            rep.values = set_summary(a.best);
            rep.values["initial_quotient"] = a.initial_quotient;
            rep.values["best_quotient"] = a.best_quotient;
            rep.values["accepted"] = a.accepted;
            auto& t = rep.table("trace", {"iteration", "best_quotient"});
            for (std::size_t i = 0; i < a.trace.size(); ++i) t.add({i, a.trace[i]});
            emit(g, rep, start);
        }
    } catch (const Error& e) {
        std::cerr << "hypercone: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hypercone: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
