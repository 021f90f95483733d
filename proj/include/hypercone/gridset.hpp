// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_GRIDSET_HPP
#define HYPERCONE_GRIDSET_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hypercone/dyadic.hpp"
#include "hypercone/error.hpp"

namespace hypercone {

/// Lattice resolution: 2^(l1+1) x 2^(l2+1) x 2^l3 cells over [-1,1)^2 x [1,2).
struct Resolution {
    int l1 = 4;
    int l2 = 4;
    int l3 = 3;

    friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Which zeta coordinate the projection pi_{i,3} keeps. Axis::zeta1 is pi_{1,3},
/// whose fibers run along zeta2; Axis::zeta2 is pi_{2,3}.
enum class Axis { zeta1, zeta2 };

inline Axis other(Axis a) { return a == Axis::zeta1 ? Axis::zeta2 : Axis::zeta1; }

/// Index b of the left-closed bucket 2^-b <= v < 2^(1-b). Exact for doubles.
inline int dyadic_bucket(double v) {
    if (!(v > 0.0)) throw PreconditionError("dyadic bucket of a non-positive value");
    int e = 0;
    std::frexp(v, &e); // v in [2^(e-1), 2^e)
    return 1 - e;
}

/// Bucket of `count` cells of width 2^-level.
inline int count_bucket(std::uint64_t count, int level) {
    if (count == 0) throw PreconditionError("dyadic bucket of an empty count");
    return level - (std::bit_width(count) - 1);
}

/// Smallest dyadic 2^e >= v.
inline double dyadic_round_up(double v) {
    if (!(v > 0.0)) return 0.0;
    int e = 0;
    const double m = std::frexp(v, &e); // v = m 2^e, m in [0.5, 1)
    return m == 0.5 ? v : std::ldexp(1.0, e);
}

/// One-dimensional set of level-`level` cells inside a Domain1d.
struct CellSet1D {
    Domain1d domain = Domain1d::symmetric();
    int level = 0;
    std::vector<std::uint8_t> bits;

    CellSet1D() = default;
    CellSet1D(Domain1d d, int lvl) : domain(d), level(lvl) {
        const auto [b, e] = domain.index_range(level);
        bits.assign(static_cast<std::size_t>(e - b), 0);
    }

    std::size_t size() const { return bits.size(); }
    double cell_width() const { return std::ldexp(1.0, -level); }
    std::int64_t first_index() const { return domain.index_range(level).first; }
    DyadicInterval cell(std::size_t i) const {
        return {level, first_index() + static_cast<std::int64_t>(i)};
    }
    bool test(std::size_t i) const { return bits[i] != 0; }
    std::uint64_t count() const {
        return static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
    double measure() const { return static_cast<double>(count()) * cell_width(); }
    bool empty() const { return count() == 0; }

    /// Local cell containing x, or size() if x is outside the domain.
    std::size_t locate(double x) const {
        if (!domain.contains(x)) return size();
        const auto n = static_cast<std::int64_t>(std::floor(std::ldexp(x, level)));
        return static_cast<std::size_t>(n - first_index());
    }

    friend bool operator==(const CellSet1D&, const CellSet1D&) = default;
};

/// Two-dimensional cell set (rows x cols) with a fixed cell area.
struct CellSet2D {
    int rows = 0;
    int cols = 0;
    double cell_area = 0.0;
    std::vector<std::uint8_t> bits;

    bool test(int r, int c) const { return bits[static_cast<std::size_t>(r) * cols + c] != 0; }
    std::uint64_t count() const {
        return static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
    double measure() const { return static_cast<double>(count()) * cell_area; }
    bool empty() const { return count() == 0; }
};

/// Voxelized subset of [-1,1)^2 x [1,2). Cell (i1, i2, i3) is
/// [-1 + i1 2^-l1, ..) x [-1 + i2 2^-l2, ..) x [1 + i3 2^-l3, ..).
class GridSet {
public:
    GridSet() : GridSet(Resolution{}) {}

    explicit GridSet(Resolution res) : res_(res) {
        for (int l : {res.l1, res.l2, res.l3}) {
            if (l < 0 || l > 10) throw InvalidScale("resolution exponents must lie in [0, 10]");
        }
        words_.assign((cell_count() + 63) / 64, 0);
    }

    const Resolution& resolution() const { return res_; }
    int n1() const { return 2 << res_.l1; }
    int n2() const { return 2 << res_.l2; }
    int n3() const { return 1 << res_.l3; }
    std::uint64_t cell_count() const {
        return static_cast<std::uint64_t>(n1()) * n2() * n3();
    }
    double cell_volume() const { return std::ldexp(1.0, -res_.l1 - res_.l2 - res_.l3); }
    double width1() const { return std::ldexp(1.0, -res_.l1); }
    double width2() const { return std::ldexp(1.0, -res_.l2); }
    double width3() const { return std::ldexp(1.0, -res_.l3); }

    double zeta1_lo(int i1) const { return -1.0 + i1 * width1(); }
    double zeta2_lo(int i2) const { return -1.0 + i2 * width2(); }
    double sigma_lo(int i3) const { return 1.0 + i3 * width3(); }

    /// i1 slowest, i3 fastest; matches the GSET bit order.
    std::uint64_t linear(int i1, int i2, int i3) const {
        return (static_cast<std::uint64_t>(i1) * n2() + i2) * n3() + i3;
    }

    bool in_range(int i1, int i2, int i3) const {
        return i1 >= 0 && i1 < n1() && i2 >= 0 && i2 < n2() && i3 >= 0 && i3 < n3();
    }

    bool test_linear(std::uint64_t idx) const { return (words_[idx >> 6] >> (idx & 63)) & 1ULL; }
    void set_linear(std::uint64_t idx, bool on = true) {
        if (on) {
            words_[idx >> 6] |= 1ULL << (idx & 63);
        } else {
            words_[idx >> 6] &= ~(1ULL << (idx & 63));
        }
    }

    bool test(int i1, int i2, int i3) const { return test_linear(linear(i1, i2, i3)); }
    void set(int i1, int i2, int i3, bool on = true) { set_linear(linear(i1, i2, i3), on); }

    std::uint64_t count() const {
        std::uint64_t c = 0;
        for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
        return c;
    }
    bool empty() const {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }
    /// count x cell volume; exact in binary floating point.
    double measure() const { return static_cast<double>(count()) * cell_volume(); }

    std::array<int, 3> unlinear(std::uint64_t idx) const {
        const int i3 = static_cast<int>(idx % n3());
        idx /= n3();
        const int i2 = static_cast<int>(idx % n2());
        return {static_cast<int>(idx / n2()), i2, i3};
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                bits &= bits - 1;
                const auto [i1, i2, i3] = unlinear(w * 64 + b);
                f(i1, i2, i3);
            }
        }
    }

    std::vector<std::uint64_t> occupied() const {
        std::vector<std::uint64_t> out;
        out.reserve(count());
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                out.push_back(w * 64 + std::countr_zero(bits));
                bits &= bits - 1;
            }
        }
        return out;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    GridSet& operator|=(const GridSet& o) { return combine(o, [](auto a, auto b) { return a | b; }); }
    GridSet& operator&=(const GridSet& o) { return combine(o, [](auto a, auto b) { return a & b; }); }
    GridSet& operator-=(const GridSet& o) { return combine(o, [](auto a, auto b) { return a & ~b; }); }
    friend GridSet operator|(GridSet a, const GridSet& b) { return a |= b; }
    friend GridSet operator&(GridSet a, const GridSet& b) { return a &= b; }
    friend GridSet operator-(GridSet a, const GridSet& b) { return a -= b; }

    bool subset_of(const GridSet& o) const {
        require_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & ~o.words_[i]) return false;
        }
        return true;
    }
    bool disjoint_from(const GridSet& o) const {
        require_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & o.words_[i]) return false;
        }
        return true;
    }

    /// zeta1 <-> zeta2 mirror; requires l1 == l2.
    GridSet swapped() const {
        if (res_.l1 != res_.l2) throw MismatchError("axis swap needs l1 == l2");
        GridSet out(res_);
        for_each([&](int i1, int i2, int i3) { out.set(i2, i1, i3); });
        return out;
    }

    /// FNV-1a over the occupancy words; used as a set id in reports.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xffU;
                h *= 1099511628211ULL;
            }
        };
        mix(static_cast<std::uint64_t>(res_.l1) | (static_cast<std::uint64_t>(res_.l2) << 8) |
            (static_cast<std::uint64_t>(res_.l3) << 16));
        for (auto w : words_) mix(w);
        return h;
    }

    void require_same(const GridSet& o) const {
        if (!(res_ == o.res_)) throw MismatchError("grid sets have different resolutions");
    }

    friend bool operator==(const GridSet&, const GridSet&) = default;

private:
    template <class Op>
    GridSet& combine(const GridSet& o, Op op) {
        require_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = op(words_[i], o.words_[i]);
        return *this;
    }

    Resolution res_;
    std::vector<std::uint64_t> words_;
};

// ---------------------------------------------------------------------------
// Generators

struct FullDomain {};
struct BoxOf {
    Tile tile;
};
struct UnionOfBoxes {
    std::vector<Tile> tiles;
};
struct RandomCells {
    double density = 0.5;
    std::uint64_t seed = 0;
};
/// Every nonempty pi_{1,3}-fiber holds exactly 2^-K 2^l2 zeta2 cells.
struct RandomConstantFiber {
    int K = 0;
    double footprint_density = 0.25;
    std::uint64_t seed = 0;
};
struct Checkerboard {
    int period = 1;
};
struct FromFile {
    std::filesystem::path path;
};

using GeneratorSpec =
    std::variant<FullDomain, BoxOf, UnionOfBoxes, RandomCells, RandomConstantFiber, Checkerboard, FromFile>;

GridSet read_gset(const std::filesystem::path& path);

namespace detail {

inline std::pair<int, int> cell_span(const DyadicInterval& i, int level, int ncells) {
    if (i.scale > level) {
        throw InfeasibleSpec("interval of scale " + std::to_string(i.scale) +
                             " is finer than the lattice level " + std::to_string(level));
    }
    const Domain1d dom = Domain1d::symmetric();
    if (!dom.contains(i)) throw InfeasibleSpec("interval lies outside [-1,1)");
    const std::int64_t per = std::int64_t{1} << (level - i.scale);
    const std::int64_t lo = i.index * per + (std::int64_t{1} << level); // shift -1 to 0
    const std::int64_t hi = lo + per;
    if (lo < 0 || hi > ncells) throw InfeasibleSpec("interval lies outside [-1,1)");
    return {static_cast<int>(lo), static_cast<int>(hi)};
}

inline void add_box(GridSet& g, const Tile& t) {
    const auto [a0, a1] = cell_span(t.x, g.resolution().l1, g.n1());
    const auto [b0, b1] = cell_span(t.y, g.resolution().l2, g.n2());
    for (int i1 = a0; i1 < a1; ++i1)
        for (int i2 = b0; i2 < b1; ++i2)
            for (int i3 = 0; i3 < g.n3(); ++i3) g.set(i1, i2, i3);
}

/// Uniform draw of `k` distinct values from [0, n), in increasing order.
inline std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace detail

/// Builds the lattice set described by `spec`. Random specs are reproducible per seed.
inline GridSet make_grid_set(const GeneratorSpec& spec, Resolution res) {
    GridSet g(res);
    struct Visitor {
        GridSet& g;
        void operator()(const FullDomain&) const {
            for (std::uint64_t i = 0; i < g.cell_count(); ++i) g.set_linear(i);
        }
        void operator()(const BoxOf& b) const { detail::add_box(g, b.tile); }
        void operator()(const UnionOfBoxes& u) const {
            for (const auto& t : u.tiles) detail::add_box(g, t);
        }
        void operator()(const RandomCells& r) const {
            if (r.density < 0.0 || r.density > 1.0) throw InfeasibleSpec("density must lie in [0,1]");
            std::mt19937_64 rng(r.seed);
            std::bernoulli_distribution coin(r.density);
            for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
                if (coin(rng)) g.set_linear(i);
            }
        }
        void operator()(const RandomConstantFiber& r) const {
            const int l2 = g.resolution().l2;
            if (r.K < -1 || r.K > l2) {
                throw InfeasibleSpec("fiber bucket K=" + std::to_string(r.K) +
                                     " is not realizable with l2=" + std::to_string(l2));
            }
            if (r.footprint_density < 0.0 || r.footprint_density > 1.0) {
                throw InfeasibleSpec("footprint density must lie in [0,1]");
            }
            std::mt19937_64 rng(r.seed);
            const int base = g.n1() * g.n3();
            int feet = static_cast<int>(std::llround(r.footprint_density * base));
            if (r.footprint_density > 0.0) feet = std::max(feet, 1);
            const int fiber = 1 << (l2 - r.K);
            for (int f : detail::sample_without_replacement(base, feet, rng)) {
                const int i1 = f / g.n3();
                const int i3 = f % g.n3();
                for (int i2 : detail::sample_without_replacement(g.n2(), fiber, rng)) g.set(i1, i2, i3);
            }
        }
        void operator()(const Checkerboard& c) const {
            if (c.period < 1) throw InfeasibleSpec("checkerboard period must be >= 1");
            for (int i1 = 0; i1 < g.n1(); ++i1)
                for (int i2 = 0; i2 < g.n2(); ++i2)
                    for (int i3 = 0; i3 < g.n3(); ++i3)
                        if ((i1 / c.period + i2 / c.period + i3 / c.period) % 2 == 0) g.set(i1, i2, i3);
        }
        void operator()(const FromFile& f) const {
            GridSet loaded = read_gset(f.path);
            if (!(loaded.resolution() == g.resolution())) {
                throw InfeasibleSpec("file resolution differs from the requested resolution");
            }
            g = std::move(loaded);
        }
    };
    std::visit(Visitor{g}, spec);
    return g;
}

// ---------------------------------------------------------------------------
// GSET file format: "GSET1", l1, l2, l3 (u8 each), then the occupancy bits with
// i1 slowest and i3 fastest, least-significant bit first within each byte.

inline std::vector<std::uint8_t> encode_gset(const GridSet& g) {
    const auto& r = g.resolution();
    std::vector<std::uint8_t> out{'G', 'S', 'E', 'T', '1', static_cast<std::uint8_t>(r.l1),
                                  static_cast<std::uint8_t>(r.l2), static_cast<std::uint8_t>(r.l3)};
    const std::size_t nbytes = static_cast<std::size_t>((g.cell_count() + 7) / 8);
    out.resize(8 + nbytes, 0);
    for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
        if (g.test_linear(i)) out[8 + i / 8] |= static_cast<std::uint8_t>(1U << (i % 8));
    }
    return out;
}

inline GridSet decode_gset(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || !std::equal(bytes.begin(), bytes.begin() + 5, "GSET1")) {
        throw FormatError("missing GSET1 magic");
    }
    GridSet g(Resolution{bytes[5], bytes[6], bytes[7]});
    const std::size_t nbytes = static_cast<std::size_t>((g.cell_count() + 7) / 8);
    if (bytes.size() != 8 + nbytes) {
        throw FormatError("expected " + std::to_string(8 + nbytes) + " bytes, got " +
                          std::to_string(bytes.size()));
    }
    for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
        if ((bytes[8 + i / 8] >> (i % 8)) & 1U) g.set_linear(i);
    }
    return g;
}

inline void write_gset(const GridSet& g, const std::filesystem::path& path) {
    const auto bytes = encode_gset(g);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline GridSet read_gset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_gset(bytes);
}

// ---------------------------------------------------------------------------
// Measures, fibers and projections

inline double measure(const GridSet& g) { return g.measure(); }

/// Number of occupied cells on the fiber of `axis` through (base, i3). For
/// Axis::zeta1 the base is i1 and the fiber runs over i2.
inline int fiber_count(const GridSet& g, Axis axis, int base, int i3) {
    int c = 0;
    if (axis == Axis::zeta1) {
        for (int i2 = 0; i2 < g.n2(); ++i2) c += g.test(base, i2, i3);
    } else {
        for (int i1 = 0; i1 < g.n1(); ++i1) c += g.test(i1, base, i3);
    }
    return c;
}

/// H^1 of the pi-fiber through the base point (zero outside the projection).
inline double fiber_length(const GridSet& g, Axis axis, int base, int i3) {
    const int nbase = axis == Axis::zeta1 ? g.n1() : g.n2();
    if (base < 0 || base >= nbase || i3 < 0 || i3 >= g.n3()) {
        throw PreconditionError("fiber base index out of range");
    }
    const double w = axis == Axis::zeta1 ? g.width2() : g.width1();
    return fiber_count(g, axis, base, i3) * w;
}

/// Fiber counts for every (base, i3), row-major over base.
inline std::vector<int> fiber_counts(const GridSet& g, Axis axis) {
    const int nbase = axis == Axis::zeta1 ? g.n1() : g.n2();
    std::vector<int> counts(static_cast<std::size_t>(nbase) * g.n3(), 0);
    g.for_each([&](int i1, int i2, int i3) {
        const int base = axis == Axis::zeta1 ? i1 : i2;
        ++counts[static_cast<std::size_t>(base) * g.n3() + i3];
    });
    return counts;
}

/// pi_{1,3} or pi_{2,3} image as a (zeta_i, sigma) cell set.
inline CellSet2D project(const GridSet& g, Axis axis) {
    CellSet2D out;
    out.rows = axis == Axis::zeta1 ? g.n1() : g.n2();
    out.cols = g.n3();
    out.cell_area = (axis == Axis::zeta1 ? g.width1() : g.width2()) * g.width3();
    out.bits.assign(static_cast<std::size_t>(out.rows) * out.cols, 0);
    g.for_each([&](int i1, int i2, int i3) {
        const int r = axis == Axis::zeta1 ? i1 : i2;
        out.bits[static_cast<std::size_t>(r) * out.cols + i3] = 1;
    });
    return out;
}

/// pi_1 of a projected cell set: the zeta_i cells that carry any point.
inline CellSet1D project_to_line(const CellSet2D& p, int level) {
    CellSet1D out(Domain1d::symmetric(), level);
    if (static_cast<int>(out.size()) != p.rows) throw MismatchError("projection level mismatch");
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c)
            if (p.test(r, c)) {
                out.bits[static_cast<std::size_t>(r)] = 1;
                break;
            }
    return out;
}

/// pi_1 o pi_{i,3}.
inline CellSet1D project_to_line(const GridSet& g, Axis axis) {
    return project_to_line(project(g, axis), axis == Axis::zeta1 ? g.resolution().l1 : g.resolution().l2);
}

// ---------------------------------------------------------------------------
// Constant-fiber stratification

struct Stratum {
    int K = 0;
    GridSet subset;
};

/// Splits g by the dyadic bucket 2^-K <= l < 2^(1-K) of the axis-fiber length
/// through each point. Strata are nonempty, ordered by K, and partition g.
inline std::vector<Stratum> stratify_constant_fiber(const GridSet& g, Axis axis = Axis::zeta1) {
    const auto counts = fiber_counts(g, axis);
    const int level = axis == Axis::zeta1 ? g.resolution().l2 : g.resolution().l1;
    std::map<int, GridSet> by_k;
    g.for_each([&](int i1, int i2, int i3) {
        const int base = axis == Axis::zeta1 ? i1 : i2;
        const int k = count_bucket(static_cast<std::uint64_t>(counts[static_cast<std::size_t>(base) * g.n3() + i3]),
                                   level);
        auto it = by_k.try_emplace(k, g.resolution()).first;
        it->second.set(i1, i2, i3);
    });
    std::vector<Stratum> out;
    for (auto& [k, s] : by_k) out.push_back({k, std::move(s)});
    return out;
}

/// Whether every nonempty fiber along `axis` lies in one dyadic bucket.
inline std::optional<int> constant_fiber_bucket(const GridSet& g, Axis axis = Axis::zeta1) {
    const auto strata = stratify_constant_fiber(g, axis);
    if (strata.size() != 1) return std::nullopt;
    return strata.front().K;
}

/// Bucket J with 2^-J <= |pi_{i,3}(g)| < 2^(1-J).
inline int projection_bucket(const GridSet& g, Axis axis = Axis::zeta1) {
    return dyadic_bucket(project(g, axis).measure());
}

// ---------------------------------------------------------------------------
// Restriction to dilated regions

/// Axis-aligned region in (zeta1, zeta2, sigma).
struct Region {
    double x_lo = -1.0, x_hi = 1.0;
    double y_lo = -1.0, y_hi = 1.0;
    double s_lo = 1.0, s_hi = 2.0;

    static Region whole() { return {}; }
    static Region box(const Tile& t) { return {t.x.lo(), t.x.hi(), t.y.lo(), t.y.hi(), 1.0, 2.0}; }

    /// Dilates the zeta extent about its center by `factor` and clips to the domain.
    Region dilated(double factor) const {
        Region r = *this;
        const double cx = 0.5 * (x_lo + x_hi), hx = 0.5 * (x_hi - x_lo) * factor;
        const double cy = 0.5 * (y_lo + y_hi), hy = 0.5 * (y_hi - y_lo) * factor;
        r.x_lo = std::max(-1.0, cx - hx);
        r.x_hi = std::min(1.0, cx + hx);
        r.y_lo = std::max(-1.0, cy - hy);
        r.y_hi = std::min(1.0, cy + hy);
        r.s_lo = std::max(1.0, s_lo);
        r.s_hi = std::min(2.0, s_hi);
        return r;
    }
};

namespace detail {

/// Cells [lo0 + i w, lo0 + (i+1) w) overlapping [a, b) by at least w/2.
inline std::vector<std::uint8_t> half_cell_mask(int n, double lo0, double w, double a, double b) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const double c0 = lo0 + i * w, c1 = c0 + w;
        const double overlap = std::min(b, c1) - std::max(a, c0);
        m[static_cast<std::size_t>(i)] = overlap >= 0.5 * w ? 1 : 0;
    }
    return m;
}

} // namespace detail

/// g intersected with the clipped `factor`-dilate of region. A cell belongs to
/// the dilate when it overlaps it by at least half its width along every axis.
inline GridSet restrict_to(const GridSet& g, const Region& region, double factor = 1.0) {
    const Region r = region.dilated(factor);
    const auto mx = detail::half_cell_mask(g.n1(), -1.0, g.width1(), r.x_lo, r.x_hi);
    const auto my = detail::half_cell_mask(g.n2(), -1.0, g.width2(), r.y_lo, r.y_hi);
    const auto ms = detail::half_cell_mask(g.n3(), 1.0, g.width3(), r.s_lo, r.s_hi);
    GridSet out(g.resolution());
    g.for_each([&](int i1, int i2, int i3) {
        if (mx[static_cast<std::size_t>(i1)] && my[static_cast<std::size_t>(i2)] &&
            ms[static_cast<std::size_t>(i3)])
            out.set(i1, i2, i3);
    });
    return out;
}

/// Points of g whose axis coordinate lies in an occupied cell of `line`.
inline GridSet preimage_of_line(const GridSet& g, Axis axis, const CellSet1D& line) {
    GridSet out(g.resolution());
    g.for_each([&](int i1, int i2, int i3) {
        const int c = axis == Axis::zeta1 ? i1 : i2;
        if (line.test(static_cast<std::size_t>(c))) out.set(i1, i2, i3);
    });
    return out;
}

} // namespace hypercone

#endif
