#pragma once
// Checkers for the elementary harmonic-analysis lemmas and the
// Calderon-Zygmund decomposition of subsets of Q on a dyadic grid.

#include "bilab/fields.hpp"
#include "bilab/geometry.hpp"
#include "bilab/parallel.hpp"
#include "bilab/random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilab {

// Subset of Q = [-1,1]^{n-1} made of level-L dyadic cells (side 2^{-L}).
struct OmegaSet {
    int n = 3;
    int level = 4;
    std::vector<std::uint8_t> cells;  // lexicographic over (2^{L+1})^{n-1} cells

    OmegaSet() = default;
    OmegaSet(int n_, int L) : n(n_), level(L) {
        if (n < 2) throw std::domain_error("OmegaSet: n >= 2");
        if (L < 0 || L > 12) throw std::domain_error("OmegaSet: level must lie in [0, 12]");
        cells.assign(total_cells(), 0);
    }
    int dim() const { return n - 1; }
    std::size_t per_axis() const { return std::size_t(2) << level; }
    std::size_t total_cells() const {
        std::size_t t = 1;
        for (int a = 0; a < dim(); ++a) t *= per_axis();
        return t;
    }
    double cell_measure() const { return std::ldexp(1.0, -dim() * level); }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto v : cells) c += v;
        return c;
    }
    double measure() const { return static_cast<double>(count()) * cell_measure(); }
    std::size_t linear(const std::vector<std::size_t>& k) const {
        std::size_t idx = 0;
        for (auto v : k) idx = idx * per_axis() + v;
        return idx;
    }
    bool subset_of(const OmegaSet& o) const {
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i] && !o.cells[i]) return false;
        return true;
    }

    static OmegaSet full(int n, int L) {
        OmegaSet s(n, L);
        std::fill(s.cells.begin(), s.cells.end(), 1);
        return s;
    }
    // The dyadic cube of level j (j <= L) with the given index, as a set.
    static OmegaSet cube(int n, int L, const DyadicCube& c) {
        if (c.level > L) throw std::domain_error("OmegaSet::cube: level exceeds resolution");
        OmegaSet s(n, L);
        const std::size_t f = std::size_t(1) << (L - c.level);
        for (std::size_t i = 0; i < s.cells.size(); ++i) {
            std::size_t r = i;
            bool in = true;
            for (int a = s.dim() - 1; a >= 0; --a) {
                if (r % s.per_axis() / f != static_cast<std::size_t>(c.index[a])) in = false;
                r /= s.per_axis();
            }
            s.cells[i] = in;
        }
        return s;
    }
    // Each cell kept independently with probability `density`.
    static OmegaSet random(int n, int L, double density, std::uint64_t seed) {
        OmegaSet s(n, L);
        Rng rng(seed);
        for (auto& v : s.cells) v = rng.uniform() < density;
        return s;
    }
    // Random union of dyadic blocks of mixed sizes, giving sets that are dense at several scales.
    static OmegaSet random_blocks(int n, int L, int blocks, std::uint64_t seed) {
        OmegaSet s(n, L);
        Rng rng(seed);
        for (int b = 0; b < blocks; ++b) {
            int j = static_cast<int>(rng.integer(0, L));
            DyadicCube c;
            c.level = j;
            for (int a = 0; a < s.dim(); ++a) c.index.push_back(rng.integer(0, cubes_per_axis(j) - 1));
            OmegaSet blk = cube(n, L, c);
            double keep = rng.uniform(0.3, 1.0);
            Rng inner(derive_seed(seed, static_cast<std::uint64_t>(b)));
            for (std::size_t i = 0; i < s.cells.size(); ++i)
                if (blk.cells[i] && inner.uniform() < keep) s.cells[i] = 1;
        }
        return s;
    }
};

// Number of Omega cells inside each level-j cube, lexicographic over level-j cubes.
inline std::vector<std::size_t> level_counts(const OmegaSet& s, int j) {
    if (j < 0 || j > s.level) throw std::domain_error("level_counts: level outside [0, L]");
    const std::size_t per = std::size_t(2) << j, f = std::size_t(1) << (s.level - j);
    std::size_t total = 1;
    for (int a = 0; a < s.dim(); ++a) total *= per;
    std::vector<std::size_t> out(total, 0);
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        if (!s.cells[i]) continue;
        std::size_t r = i, idx = 0, mul = 1;
        for (int a = s.dim() - 1; a >= 0; --a) {
            idx += (r % s.per_axis() / f) * mul;
            mul *= per;
            r /= s.per_axis();
        }
        out[idx] += 1;
    }
    return out;
}

inline std::size_t cells_per_cube(const OmegaSet& s, int j) { return std::size_t(1) << (s.dim() * (s.level - j)); }

// j0 with |Omega| <= 2^{-(n-1) j0}, clamped at 0.
inline int omega_j0(const OmegaSet& s) {
    const double m = s.measure();
    if (m <= 0) return 0;
    return std::max(0, static_cast<int>(std::floor(-std::log2(m) / s.dim() + 1e-12)));
}

// ---------------------------------------------------------------- quasi-orthogonality

struct FreqRect {
    std::array<int, 2> lo{}, hi{};  // half-open integer frequency ranges
};

inline bool doubled_overlap(const FreqRect& a, const FreqRect& b) {
    for (int d = 0; d < 2; ++d) {
        double ca = 0.5 * (a.lo[d] + a.hi[d]), ha = a.hi[d] - a.lo[d];
        double cb = 0.5 * (b.lo[d] + b.hi[d]), hb = b.hi[d] - b.lo[d];
        if (std::abs(ca - cb) >= ha + hb) return false;
    }
    return true;
}

// Random trigonometric polynomials f_k with frequencies in R_k (bump-weighted
// random coefficients) on the N x N torus; returns
// ||sum f_k||_p / (sum ||f_k||_p^{p*})^{1/p*}, p* = min(p, p').
inline double quasi_orthogonality_ratio(const std::vector<FreqRect>& rects, std::uint64_t seed, double p, int N = 32) {
    if (!(p >= 1)) throw std::domain_error("quasi_orthogonality_ratio: p must be >= 1");
    if (rects.empty()) throw std::invalid_argument("quasi_orthogonality_ratio: no rectangles");
    for (std::size_t a = 0; a < rects.size(); ++a) {
        for (int d = 0; d < 2; ++d)
            if (rects[a].hi[d] <= rects[a].lo[d] || rects[a].lo[d] < -N / 2 || rects[a].hi[d] > N / 2)
                throw std::domain_error("quasi_orthogonality_ratio: rectangle outside the frequency range");
        for (std::size_t b = 0; b < a; ++b)
            if (doubled_overlap(rects[a], rects[b]))
                throw std::domain_error("quasi_orthogonality_ratio: doubled rectangles overlap");
    }
    const double pstar = std::isinf(p) ? 1.0 : std::min(p, p / (p - 1 > 0 ? p - 1 : 1e-300));
    const std::size_t cells = static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
    std::vector<std::vector<cplx>> fk(rects.size(), std::vector<cplx>(cells));
    parallel_for(rects.size(), [&](std::size_t k) {
        Rng rng(derive_seed(seed, k));
        const auto& R = rects[k];
        std::vector<std::pair<std::array<int, 2>, cplx>> coef;
        for (int a = R.lo[0]; a < R.hi[0]; ++a) {
            for (int b = R.lo[1]; b < R.hi[1]; ++b) {
                double u = (a + 0.5 - 0.5 * (R.lo[0] + R.hi[0])) / (R.hi[0] - R.lo[0]);
                double v = (b + 0.5 - 0.5 * (R.lo[1] + R.hi[1])) / (R.hi[1] - R.lo[1]);
                double bump = std::cos(std::numbers::pi * u) * std::cos(std::numbers::pi * v);
                cplx c(rng.normal(), rng.normal());
                coef.push_back({{a, b}, bump * c});
            }
        }
        for (std::size_t x = 0; x < cells; ++x) {
            const double x0 = static_cast<double>(x / N), x1 = static_cast<double>(x % N);
            cplx s = 0;
            for (const auto& [f, c] : coef) s += c * std::polar(1.0, 2 * std::numbers::pi * (f[0] * x0 + f[1] * x1) / N);
            fk[k][x] = s;
        }
    });
    auto norm = [&](const std::vector<cplx>& u) {
        if (std::isinf(p)) {
            double m = 0;
            for (const auto& z : u) m = std::max(m, std::abs(z));
            return m;
        }
        PairwiseSum s;
        for (const auto& z : u) s.add(std::pow(std::abs(z), p));
        return std::pow(s.value() / static_cast<double>(cells), 1.0 / p);
    };
    std::vector<cplx> sum(cells, 0.0);
    for (const auto& f : fk)
        for (std::size_t x = 0; x < cells; ++x) sum[x] += f[x];
    PairwiseSum den;
    for (const auto& f : fk) den.add(std::pow(norm(f), pstar));
    return norm(sum) / std::pow(den.value(), 1.0 / pstar);
}

// Random rectangles with pairwise disjoint doubles in [-N/2, N/2)^2 (rejection sampling).
inline std::vector<FreqRect> random_rects(int count, std::uint64_t seed, int N = 32) {
    Rng rng(seed);
    std::vector<FreqRect> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 100000) throw std::runtime_error("random_rects: could not place rectangles");
        FreqRect r;
        for (int d = 0; d < 2; ++d) {
            int w = static_cast<int>(rng.integer(1, 3));
            r.lo[d] = static_cast<int>(rng.integer(-N / 2, N / 2 - w));
            r.hi[d] = r.lo[d] + w;
        }
        bool ok = true;
        for (const auto& o : out) ok = ok && !doubled_overlap(r, o);
        if (ok) out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------- X_r bookkeeping

struct XrBounds {
    double lhs = 0, rhs_big = 0, rhs_small = 0;
    int j0 = 0;
};

inline XrBounds xr_bounds_check(const OmegaSet& s, int j, double p, double alpha) {
    if (!(p > 0)) throw std::domain_error("xr_bounds_check: p must be positive");
    if (!(alpha >= 0 && alpha <= 1)) throw std::domain_error("xr_bounds_check: alpha must lie in [0, 1]");
    auto cnt = level_counts(s, j);
    const double cube = std::ldexp(1.0, -s.dim() * j);
    const double N = static_cast<double>(cells_per_cube(s, j));
    XrBounds r;
    PairwiseSum acc;
    for (auto c : cnt) {
        if (static_cast<double>(c) > alpha * N * (1 + 1e-12))
            throw std::domain_error("xr_bounds_check: density hypothesis |Omega cap tau| <= alpha |tau| fails");
        if (c) acc.add(std::pow(static_cast<double>(c) * s.cell_measure(), p));
    }
    r.lhs = acc.value();
    r.j0 = omega_j0(s);
    const int d = s.dim();
    const double big0 = std::ldexp(1.0, -d * r.j0);
    r.rhs_big = big0 * std::pow(std::min(alpha * cube, big0), p - 1);
    r.rhs_small = std::pow(2.0, -d * p * r.j0) * std::pow(2.0, d * (1 - p) * j);
    return r;
}

struct YoungResult {
    bool sequence = false, functions = false;
    double seq_lhs = 0, seq_rhs = 0, fn_lhs = 0, fn_rhs = 0;
};

// Rounding in the two sides is absorbed by a relative slack of 1e-12.
inline YoungResult young_check(const std::vector<double>& a, double p, const std::vector<GridFunction>& fs, double q) {
    if (!(p >= 1)) throw std::domain_error("young_check: p must be >= 1");
    if (!(q > 0 && q <= 1)) throw std::domain_error("young_check: q must lie in (0, 1]");
    YoungResult r;
    PairwiseSum sp, s1;
    double mx = 0;
    for (double v : a) {
        mx = std::max(mx, std::abs(v));
        if (!std::isinf(p)) sp.add(std::pow(std::abs(v), p));
        s1.add(std::abs(v));
    }
    r.seq_lhs = std::isinf(p) ? mx : std::pow(sp.value(), 1.0 / p);
    r.seq_rhs = s1.value();
    r.sequence = r.seq_lhs <= r.seq_rhs * (1 + 1e-12);
    if (!fs.empty()) {
        GridFunction sum = fs.front();
        for (std::size_t k = 1; k < fs.size(); ++k) {
            if (fs[k].dims != sum.dims) throw std::invalid_argument("young_check: grid shapes differ");
            for (std::size_t i = 0; i < sum.count(); ++i) sum[i] += fs[k][i];
        }
        bool zero = true;
        for (const auto& z : sum.samples) zero = zero && z == cplx(0);
        r.fn_lhs = zero ? 0.0 : lp_norm(sum, q);
        PairwiseSum s;
        for (const auto& f : fs) s.add(std::pow(lp_norm(f, q), q));
        r.fn_rhs = std::pow(s.value(), 1.0 / q);
        r.functions = r.fn_lhs <= r.fn_rhs * (1 + 1e-12);
    } else {
        r.functions = true;
    }
    return r;
}

// ---------------------------------------------------------------- Calderon-Zygmund

struct BadCube {
    DyadicCube cube;
    double trapped = 0;  // |Omega cap tau|
};

struct CZDecomposition {
    OmegaSet good;
    std::vector<BadCube> bad;
    std::map<int, double> thresholds;
    std::size_t exhausted = 0;  // cubes selected at the resolution level
};

inline double threshold_at(const std::map<int, double>& t, int j) {
    if (j < 0) return 1.0;
    auto it = t.find(j);
    if (it == t.end()) throw std::domain_error("cz_decompose: no threshold for level " + std::to_string(j));
    return it->second;
}

// Top-down maximal selection: a cube is taken at the first level where its
// density strictly exceeds alpha_j.
inline CZDecomposition cz_decompose(const OmegaSet& s, const std::map<int, double>& thresholds) {
    for (int j = 0; j <= s.level; ++j) {
        double a = threshold_at(thresholds, j);
        if (!(a > 0 && a <= 1)) throw std::domain_error("cz_decompose: thresholds must lie in (0, 1]");
    }
    CZDecomposition out;
    out.thresholds = thresholds;
    out.good = s;
    const int d = s.dim();
    std::vector<std::uint8_t> taken;  // per cube at current level: inside a selected cube
    for (int j = 0; j <= s.level; ++j) {
        auto cnt = level_counts(s, j);
        const std::size_t per = std::size_t(2) << j;
        std::vector<std::uint8_t> now(cnt.size(), 0);
        if (j > 0) {
            for (std::size_t idx = 0; idx < cnt.size(); ++idx) {
                std::size_t r = idx, pidx = 0, mul = 1;
                for (int a = d - 1; a >= 0; --a) {
                    pidx += (r % per / 2) * mul;
                    mul *= per / 2;
                    r /= per;
                }
                now[idx] = taken[pidx];
            }
        }
        const double N = static_cast<double>(cells_per_cube(s, j));
        const double alpha = threshold_at(thresholds, j);
        for (std::size_t idx = 0; idx < cnt.size(); ++idx) {
            if (now[idx] || static_cast<double>(cnt[idx]) <= alpha * N) continue;
            now[idx] = 1;
            DyadicCube c;
            c.level = j;
            std::size_t r = idx;
            c.index.assign(static_cast<std::size_t>(d), 0);
            for (int a = d - 1; a >= 0; --a) {
                c.index[a] = static_cast<long long>(r % per);
                r /= per;
            }
            out.bad.push_back({c, static_cast<double>(cnt[idx]) * s.cell_measure()});
            if (j == s.level) ++out.exhausted;
        }
        taken = std::move(now);
    }
    // remove selected cells from the good set
    for (std::size_t i = 0; i < s.cells.size(); ++i)
        if (taken[i]) out.good.cells[i] = 0;
    return out;
}

struct CZCheck {
    bool good_def = true, bad_bounds = true, disjoint = true, partition = true;
    bool ok() const { return good_def && bad_bounds && disjoint && partition; }
};

// Replays every invariant with integer cell counts; the upper factor is 2^{n-1}.
inline CZCheck verify_cz(const OmegaSet& s, const CZDecomposition& cz) {
    CZCheck r;
    const int d = s.dim();
    for (int j = 0; j <= s.level; ++j) {
        auto cnt = level_counts(cz.good, j);
        const double N = static_cast<double>(cells_per_cube(s, j));
        const double a = threshold_at(cz.thresholds, j);
        for (auto c : cnt)
            if (static_cast<double>(c) > a * N) r.good_def = false;
    }
    OmegaSet covered(s.n, s.level);
    for (const auto& b : cz.bad) {
        const int j = b.cube.level;
        const double N = static_cast<double>(cells_per_cube(s, j));
        const double cnt = b.trapped / s.cell_measure();
        const double lo = threshold_at(cz.thresholds, j) * N;
        const double hi = std::ldexp(1.0, d) * threshold_at(cz.thresholds, j - 1) * N;
        if (!(cnt > lo && cnt <= hi)) r.bad_bounds = false;
        OmegaSet c = OmegaSet::cube(s.n, s.level, b.cube);
        for (std::size_t i = 0; i < c.cells.size(); ++i) {
            if (!c.cells[i]) continue;
            if (covered.cells[i]) r.disjoint = false;
            covered.cells[i] = 1;
        }
    }
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        bool in_union = cz.good.cells[i] || (covered.cells[i] && s.cells[i]);
        if (in_union != static_cast<bool>(s.cells[i])) r.partition = false;
        if (cz.good.cells[i] && covered.cells[i]) r.partition = false;
    }
    return r;
}

// alpha_j = 2^{(-m + 2(j - j0)) / (4/r - 1)} for -m/(8/r - 4) < j - j0 < m/2, else 1.
inline std::map<int, double> alpha_thresholds(int m, double r, int j0, int max_level) {
    if (m <= 0) throw std::domain_error("alpha_thresholds: m must be positive");
    if (!(r > 0 && 4 / r > 2)) throw std::domain_error("alpha_thresholds: needs 4/r > 2");
    std::map<int, double> t;
    for (int j = 0; j <= max_level; ++j) {
        const double off = j - j0;
        const bool inside = -m / (8 / r - 4) < off && off < m / 2.0;
        t[j] = inside ? std::pow(2.0, (-m + 2 * off) / (4 / r - 1)) : 1.0;
    }
    return t;
}

struct XrNorm {
    double value = 0;      // (sum over levels 0..L)^{1/4}
    double tail = 0;       // exact contribution of levels > L to value^4
    double total() const { return std::pow(std::pow(value, 4) + tail, 0.25); }
    std::vector<double> level_terms;  // 2^{-4j} sum_k density^{4/r}
};

// (sum_j sum_k 2^{-4j} (|Omega cap tau^j_k| / |tau^j_k|)^{4/r})^{1/4}, n = 3.
inline XrNorm xr_norm(const OmegaSet& s, double r) {
    if (s.n != 3) throw std::domain_error("xr_norm: defined for n = 3 only");
    if (!(r > 0)) throw std::domain_error("xr_norm: r must be positive");
    XrNorm out;
    PairwiseSum total;
    for (int j = 0; j <= s.level; ++j) {
        auto cnt = level_counts(s, j);
        const double N = static_cast<double>(cells_per_cube(s, j));
        PairwiseSum lv;
        for (auto c : cnt)
            if (c) lv.add(std::pow(static_cast<double>(c) / N, 4 / r));
        double term = std::ldexp(lv.value(), -4 * j);
        out.level_terms.push_back(term);
        total.add(term);
    }
    out.value = std::pow(total.value(), 0.25);
    // below the resolution every cube is full or empty: sum_k density^{4/r} = |Omega| 4^j
    out.tail = s.measure() * std::ldexp(1.0, -2 * (s.level + 1)) * 4.0 / 3.0;
    return out;
}

}  // namespace bilab
