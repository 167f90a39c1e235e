#pragma once
// Test-side reference computations. Nothing here calls into the library code it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// Small exact fraction on 64-bit integers, independent of the library's big rationals.
struct Frac {
    long long n = 0, d = 1;
    Frac(long long a = 0, long long b = 1) : n(a), d(b) {
        if (d == 0) throw std::domain_error("Frac: zero denominator");
        if (d < 0) n = -n, d = -d;
        long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) n /= g, d /= g;
    }
    friend Frac operator+(Frac a, Frac b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
    friend Frac operator-(Frac a, Frac b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
    friend Frac operator*(Frac a, Frac b) { return {a.n * b.n, a.d * b.d}; }
    friend Frac operator/(Frac a, Frac b) { return {a.n * b.d, a.d * b.n}; }
    friend bool operator==(Frac a, Frac b) { return a.n == b.n && a.d == b.d; }
    friend bool operator<(Frac a, Frac b) { return a.n * b.d < b.n * a.d; }
    friend bool operator<=(Frac a, Frac b) { return !(b < a); }
    double value() const { return static_cast<double>(n) / static_cast<double>(d); }
};

// Line a x + b y = c; intersections of all pairs of boundary lines that satisfy every
// constraint, deduplicated. Brute-force vertex enumeration of a convex polygon.
struct Line {
    Frac a, b, c;
};

inline std::vector<std::pair<Frac, Frac>> feasible_vertices(const std::vector<Line>& lines) {
    std::vector<std::pair<Frac, Frac>> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const Line &L1 = lines[i], &L2 = lines[j];
            Frac det = L1.a * L2.b - L1.b * L2.a;
            if (det == Frac(0)) continue;
            Frac x = (L1.c * L2.b - L1.b * L2.c) / det;
            Frac y = (L1.a * L2.c - L1.c * L2.a) / det;
            bool ok = true;
            for (const auto& L : lines) ok = ok && (L.a * x + L.b * y <= L.c);
            if (ok && std::find(out.begin(), out.end(), std::make_pair(x, y)) == out.end()) out.emplace_back(x, y);
        }
    }
    return out;
}

// Closed intervals [lo, hi] per axis; adjacency as geometric closure intersection.
inline bool boxes_touch(const std::vector<double>& lo1, const std::vector<double>& hi1, const std::vector<double>& lo2,
                        const std::vector<double>& hi2) {
    for (std::size_t k = 0; k < lo1.size(); ++k)
        if (hi1[k] < lo2[k] || hi2[k] < lo1[k]) return false;
    return true;
}

// Monte Carlo |T1 cap T2| from uniform samples in the bounding box of T1.
struct Tube {
    std::vector<double> omega, base;
    double delta;
    bool contains(const std::vector<double>& x) const {
        const std::size_t d = omega.size();
        if (std::abs(x[d]) > 1) return false;
        double r2 = 0;
        for (std::size_t k = 0; k < d; ++k) {
            double z = x[k] - x[d] * omega[k] - base[k];
            r2 += z * z;
        }
        return r2 <= delta * delta;
    }
};

inline std::pair<double, double> bbox_mc_intersection(const Tube& a, const Tube& b, long long samples, std::uint64_t seed) {
    const std::size_t d = a.omega.size();
    std::vector<double> lo(d + 1), hi(d + 1);
    for (std::size_t k = 0; k < d; ++k) {
        lo[k] = a.base[k] - std::abs(a.omega[k]) - a.delta;
        hi[k] = a.base[k] + std::abs(a.omega[k]) + a.delta;
    }
    lo[d] = -1;
    hi[d] = 1;
    double vol = 1;
    for (std::size_t k = 0; k <= d; ++k) vol *= hi[k] - lo[k];
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<double> x(d + 1);
    long long hits = 0;
    for (long long s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k <= d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * U(eng);
        if (a.contains(x) && b.contains(x)) ++hits;
    }
    double f = static_cast<double>(hits) / static_cast<double>(samples);
    return {vol * f, vol * std::sqrt(f * (1 - f) / static_cast<double>(samples))};
}

// Plain midpoint sum of the extension integral with phase x.y + x_n |y|^2/2,
// density 1 on a box (no separable shortcuts).
inline std::complex<double> extension_quadratic(const std::vector<double>& lo, const std::vector<double>& hi,
                                                const std::vector<double>& x, int cells) {
    const std::size_t d = lo.size();
    const double twopi = 6.283185307179586;
    std::vector<int> k(d, 0);
    std::complex<double> s = 0;
    double cell = 1;
    for (std::size_t a = 0; a < d; ++a) cell *= (hi[a] - lo[a]) / cells;
    while (true) {
        double arg = 0, r2 = 0;
        for (std::size_t a = 0; a < d; ++a) {
            double y = lo[a] + (hi[a] - lo[a]) * (k[a] + 0.5) / cells;
            arg += x[a] * y;
            r2 += y * y;
        }
        arg += x[d] * 0.5 * r2;
        s += std::polar(1.0, -twopi * arg);
        std::size_t a = d;
        bool done = true;
        while (a > 0) {
            --a;
            if (++k[a] < cells) {
                done = false;
                break;
            }
            k[a] = 0;
        }
        if (done) break;
    }
    return s * cell;
}

// Least-squares slope of log2 v against log2 s.
inline double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double mx = 0, my = 0;
    for (auto [s, v] : pts) mx += std::log2(s), my += std::log2(v);
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0;
    for (auto [s, v] : pts) {
        sxx += (std::log2(s) - mx) * (std::log2(s) - mx);
        sxy += (std::log2(s) - mx) * (std::log2(v) - my);
    }
    return sxy / sxx;
}

// Hand-rolled property generator.
struct Gen {
    std::mt19937_64 eng;
    explicit Gen(std::uint64_t seed) : eng(seed) {}
    double real(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
    long long integer(long long a, long long b) { return std::uniform_int_distribution<long long>(a, b)(eng); }
    Frac frac(long long max_num, long long max_den) {
        long long d = integer(1, max_den);
        return {integer(-max_num, max_num), d};
    }
    Frac positive_frac(long long max_num, long long max_den) { return {integer(1, max_num), integer(1, max_den)}; }
};

}  // namespace oracle
