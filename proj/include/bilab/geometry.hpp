#pragma once
// Dyadic cubes, Whitney close pairs, elliptic phases, delta-nets and tubes.

#include "bilab/parallel.hpp"
#include "bilab/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilab {

using Vec = std::vector<double>;

// ---------------------------------------------------------------- dyadic cubes

struct DyadicCube {
    int level = 0;
    std::vector<long long> index;  // per axis, in [0, 2^(level+1))

    double side() const { return std::ldexp(1.0, -level); }
    double lower(std::size_t d) const { return -1.0 + static_cast<double>(index[d]) * side(); }
    double upper(std::size_t d) const { return lower(d) + side(); }
    std::size_t dim() const { return index.size(); }

    DyadicCube parent() const {
        if (level == 0) throw std::domain_error("level-0 cube has no parent");
        DyadicCube p{level - 1, index};
        for (auto& k : p.index) k >>= 1;
        return p;
    }
    bool contains(const Vec& x) const {
        for (std::size_t d = 0; d < dim(); ++d)
            if (x[d] < lower(d) || x[d] > upper(d)) return false;
        return true;
    }
    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
    friend auto operator<=>(const DyadicCube& a, const DyadicCube& b) {
        if (a.level != b.level) return a.level <=> b.level;
        return a.index <=> b.index;
    }
};

inline long long cubes_per_axis(int level) { return 2LL << level; }

// All cubes of sidelength 2^-j in [-1,1]^(n-1), lexicographic in the index.
inline std::vector<DyadicCube> dyadic_cubes(int n, int j) {
    if (j < 0) throw std::domain_error("dyadic_cubes: negative level");
    const std::size_t d = static_cast<std::size_t>(n - 1);
    const long long m = cubes_per_axis(j);
    std::vector<DyadicCube> out;
    std::vector<long long> k(d, 0);
    while (true) {
        out.push_back({j, k});
        std::size_t a = d;
        while (a > 0) {
            --a;
            if (++k[a] < m) break;
            k[a] = 0;
            if (a == 0) return out;
        }
        if (d == 0) return out;
    }
}

// Closures intersect (a cube is adjacent to itself). Same-level cubes only.
inline bool adjacent(const DyadicCube& a, const DyadicCube& b) {
    if (a.level != b.level || a.dim() != b.dim()) throw std::invalid_argument("adjacent: level mismatch");
    for (std::size_t d = 0; d < a.dim(); ++d)
        if (std::llabs(a.index[d] - b.index[d]) > 1) return false;
    return true;
}

inline bool close(const DyadicCube& a, const DyadicCube& b) {
    if (a.level < 1) return false;
    return !adjacent(a, b) && adjacent(a.parent(), b.parent());
}

inline std::vector<std::pair<DyadicCube, DyadicCube>> close_pairs(int n, int j) {
    if (j < 1) throw std::domain_error("close_pairs: level must be >= 1");
    const std::size_t d = static_cast<std::size_t>(n - 1);
    const long long m = cubes_per_axis(j);
    std::vector<std::pair<DyadicCube, DyadicCube>> out;
    for (const auto& a : dyadic_cubes(n, j)) {
        // partners differ by at most 3 per axis (parents adjacent)
        std::vector<long long> off(d, -3);
        while (true) {
            DyadicCube b{j, a.index};
            bool ok = true;
            for (std::size_t t = 0; t < d; ++t) {
                b.index[t] += off[t];
                if (b.index[t] < 0 || b.index[t] >= m) ok = false;
            }
            if (ok && close(a, b)) out.emplace_back(a, b);
            std::size_t t = d;
            bool done = true;
            while (t > 0) {
                --t;
                if (++off[t] <= 3) {
                    done = false;
                    break;
                }
                off[t] = -3;
            }
            if (done) break;
        }
    }
    return out;
}

inline DyadicCube cube_containing(const Vec& x, int level) {
    DyadicCube c{level, std::vector<long long>(x.size())};
    const long long m = cubes_per_axis(level);
    for (std::size_t d = 0; d < x.size(); ++d) {
        auto k = static_cast<long long>(std::floor((x[d] + 1.0) * std::ldexp(1.0, level)));
        c.index[d] = std::clamp(k, 0LL, m - 1);
    }
    return c;
}

struct WhitneyError : std::runtime_error {
    enum class Kind { depth_exceeded, degenerate, outside, equal_points };
    Kind kind;
    WhitneyError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct WhitneyPair {
    int level;
    DyadicCube cx, cy;
};

// The unique close pair (cx, cy) with x in cx and y in cy.
inline WhitneyPair whitney_locate(const Vec& x, const Vec& y, int max_level) {
    if (x.size() != y.size()) throw std::invalid_argument("whitney_locate: dimension mismatch");
    if (x == y) throw WhitneyError(WhitneyError::Kind::equal_points, "whitney_locate: x == y");
    for (const Vec* v : {&x, &y}) {
        for (double c : *v) {
            if (!(c > -1.0 && c < 1.0)) throw WhitneyError(WhitneyError::Kind::outside, "whitney_locate: point outside Q");
            double s = (c + 1.0) * std::ldexp(1.0, max_level);
            if (s == std::floor(s)) throw WhitneyError(WhitneyError::Kind::degenerate, "whitney_locate: point on a dyadic hyperplane");
        }
    }
    for (int j = 1; j <= max_level; ++j) {
        DyadicCube a = cube_containing(x, j), b = cube_containing(y, j);
        if (!adjacent(a, b)) return {j, a, b};
    }
    throw WhitneyError(WhitneyError::Kind::depth_exceeded, "whitney_locate: depth exceeded at level " + std::to_string(max_level));
}

// ---------------------------------------------------------------- phases

struct AxisTerm {
    std::function<double(double)> f, df;
};

struct EllipticPhase {
    int dim = 2;  // n - 1
    double bound_A = 4.0;
    int smoothness_N = 8;
    double eps0 = 0.0;
    double domain_half = 2.0;  // evaluator defined on [-domain_half, domain_half]^dim
    std::string name = "phase";
    std::function<double(const double*)> value_fn;
    std::vector<AxisTerm> axes;  // nonempty: value = sum_k axes[k].f(y_k)

    bool separable() const { return !axes.empty(); }

    double operator()(const double* y) const {
        if (separable()) {
            double s = 0;
            for (int k = 0; k < dim; ++k) s += axes[k].f(y[k]);
            return s;
        }
        return value_fn(y);
    }
    double operator()(const Vec& y) const { return (*this)(y.data()); }

    bool in_domain(const double* y) const {
        for (int k = 0; k < dim; ++k)
            if (!(std::abs(y[k]) <= domain_half)) return false;
        return true;
    }

    void gradient(const double* y, double* g) const {
        if (separable()) {
            for (int k = 0; k < dim; ++k) g[k] = axes[k].df(y[k]);
            return;
        }
        const double h = 1e-6;
        std::vector<double> t(y, y + dim);
        for (int k = 0; k < dim; ++k) {
            double s = t[k];
            t[k] = s + h;
            double a = value_fn(t.data());
            t[k] = s - h;
            double b = value_fn(t.data());
            t[k] = s;
            g[k] = (a - b) / (2 * h);
        }
    }
    Vec gradient(const Vec& y) const {
        Vec g(dim);
        gradient(y.data(), g.data());
        return g;
    }

    // Central second differences from values.
    Eigen::MatrixXd hessian(const double* y, double h = 1e-3) const {
        Eigen::MatrixXd H(dim, dim);
        std::vector<double> t(y, y + dim);
        const double f0 = (*this)(t.data());
        for (int a = 0; a < dim; ++a) {
            for (int b = a; b < dim; ++b) {
                double v;
                if (a == b) {
                    double s = t[a];
                    t[a] = s + h;
                    double fp = (*this)(t.data());
                    t[a] = s - h;
                    double fm = (*this)(t.data());
                    t[a] = s;
                    v = (fp - 2 * f0 + fm) / (h * h);
                } else {
                    double sa = t[a], sb = t[b];
                    auto at = [&](double da, double db) {
                        t[a] = sa + da;
                        t[b] = sb + db;
                        double r = (*this)(t.data());
                        t[a] = sa;
                        t[b] = sb;
                        return r;
                    };
                    v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
                }
                H(a, b) = H(b, a) = v;
            }
        }
        return H;
    }

    // Per-axis bound on |d_k Phi| over a box, by sampling (corners included).
    Vec axis_grad_bound(const Vec& lo, const Vec& hi) const {
        Vec out(dim, 0.0);
        if (separable()) {
            for (int k = 0; k < dim; ++k) {
                const int m = 64;
                for (int s = 0; s <= m; ++s) {
                    double t = lo[k] + (hi[k] - lo[k]) * s / m;
                    out[k] = std::max(out[k], std::abs(axes[k].df(t)));
                }
            }
            return out;
        }
        const int m = 8;
        std::vector<int> c(dim, 0);
        Vec y(dim), g(dim);
        while (true) {
            for (int k = 0; k < dim; ++k) y[k] = lo[k] + (hi[k] - lo[k]) * c[k] / m;
            gradient(y.data(), g.data());
            for (int k = 0; k < dim; ++k) out[k] = std::max(out[k], std::abs(g[k]));
            int k = dim;
            bool done = true;
            while (k > 0) {
                --k;
                if (++c[k] <= m) {
                    done = false;
                    break;
                }
                c[k] = 0;
            }
            if (done) break;
        }
        // sampling margin for the non-separable case
        for (auto& v : out) v = v * 1.05 + 1e-12;
        return out;
    }
};

inline EllipticPhase make_quadratic_phase(int dim) {
    EllipticPhase p;
    p.dim = dim;
    p.eps0 = 0.0;
    p.bound_A = 1.0;
    p.name = "quadratic";
    p.axes.assign(static_cast<std::size_t>(dim), AxisTerm{[](double t) { return 0.5 * t * t; }, [](double t) { return t; }});
    return p;
}

// |x|^2/2 + eps0 * psi with psi(0) = 0, grad psi(0) = 0 and |Hess psi| <= 1.
inline EllipticPhase make_perturbed_phase(int dim, double eps0) {
    if (!(eps0 > 0 && eps0 < 0.5)) throw std::domain_error("perturbed phase needs eps0 in (0, 1/2)");
    Vec a(dim), b(dim);
    for (int k = 0; k < dim; ++k) {
        a[k] = std::ldexp(1.0, -k);
        b[k] = (k % 2 == 0 ? 0.3 : -0.2) / (1 + k / 2);
    }
    double a2 = 0, b2 = 0;
    for (int k = 0; k < dim; ++k) {
        a2 += a[k] * a[k];
        b2 += b[k] * b[k];
    }
    const double scale = a2 + 0.25 * 2.0;
    const double eb = std::exp(-b2);
    EllipticPhase p;
    p.dim = dim;
    p.eps0 = eps0;
    p.bound_A = 1.0 + eps0 * 4.0;
    p.name = "perturbed";
    p.value_fn = [=](const double* x) {
        double ax = 0, q = 0, bx = 0, r2 = 0;
        for (int k = 0; k < dim; ++k) {
            ax += a[k] * x[k];
            q += x[k] * x[k];
            bx += b[k] * x[k];
            double z = x[k] - b[k];
            r2 += z * z;
        }
        double psi = (1.0 - std::cos(ax)) + 0.25 * (std::exp(-r2) - eb * (1.0 + 2.0 * bx));
        return 0.5 * q + eps0 * psi / scale;
    };
    return p;
}

struct EllipticReport {
    double phi0 = 0, grad0 = 0, min_eig = 0, max_eig = 0;
    bool ok = false;
};

// Samples the Hessian band on a grid over Q and checks the normalization at 0.
inline EllipticReport check_elliptic(const EllipticPhase& phi, int samples_per_axis = 7, double tol = 1e-6) {
    EllipticReport r;
    Vec zero(phi.dim, 0.0);
    r.phi0 = phi(zero);
    Vec g = phi.gradient(zero);
    for (double v : g) r.grad0 = std::max(r.grad0, std::abs(v));
    r.min_eig = 1e300;
    r.max_eig = -1e300;
    std::vector<int> c(phi.dim, 0);
    Vec y(phi.dim);
    const int m = samples_per_axis - 1;
    while (true) {
        for (int k = 0; k < phi.dim; ++k) y[k] = -1.0 + 2.0 * c[k] / m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(phi.hessian(y.data()));
        r.min_eig = std::min(r.min_eig, es.eigenvalues().minCoeff());
        r.max_eig = std::max(r.max_eig, es.eigenvalues().maxCoeff());
        int k = phi.dim;
        bool done = true;
        while (k > 0) {
            --k;
            if (++c[k] <= m) {
                done = false;
                break;
            }
            c[k] = 0;
        }
        if (done) break;
    }
    r.ok = std::abs(r.phi0) <= tol && r.grad0 <= tol && r.min_eig >= 1 - phi.eps0 - tol &&
           r.max_eig <= 1 + phi.eps0 + tol;
    return r;
}

// Phi~(x) = 2^{2j} Phi_c(2^{-j} x), Phi_c(z) = Phi(c+z) - Phi(c) - grad Phi(c).z
inline EllipticPhase parabolic_rescale(const EllipticPhase& phi, int j, const Vec& center) {
    if (j < 0 || j > 26) throw std::domain_error("parabolic_rescale: level out of numerical range");
    if (static_cast<int>(center.size()) != phi.dim) throw std::invalid_argument("parabolic_rescale: center dimension");
    for (double c : center)
        if (std::abs(c) > 1.0) throw std::domain_error("parabolic_rescale: center outside Q");
    const double s = std::ldexp(1.0, -j);
    // rescaled domain Q maps to center + 2^-j Q, which must stay in the evaluator's domain
    for (double c : center)
        if (std::abs(c) + s > phi.domain_half) throw std::domain_error("parabolic_rescale: rescaled domain escapes the phase domain");
    EllipticPhase out = phi;
    out.name = phi.name + "~j" + std::to_string(j);
    out.domain_half = 1.0;
    const double s2 = std::ldexp(1.0, 2 * j);
    if (phi.separable()) {
        out.axes.clear();
        for (int k = 0; k < phi.dim; ++k) {
            auto f = phi.axes[k].f, df = phi.axes[k].df;
            const double c = center[k], fc = f(c), dfc = df(c), sj = std::ldexp(1.0, j);
            out.axes.push_back({[=](double t) { return s2 * (f(c + s * t) - fc - dfc * s * t); },
                                [=](double t) { return sj * (df(c + s * t) - dfc); }});
        }
        return out;
    }
    const Vec g = phi.gradient(center);
    const double fc = phi(center);
    auto base = phi.value_fn;
    const int dim = phi.dim;
    out.value_fn = [=](const double* x) {
        std::vector<double> y(dim);
        double lin = 0;
        for (int k = 0; k < dim; ++k) {
            y[k] = center[k] + s * x[k];
            lin += g[k] * s * x[k];
        }
        return s2 * (base(y.data()) - fc - lin);
    };
    return out;
}

// ---------------------------------------------------------------- nets and tubes

inline double unit_ball_volume(int k) {
    return std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

// Lattice delta Z^{n-1} intersected with Q, lexicographic order.
struct DirectionNet {
    int n = 3;
    double delta = 0.125;
    long long half = 8;  // coordinates k*delta with |k| <= half
    double separation = 0.5;
    std::vector<std::size_t> E1, E2;

    int dim() const { return n - 1; }
    long long per_axis() const { return 2 * half + 1; }
    std::size_t size() const {
        std::size_t s = 1;
        for (int d = 0; d < dim(); ++d) s *= static_cast<std::size_t>(per_axis());
        return s;
    }
    std::vector<long long> multi(std::size_t idx) const {
        std::vector<long long> k(dim());
        for (int d = dim() - 1; d >= 0; --d) {
            k[d] = static_cast<long long>(idx % static_cast<std::size_t>(per_axis())) - half;
            idx /= static_cast<std::size_t>(per_axis());
        }
        return k;
    }
    std::optional<std::size_t> index_of(const std::vector<long long>& k) const {
        std::size_t idx = 0;
        for (int d = 0; d < dim(); ++d) {
            if (k[d] < -half || k[d] > half) return std::nullopt;
            idx = idx * static_cast<std::size_t>(per_axis()) + static_cast<std::size_t>(k[d] + half);
        }
        return idx;
    }
    Vec point(std::size_t idx) const {
        auto k = multi(idx);
        Vec p(dim());
        for (int d = 0; d < dim(); ++d) p[d] = static_cast<double>(k[d]) * delta;
        return p;
    }
    // Nearest net point (coordinates clamped into Q).
    std::size_t nearest(const Vec& x) const {
        std::vector<long long> k(dim());
        for (int d = 0; d < dim(); ++d)
            k[d] = std::clamp(static_cast<long long>(std::llround(x[d] / delta)), -half, half);
        return *index_of(k);
    }
    bool in_E1(std::size_t idx) const { return std::binary_search(E1.begin(), E1.end(), idx); }
    bool in_E2(std::size_t idx) const { return std::binary_search(E2.begin(), E2.end(), idx); }
};

// Half-open sub-cube [c - 1/4, c + 1/4) per axis, c = -+(sep/2 + 1/4) e1.
inline bool in_subcube(const Vec& p, int which, double separation) {
    const double c1 = (which == 1 ? -1.0 : 1.0) * (separation / 2 + 0.25);
    for (std::size_t d = 0; d < p.size(); ++d) {
        double c = d == 0 ? c1 : 0.0;
        // a small guard keeps lattice points that sit exactly on the lower face
        if (!(p[d] >= c - 0.25 - 1e-12 && p[d] < c + 0.25 - 1e-12)) return false;
    }
    return true;
}

inline DirectionNet build_net(int n, double delta, double separation = 0.5) {
    if (n < 2) throw std::domain_error("build_net: n >= 2");
    if (!(delta > 0 && delta <= 0.25)) throw std::domain_error("build_net: delta must lie in (0, 1/4]");
    if (!(separation > 0 && separation <= 1)) throw std::domain_error("build_net: separation must lie in (0, 1]");
    DirectionNet net;
    net.n = n;
    net.delta = delta;
    net.separation = separation;
    net.half = static_cast<long long>(std::floor(1.0 / delta + 1e-9));
    for (std::size_t i = 0; i < net.size(); ++i) {
        Vec p = net.point(i);
        if (in_subcube(p, 1, separation)) net.E1.push_back(i);
        if (in_subcube(p, 2, separation)) net.E2.push_back(i);
    }
    if (net.E1.empty() || net.E2.empty()) throw std::domain_error("build_net: delta too large to populate E1 and E2");
    return net;
}

struct Tube {
    Vec omega, base;
    double delta = 0.125;

    int n() const { return static_cast<int>(omega.size()) + 1; }
    bool contains(const double* x) const {
        const std::size_t d = omega.size();
        const double xn = x[d];
        if (std::abs(xn) > 1.0) return false;
        double r2 = 0;
        for (std::size_t k = 0; k < d; ++k) {
            double z = x[k] - xn * omega[k] - base[k];
            r2 += z * z;
        }
        return r2 <= delta * delta;
    }
};

inline Tube net_tube(const DirectionNet& net, std::size_t w, std::size_t i) {
    return {net.point(w), net.point(i), net.delta};
}

inline double tube_volume(int n, double delta) {
    return 2.0 * unit_ball_volume(n - 1) * std::pow(delta, n - 1);
}
inline double tube_volume(const Tube& t) { return tube_volume(t.n(), t.delta); }

// Heights t in [-1,1] where the tube axes are within 2 delta of each other.
inline std::optional<std::pair<double, double>> axis_window(const Tube& a, const Tube& b) {
    const std::size_t d = a.omega.size();
    double A = 0, B = 0, C = 0;
    for (std::size_t k = 0; k < d; ++k) {
        double p = a.base[k] - b.base[k], q = a.omega[k] - b.omega[k];
        A += q * q;
        B += p * q;
        C += p * p;
    }
    const double r2 = 4.0 * a.delta * a.delta;
    double lo, hi;
    if (A == 0.0) {
        if (C > r2) return std::nullopt;
        lo = -1.0;
        hi = 1.0;
    } else {
        double disc = B * B - A * (C - r2);
        if (disc < 0) return std::nullopt;
        double s = std::sqrt(disc);
        lo = (-B - s) / A;
        hi = (-B + s) / A;
    }
    lo = std::max(lo, -1.0);
    hi = std::min(hi, 1.0);
    if (hi <= lo) return std::nullopt;
    return std::make_pair(lo, hi);
}

// Exact area of the intersection of two planar strips (n = 2) by convex clipping.
inline double tube_intersection_exact_2d(const Tube& a, const Tube& b) {
    if (a.omega.size() != 1) throw std::invalid_argument("exact strip intersection needs n = 2");
    using P = std::array<double, 2>;  // (y1, y2)
    auto para = [](const Tube& t) {
        double w = t.omega[0], i = t.base[0], dl = t.delta;
        return std::vector<P>{{i - w - dl, -1}, {i - w + dl, -1}, {i + w + dl, 1}, {i + w - dl, 1}};
    };
    std::vector<P> poly = para(a);
    // clip by the two slanted edges of b: |y1 - y2 w - i| <= delta (|y2| <= 1 already holds)
    auto clip = [](const std::vector<P>& in, double s, double w, double c) {
        // keep s*(y1 - y2 w) <= c
        std::vector<P> out;
        auto val = [&](const P& p) { return c - s * (p[0] - p[1] * w); };
        for (std::size_t k = 0; k < in.size(); ++k) {
            const P& p = in[k];
            const P& q = in[(k + 1) % in.size()];
            double vp = val(p), vq = val(q);
            if (vp >= 0) out.push_back(p);
            if ((vp >= 0) != (vq >= 0)) {
                double t = vp / (vp - vq);
                out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
            }
        }
        return out;
    };
    const double w = b.omega[0], i = b.base[0], dl = b.delta;
    poly = clip(poly, 1.0, w, i + dl);
    if (poly.size() >= 3) poly = clip(poly, -1.0, w, -(i - dl));
    if (poly.size() < 3) return 0.0;
    double area = 0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const P& p = poly[k];
        const P& q = poly[(k + 1) % poly.size()];
        area += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(area) / 2;
}

struct VolumeEstimate {
    double estimate = 0, stderr_ = 0;
    std::optional<double> exact;  // n = 2 only
};

// Monte Carlo |T1 cap T2|: uniform samples in the part of T1 over the height
// window where the axes are within 2 delta (outside it the tubes are disjoint).
inline VolumeEstimate tube_intersection_volume(const Tube& a, const Tube& b, long long mc_samples, std::uint64_t seed) {
    if (mc_samples < 1000) throw std::invalid_argument("tube_intersection_volume: needs at least 1000 samples");
    if (a.omega.size() != b.omega.size()) throw std::invalid_argument("tube_intersection_volume: dimension mismatch");
    if (a.delta != b.delta) throw std::invalid_argument("tube_intersection_volume: delta mismatch");
    VolumeEstimate out;
    const std::size_t d = a.omega.size();
    if (d == 1) out.exact = tube_intersection_exact_2d(a, b);
    auto win = axis_window(a, b);
    if (!win) return out;
    const double t0 = win->first, t1 = win->second;
    const double region = (t1 - t0) * unit_ball_volume(static_cast<int>(d)) * std::pow(a.delta, static_cast<double>(d));
    constexpr int kShards = 8;
    std::array<long long, kShards> hits{};
    std::array<long long, kShards> counts{};
    for (int s = 0; s < kShards; ++s) counts[s] = mc_samples / kShards + (s < mc_samples % kShards ? 1 : 0);
    parallel_for(kShards, [&](std::size_t s) {
        Rng rng(derive_seed(seed, s));
        std::vector<double> x(d + 1), u(d);
        long long h = 0;
        for (long long k = 0; k < counts[s]; ++k) {
            double r2;
            do {
                r2 = 0;
                for (std::size_t c = 0; c < d; ++c) {
                    u[c] = rng.uniform(-1.0, 1.0);
                    r2 += u[c] * u[c];
                }
            } while (r2 > 1.0);
            double t = rng.uniform(t0, t1);
            for (std::size_t c = 0; c < d; ++c) x[c] = a.base[c] + t * a.omega[c] + a.delta * u[c];
            x[d] = t;
            if (b.contains(x.data())) ++h;
        }
        hits[s] = h;
    });
    long long H = 0;
    for (auto h : hits) H += h;
    const double f = static_cast<double>(H) / static_cast<double>(mc_samples);
    out.estimate = region * f;
    out.stderr_ = region * std::sqrt(f * (1 - f) / static_cast<double>(mc_samples));
    return out;
}

}  // namespace bilab
