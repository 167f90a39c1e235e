#pragma once
// The extension operator R*f(x, x_n) = int_Q exp(-2 pi i (x.y + x_n Phi(y))) f(y) dy
// by midpoint quadrature, plus localized ratios and the annulus form.

#include "bilab/errors.hpp"
#include "bilab/fields.hpp"
#include "bilab/geometry.hpp"
#include "bilab/parallel.hpp"
#include "bilab/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilab {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CapFunction {
    Vec lo, hi;                                             // support box inside Q
    std::function<cplx(const double*)> density;             // general density, optional
    std::vector<std::function<cplx(double)>> axis_density;  // product density, optional
    Vec modulation;                                         // x0 in R^n: multiplies by exp(-2 pi i x0.(y, Phi(y)))
    cplx amplitude = 1.0;

    static CapFunction indicator(Vec lo, Vec hi) {
        CapFunction f;
        f.lo = std::move(lo);
        f.hi = std::move(hi);
        return f;
    }
    int dim() const { return static_cast<int>(lo.size()); }
    bool separable() const { return !density; }

    // Density without the modulation factor.
    cplx base(const double* y) const {
        cplx v = amplitude;
        if (density) return v * density(y);
        for (std::size_t k = 0; k < axis_density.size(); ++k)
            if (axis_density[k]) v *= axis_density[k](y[k]);
        return v;
    }
    cplx axis_base(int k, double t) const {
        if (static_cast<std::size_t>(k) < axis_density.size() && axis_density[k]) return axis_density[k](t);
        return 1.0;
    }
    double x0(int k) const { return modulation.empty() ? 0.0 : modulation[k]; }

    void validate() const {
        if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("CapFunction: bad support box");
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (!(lo[k] < hi[k]) || lo[k] < -1.0 - 1e-12 || hi[k] > 1.0 + 1e-12)
                throw std::domain_error("CapFunction: support must be a nondegenerate sub-box of Q");
        if (!modulation.empty() && modulation.size() != lo.size() + 1)
            throw std::invalid_argument("CapFunction: modulation must live in R^n");
    }
};

// Unit-modulus random phases, constant on `cells` equal pieces of each axis.
inline CapFunction random_phase_cap(Vec lo, Vec hi, int cells, std::uint64_t seed) {
    CapFunction f = CapFunction::indicator(std::move(lo), std::move(hi));
    for (int k = 0; k < f.dim(); ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        std::vector<cplx> ph(static_cast<std::size_t>(cells));
        for (auto& z : ph) z = std::polar(1.0, kTwoPi * rng.uniform());
        const double a = f.lo[k], w = (f.hi[k] - f.lo[k]) / cells;
        f.axis_density.push_back([ph, a, w, cells](double t) {
            auto c = static_cast<long long>(std::floor((t - a) / w));
            return ph[static_cast<std::size_t>(std::clamp<long long>(c, 0, cells - 1))];
        });
    }
    return f;
}

// Continuous per-axis cell counts needed for h_k (|xi_k| + |xi_n| max|d_k Phi|) <= 1/4,
// where xi ranges over the evaluation points shifted by the modulation.
inline Vec guard_need(const CapFunction& f, const EllipticPhase& phi, const Vec& xi_abs_max) {
    Vec G = phi.axis_grad_bound(f.lo, f.hi);
    const int d = f.dim();
    Vec out(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) out[k] = 4.0 * (f.hi[k] - f.lo[k]) * (xi_abs_max[k] + xi_abs_max[d] * G[k]);
    return out;
}

inline std::vector<std::size_t> required_counts(const CapFunction& f, const EllipticPhase& phi, const Vec& xi_abs_max) {
    Vec need = guard_need(f, phi, xi_abs_max);
    std::vector<std::size_t> out(need.size());
    for (std::size_t k = 0; k < need.size(); ++k)
        out[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(need[k] - 1e-9)));
    return out;
}

inline void check_guard(const CapFunction& f, const EllipticPhase& phi, const Vec& xi_abs_max,
                        const std::vector<std::size_t>& counts) {
    auto need = required_counts(f, phi, xi_abs_max);
    std::size_t worst = 0;
    bool bad = false;
    for (std::size_t k = 0; k < need.size(); ++k) {
        worst = std::max(worst, need[k]);
        if (counts[k] < need[k]) bad = true;
    }
    if (bad)
        throw GuardError("oscillation guard violated: quadrature needs grid_n >= " + std::to_string(worst), static_cast<double>(worst));
}

namespace detail {

// One-dimensional factor tables of a separable integrand.
struct AxisQuad {
    std::vector<double> y, phi, wre, wim;
};

struct Quadrature {
    bool separable = false;
    int dim = 0;
    cplx amplitude = 1.0;
    Vec x0;                    // modulation (size n), zeros if absent
    std::vector<AxisQuad> ax;  // separable case
    // general case: flattened tensor grid
    std::vector<double> ys, phis, wre, wim;
};

inline Quadrature build_quadrature(const CapFunction& f, const EllipticPhase& phi, const std::vector<std::size_t>& counts) {
    f.validate();
    if (phi.dim != f.dim()) throw std::invalid_argument("phase and cap dimensions differ");
    Quadrature q;
    q.dim = f.dim();
    q.x0.assign(static_cast<std::size_t>(q.dim + 1), 0.0);
    for (int k = 0; k <= q.dim; ++k) q.x0[k] = f.x0(k);
    q.separable = f.separable() && phi.separable();
    if (q.separable) {
        q.amplitude = f.amplitude;
        for (int k = 0; k < q.dim; ++k) {
            AxisQuad a;
            const std::size_t N = counts[k];
            const double h = (f.hi[k] - f.lo[k]) / static_cast<double>(N);
            for (std::size_t m = 0; m < N; ++m) {
                double t = f.lo[k] + (static_cast<double>(m) + 0.5) * h;
                cplx w = f.axis_base(k, t) * h;
                a.y.push_back(t);
                a.phi.push_back(phi.axes[k].f(t));
                a.wre.push_back(w.real());
                a.wim.push_back(w.imag());
            }
            q.ax.push_back(std::move(a));
        }
        return q;
    }
    std::size_t total = 1;
    for (int k = 0; k < q.dim; ++k) total *= counts[k];
    double cell = 1;
    Vec h(q.dim);
    for (int k = 0; k < q.dim; ++k) {
        h[k] = (f.hi[k] - f.lo[k]) / static_cast<double>(counts[k]);
        cell *= h[k];
    }
    q.ys.resize(total * q.dim);
    q.phis.resize(total);
    q.wre.resize(total);
    q.wim.resize(total);
    std::vector<double> y(q.dim);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t r = idx;
        for (int k = q.dim - 1; k >= 0; --k) {
            y[k] = f.lo[k] + (static_cast<double>(r % counts[k]) + 0.5) * h[k];
            r /= counts[k];
        }
        std::copy(y.begin(), y.end(), q.ys.begin() + static_cast<std::ptrdiff_t>(idx * q.dim));
        q.phis[idx] = phi(y.data());
        cplx w = f.base(y.data()) * cell;
        q.wre[idx] = w.real();
        q.wim[idx] = w.imag();
    }
    return q;
}

// sum_m w_m exp(-2 pi i (a y_m + b phi_m))
inline cplx axis_sum(const AxisQuad& a, double xk, double xn) {
    double re = 0, im = 0;
    for (std::size_t m = 0; m < a.y.size(); ++m) {
        double arg = -kTwoPi * (xk * a.y[m] + xn * a.phi[m]);
        double c = std::cos(arg), s = std::sin(arg);
        re += a.wre[m] * c - a.wim[m] * s;
        im += a.wre[m] * s + a.wim[m] * c;
    }
    return {re, im};
}

inline cplx evaluate_point(const Quadrature& q, const double* x) {
    const int d = q.dim;
    const double xn = x[d] + q.x0[d];
    if (q.separable) {
        cplx v = q.amplitude;
        for (int k = 0; k < d; ++k) v *= axis_sum(q.ax[k], x[k] + q.x0[k], xn);
        return v;
    }
    double re = 0, im = 0;
    std::vector<double> xi(d);
    for (int k = 0; k < d; ++k) xi[k] = x[k] + q.x0[k];
    for (std::size_t m = 0; m < q.phis.size(); ++m) {
        double arg = xn * q.phis[m];
        const double* y = &q.ys[m * d];
        for (int k = 0; k < d; ++k) arg += xi[k] * y[k];
        arg *= -kTwoPi;
        double c = std::cos(arg), s = std::sin(arg);
        re += q.wre[m] * c - q.wim[m] * s;
        im += q.wre[m] * s + q.wim[m] * c;
    }
    return {re, im};
}

// Factor table over an arithmetic progression of x_k at fixed x_n, using a
// multiplicative recurrence in the progression index.
struct Progression {
    double start = 0, step = 0;
    std::size_t count = 1;
    double at(std::size_t s) const { return start + step * static_cast<double>(s); }
    double abs_max() const { return std::max(std::abs(start), std::abs(at(count - 1))); }
};

inline void axis_table(const AxisQuad& a, const Progression& xs, double shift, double xn, std::vector<cplx>& out) {
    const std::size_t M = a.y.size();
    std::vector<double> cre(M), cim(M), rre(M), rim(M);
    for (std::size_t m = 0; m < M; ++m) {
        double arg = -kTwoPi * ((xs.start + shift) * a.y[m] + xn * a.phi[m]);
        double c = std::cos(arg), s = std::sin(arg);
        cre[m] = a.wre[m] * c - a.wim[m] * s;
        cim[m] = a.wre[m] * s + a.wim[m] * c;
        double r = -kTwoPi * xs.step * a.y[m];
        rre[m] = std::cos(r);
        rim[m] = std::sin(r);
    }
    out.resize(xs.count);
    for (std::size_t s = 0; s < xs.count; ++s) {
        double re = 0, im = 0;
        // restart from exact phases periodically to bound drift
        if (s > 0 && s % 256 == 0) {
            for (std::size_t m = 0; m < M; ++m) {
                double arg = -kTwoPi * ((xs.at(s) + shift) * a.y[m] + xn * a.phi[m]);
                double c = std::cos(arg), sn = std::sin(arg);
                cre[m] = a.wre[m] * c - a.wim[m] * sn;
                cim[m] = a.wre[m] * sn + a.wim[m] * c;
            }
        }
        for (std::size_t m = 0; m < M; ++m) {
            re += cre[m];
            im += cim[m];
            double nr = cre[m] * rre[m] - cim[m] * rim[m];
            double ni = cre[m] * rim[m] + cim[m] * rre[m];
            cre[m] = nr;
            cim[m] = ni;
        }
        out[s] = {re, im};
    }
}

}  // namespace detail

using detail::Progression;

inline std::vector<cplx> evaluate_extension(const CapFunction& f, const EllipticPhase& phi, const std::vector<Vec>& points,
                                            const std::vector<std::size_t>& counts) {
    const int d = f.dim();
    if (counts.size() != static_cast<std::size_t>(d)) throw std::invalid_argument("evaluate_extension: one count per axis");
    Vec xi(static_cast<std::size_t>(d + 1), 0.0);
    for (const auto& x : points) {
        if (x.size() != static_cast<std::size_t>(d + 1)) throw std::invalid_argument("evaluate_extension: points must lie in R^n");
        for (int k = 0; k <= d; ++k) xi[k] = std::max(xi[k], std::abs(x[k] + f.x0(k)));
    }
    check_guard(f, phi, xi, counts);
    auto q = detail::build_quadrature(f, phi, counts);
    std::vector<cplx> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = detail::evaluate_point(q, points[i].data()); });
    return out;
}

inline std::vector<cplx> evaluate_extension(const CapFunction& f, const EllipticPhase& phi, const std::vector<Vec>& points,
                                            std::size_t grid_n) {
    return evaluate_extension(f, phi, points, std::vector<std::size_t>(static_cast<std::size_t>(f.dim()), grid_n));
}

// ||f||_p from the same midpoint grid (modulation has modulus one).
inline double cap_norm(const CapFunction& f, double p, const std::vector<std::size_t>& counts) {
    f.validate();
    const int d = f.dim();
    if (f.separable()) {
        double total = std::abs(f.amplitude);
        for (int k = 0; k < d; ++k) {
            const double h = (f.hi[k] - f.lo[k]) / static_cast<double>(counts[k]);
            PairwiseSum s;
            double mx = 0;
            for (std::size_t m = 0; m < counts[k]; ++m) {
                double a = std::abs(f.axis_base(k, f.lo[k] + (static_cast<double>(m) + 0.5) * h));
                if (std::isinf(p)) mx = std::max(mx, a);
                else s.add(std::pow(a, p) * h);
            }
            total *= std::isinf(p) ? mx : std::pow(s.value(), 1.0 / p);
        }
        return total;
    }
    std::size_t total = 1;
    double cell = 1;
    Vec h(d);
    for (int k = 0; k < d; ++k) {
        total *= counts[k];
        h[k] = (f.hi[k] - f.lo[k]) / static_cast<double>(counts[k]);
        cell *= h[k];
    }
    PairwiseSum s;
    double mx = 0;
    std::vector<double> y(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t r = idx;
        for (int k = d - 1; k >= 0; --k) {
            y[k] = f.lo[k] + (static_cast<double>(r % counts[k]) + 0.5) * h[k];
            r /= counts[k];
        }
        double a = std::abs(f.base(y.data()));
        if (std::isinf(p)) mx = std::max(mx, a);
        else s.add(std::pow(a, p) * cell);
    }
    return std::isinf(p) ? mx : std::pow(s.value(), 1.0 / p);
}

// ---------------------------------------------------------------- tensor-grid norms

// Values on the tensor grid prog[0] x ... x prog[n-1] are visited slice by
// slice in x_n; `mask(x)` selects the points entering the norm.
struct TensorNorm {
    double sum_q = 0;  // sum |.|^q over selected points (q < inf)
    double max = 0;
    std::size_t points = 0;
};

inline double box_or_ball_norm(const TensorNorm& t, double q, double cell) {
    if (std::isinf(q)) return t.max;
    return std::pow(t.sum_q * cell, 1.0 / q);
}

namespace detail {

inline TensorNorm tensor_product_norm(const CapFunction& f, const CapFunction* g, const EllipticPhase& phi,
                                      const std::vector<Progression>& prog, double q,
                                      const std::function<bool(const double*)>& mask,
                                      const std::vector<std::size_t>& counts_f, const std::vector<std::size_t>& counts_g) {
    const int d = f.dim();
    auto qf = build_quadrature(f, phi, counts_f);
    std::optional<Quadrature> qg;
    if (g) qg = build_quadrature(*g, phi, counts_g);
    const bool sep = qf.separable && (!qg || qg->separable);
    const Progression& pn = prog[d];
    std::vector<double> sums(pn.count, 0.0), maxes(pn.count, 0.0);
    std::vector<std::size_t> pts(pn.count, 0);
    parallel_for(pn.count, [&](std::size_t sn) {
        const double t = pn.at(sn);
        std::vector<std::vector<cplx>> tf(d), tg(d);
        if (sep) {
            for (int k = 0; k < d; ++k) {
                axis_table(qf.ax[k], prog[k], qf.x0[k], t + qf.x0[d], tf[k]);
                if (qg) axis_table(qg->ax[k], prog[k], qg->x0[k], t + qg->x0[d], tg[k]);
            }
        }
        std::vector<std::size_t> idx(d, 0);
        std::vector<double> x(d + 1);
        x[d] = t;
        PairwiseSum acc;
        double mx = 0;
        std::size_t cnt = 0;
        while (true) {
            for (int k = 0; k < d; ++k) x[k] = prog[k].at(idx[k]);
            if (mask(x.data())) {
                cplx v, w = 1.0;
                if (sep) {
                    v = qf.amplitude;
                    for (int k = 0; k < d; ++k) v *= tf[k][idx[k]];
                    if (qg) {
                        w = qg->amplitude;
                        for (int k = 0; k < d; ++k) w *= tg[k][idx[k]];
                    }
                } else {
                    v = evaluate_point(qf, x.data());
                    if (qg) w = evaluate_point(*qg, x.data());
                }
                double m = std::abs(v) * std::abs(w);
                if (std::isinf(q)) mx = std::max(mx, m);
                else if (m != 0) acc.add(std::pow(m, q));
                ++cnt;
            }
            int k = d;
            bool done = true;
            while (k > 0) {
                --k;
                if (++idx[k] < prog[k].count) {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if (done) break;
        }
        sums[sn] = acc.value();
        maxes[sn] = mx;
        pts[sn] = cnt;
    });
    TensorNorm out;
    out.sum_q = pairwise_sum(sums.begin(), sums.end());
    for (std::size_t s = 0; s < pn.count; ++s) {
        out.max = std::max(out.max, maxes[s]);
        out.points += pts[s];
    }
    return out;
}

inline Vec progression_extent(const std::vector<Progression>& prog, const CapFunction& f) {
    Vec xi(prog.size());
    for (std::size_t k = 0; k < prog.size(); ++k) {
        double s = f.x0(static_cast<int>(k));
        xi[k] = std::max(std::abs(prog[k].start + s), std::abs(prog[k].at(prog[k].count - 1) + s));
    }
    return xi;
}

}  // namespace detail

struct LocalizedRatio {
    double p = 2, q = 2, R = 1, value = 0;
    bool bilinear = false;
    double numerator = 0, denominator = 0;
};

inline double box_distance(const CapFunction& a, const CapFunction& b) {
    double s = 0;
    for (int k = 0; k < a.dim(); ++k) {
        double gap = std::max({0.0, b.lo[k] - a.hi[k], a.lo[k] - b.hi[k]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

inline std::vector<Progression> ball_progressions(int n, double R, double spacing) {
    const auto K = static_cast<long long>(std::floor(R / spacing + 1e-9));
    return std::vector<Progression>(static_cast<std::size_t>(n),
                                    Progression{-static_cast<double>(K) * spacing, spacing, static_cast<std::size_t>(2 * K + 1)});
}

// Largest |x_k + x0_k| over the lattice points of B_R.
inline Vec ball_extent(const CapFunction& f, double R, double spacing = 0.25) {
    return detail::progression_extent(ball_progressions(f.dim() + 1, R, spacing), f);
}

// ||R*f||_{L^q(B_R)} / ||f||_p, or ||R*f R*g||_{L^q(B_R)} / (||f||_p ||g||_p);
// B_R is the Euclidean ball sampled on the lattice spacing * Z^n.
inline LocalizedRatio local_ratio(const CapFunction& f, const CapFunction* g, const EllipticPhase& phi, double p, double q,
                                  double R, const std::vector<std::size_t>& counts_f,
                                  const std::vector<std::size_t>& counts_g, double spacing = 0.25,
                                  double separation = 0.5) {
    if (!(R >= 1)) throw std::domain_error("local_ratio: R must be >= 1");
    if (g && box_distance(f, *g) < separation - 1e-12)
        throw std::domain_error("local_ratio: bilinear supports closer than the separation");
    const int d = f.dim();
    auto prog = ball_progressions(d + 1, R, spacing);
    check_guard(f, phi, detail::progression_extent(prog, f), counts_f);
    if (g) check_guard(*g, phi, detail::progression_extent(prog, *g), counts_g);
    LocalizedRatio r;
    r.p = p;
    r.q = q;
    r.R = R;
    r.bilinear = g != nullptr;
    r.denominator = cap_norm(f, p, counts_f) * (g ? cap_norm(*g, p, counts_g) : 1.0);
    if (!(r.denominator > 0)) throw std::domain_error("local_ratio: zero denominator");
    const double R2 = R * R;
    auto mask = [&](const double* x) {
        double s = 0;
        for (int k = 0; k <= d; ++k) s += x[k] * x[k];
        return s <= R2;
    };
    auto t = detail::tensor_product_norm(f, g, phi, prog, q, mask, counts_f, counts_g);
    r.numerator = box_or_ball_norm(t, q, std::pow(spacing, d + 1));
    r.value = r.numerator / r.denominator;
    return r;
}

inline LocalizedRatio local_ratio(const CapFunction& f, const CapFunction* g, const EllipticPhase& phi, double p, double q,
                                  double R, std::size_t grid_n) {
    std::vector<std::size_t> c(static_cast<std::size_t>(f.dim()), grid_n);
    return local_ratio(f, g, phi, p, q, R, c, c);
}

struct EvalBox {
    Vec center, half;          // axis-aligned box in R^n
    std::size_t samples = 16;  // midpoint cells per axis
};

inline std::vector<Progression> box_progressions(const EvalBox& b) {
    std::vector<Progression> prog;
    for (std::size_t k = 0; k < b.center.size(); ++k) {
        double step = 2 * b.half[k] / static_cast<double>(b.samples);
        prog.push_back({b.center[k] - b.half[k] + 0.5 * step, step, b.samples});
    }
    return prog;
}

// ||R*f R*g||_{L^q(box)} / (||f||_p ||g||_p) on a midpoint grid of the box.
inline LocalizedRatio box_ratio(const CapFunction& f, const CapFunction& g, const EllipticPhase& phi, double p, double q,
                                const EvalBox& box, const std::vector<std::size_t>& counts_f,
                                const std::vector<std::size_t>& counts_g) {
    auto prog = box_progressions(box);
    check_guard(f, phi, detail::progression_extent(prog, f), counts_f);
    check_guard(g, phi, detail::progression_extent(prog, g), counts_g);
    LocalizedRatio r;
    r.p = p;
    r.q = q;
    r.bilinear = true;
    r.denominator = cap_norm(f, p, counts_f) * cap_norm(g, p, counts_g);
    if (!(r.denominator > 0)) throw std::domain_error("box_ratio: zero denominator");
    double cell = 1;
    for (const auto& pr : prog) cell *= pr.step;
    auto t = detail::tensor_product_norm(f, &g, phi, prog, q, [](const double*) { return true; }, counts_f, counts_g);
    r.numerator = box_or_ball_norm(t, q, cell);
    r.value = r.numerator / r.denominator;
    return r;
}

// Largest |x_k + x0_k| over the box sample points.
inline Vec box_extent(const CapFunction& f, const EvalBox& box) {
    return detail::progression_extent(box_progressions(box), f);
}

// ---------------------------------------------------------------- annulus form

struct AnnulusFunction {
    GridFunction grid;  // samples on R^n
    EllipticPhase phi;
    Vec lo, hi;  // the cube Q_i
};

// Uniform density on {(x, Phi(x) + t): x in [lo,hi], |t| <= 1/R}.
inline AnnulusFunction build_annulus(const EllipticPhase& phi, const Vec& lo, const Vec& hi, double R, double spacing,
                                     cplx density = 1.0) {
    const int d = phi.dim;
    double pmin = 1e300, pmax = -1e300;
    {
        // sample the phase range over the cube
        std::vector<int> c(d, 0);
        Vec y(d);
        while (true) {
            for (int k = 0; k < d; ++k) y[k] = lo[k] + (hi[k] - lo[k]) * c[k] / 16.0;
            double v = phi(y.data());
            pmin = std::min(pmin, v);
            pmax = std::max(pmax, v);
            int k = d;
            bool done = true;
            while (k > 0) {
                --k;
                if (++c[k] <= 16) {
                    done = false;
                    break;
                }
                c[k] = 0;
            }
            if (done) break;
        }
    }
    Vec glo(lo), ghi(hi);
    glo.push_back(pmin - 1.0 / R - spacing);
    ghi.push_back(pmax + 1.0 / R + spacing);
    GridFunction g = GridFunction::covering(glo, ghi, spacing);
    Vec x(d + 1);
    for (std::size_t i = 0; i < g.count(); ++i) {
        g.center(i, x.data());
        bool in = true;
        for (int k = 0; k < d; ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) in = false;
        if (in && std::abs(x[d] - phi(x.data())) <= 1.0 / R) g[i] = density;
    }
    return {std::move(g), phi, lo, hi};
}

inline void check_annulus_support(const AnnulusFunction& f, double R) {
    const auto& g = f.grid;
    const int d = f.phi.dim;
    Vec x(d + 1);
    for (std::size_t i = 0; i < g.count(); ++i) {
        if (g[i] == cplx(0)) continue;
        g.center(i, x.data());
        for (int k = 0; k < d; ++k)
            if (x[k] < f.lo[k] - 0.5 * g.spacing[k] || x[k] > f.hi[k] + 0.5 * g.spacing[k])
                throw std::domain_error("annulus_ratio: sample outside the cube");
        if (std::abs(x[d] - f.phi(x.data())) > 1.0 / R + 0.5 * g.spacing[d])
            throw std::domain_error("annulus_ratio: sample outside the thickened graph");
    }
}

// ||f^ g^||_{L^q(B(0,R))} / (R^{-1/p'} ||f||_p R^{-1/p'} ||g||_p); q defaults to p.
inline double annulus_ratio(const AnnulusFunction& f, const AnnulusFunction& g, double p, double R,
                            std::optional<double> q_opt = std::nullopt, double spacing = 0.25) {
    const double q = q_opt.value_or(p);
    check_annulus_support(f, R);
    check_annulus_support(g, R);
    const double nf = lp_norm(f.grid, p), ng = lp_norm(g.grid, p);
    const double pp = p > 1 ? p / (p - 1) : kInf;
    const double scale = std::isinf(pp) ? 1.0 : std::pow(R, -1.0 / pp);
    const double den = scale * nf * scale * ng;
    if (!(den > 0)) throw std::domain_error("annulus_ratio: zero denominator");
    for (const auto* a : {&f, &g})
        for (double h : a->grid.spacing)
            if (h * R > 0.25 + 1e-12) throw GuardError("annulus_ratio: grid spacing must be <= 1/(4R)", 0.25 / R);
    struct Sparse {
        std::vector<double> x, wre, wim;
    };
    auto sparse = [](const GridFunction& u) {
        Sparse s;
        const double cell = u.cell_measure();
        Vec x(u.rank());
        for (std::size_t i = 0; i < u.count(); ++i) {
            if (u[i] == cplx(0)) continue;
            u.center(i, x.data());
            s.x.insert(s.x.end(), x.begin(), x.end());
            s.wre.push_back(u[i].real() * cell);
            s.wim.push_back(u[i].imag() * cell);
        }
        return s;
    };
    const Sparse sf = sparse(f.grid), sg = sparse(g.grid);
    const std::size_t n = f.grid.rank();
    auto ft = [n](const Sparse& s, const double* xi) {
        double re = 0, im = 0;
        for (std::size_t m = 0; m < s.wre.size(); ++m) {
            double arg = 0;
            for (std::size_t k = 0; k < n; ++k) arg += s.x[m * n + k] * xi[k];
            arg *= -kTwoPi;
            double c = std::cos(arg), sn = std::sin(arg);
            re += s.wre[m] * c - s.wim[m] * sn;
            im += s.wre[m] * sn + s.wim[m] * c;
        }
        return std::abs(cplx(re, im));
    };
    const auto K = static_cast<long long>(std::floor(R / spacing + 1e-9));
    const auto side = static_cast<std::size_t>(2 * K + 1);
    std::size_t slabs = side;
    std::vector<double> sums(slabs, 0.0), maxes(slabs, 0.0);
    parallel_for(slabs, [&](std::size_t s0) {
        PairwiseSum acc;
        double mx = 0;
        std::vector<long long> k(n, -K);
        k[0] = static_cast<long long>(s0) - K;
        std::vector<double> xi(n);
        while (true) {
            double r2 = 0;
            for (std::size_t a = 0; a < n; ++a) {
                xi[a] = static_cast<double>(k[a]) * spacing;
                r2 += xi[a] * xi[a];
            }
            if (r2 <= R * R) {
                double v = ft(sf, xi.data()) * ft(sg, xi.data());
                if (std::isinf(q)) mx = std::max(mx, v);
                else if (v != 0) acc.add(std::pow(v, q));
            }
            std::size_t a = n;
            bool done = true;
            while (a > 1) {
                --a;
                if (++k[a] <= K) {
                    done = false;
                    break;
                }
                k[a] = -K;
            }
            if (done) break;
        }
        sums[s0] = acc.value();
        maxes[s0] = mx;
    });
    double num;
    if (std::isinf(q)) num = *std::max_element(maxes.begin(), maxes.end());
    else num = std::pow(pairwise_sum(sums.begin(), sums.end()) * std::pow(spacing, static_cast<double>(n)), 1.0 / q);
    return num / den;
}

// ---------------------------------------------------------------- rotational curvature

// det [[phi, phi_y], [phi_w, phi_yw]] for phi(y,w) = Phi(y) - Phi(y-w) - Phi(w).
// First derivatives use step 1e-5; mixed second derivatives use 1e-3.
inline double rotational_curvature(const EllipticPhase& Phi, const Vec& y, const Vec& w) {
    const int d = Phi.dim;
    if (static_cast<int>(y.size()) != d || static_cast<int>(w.size()) != d)
        throw std::invalid_argument("rotational_curvature: dimension mismatch");
    const double h1 = 1e-5, h2 = 1e-3;
    auto inside = [&](const Vec& v, double pad) {
        for (double c : v)
            if (std::abs(c) + pad > Phi.domain_half) return false;
        return true;
    };
    Vec ymw(d);
    for (int k = 0; k < d; ++k) ymw[k] = y[k] - w[k];
    if (!inside(y, h2) || !inside(w, h2) || !inside(ymw, 2 * h2))
        throw std::domain_error("rotational_curvature: evaluation outside the phase domain");
    auto phi = [&](const Vec& a, const Vec& b) {
        Vec amb(d);
        for (int k = 0; k < d; ++k) amb[k] = a[k] - b[k];
        return Phi(a) - Phi(amb) - Phi(b);
    };
    Eigen::MatrixXd M(d + 1, d + 1);
    M(0, 0) = phi(y, w);
    for (int k = 0; k < d; ++k) {
        Vec yp = y, ym = y, wp = w, wm = w;
        yp[k] += h1;
        ym[k] -= h1;
        wp[k] += h1;
        wm[k] -= h1;
        M(0, 1 + k) = (phi(yp, w) - phi(ym, w)) / (2 * h1);
        M(1 + k, 0) = (phi(y, wp) - phi(y, wm)) / (2 * h1);
    }
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            auto at = [&](double dy, double dw) {
                Vec a = y, b = w;
                a[j] += dy;
                b[i] += dw;
                return phi(a, b);
            };
            M(1 + i, 1 + j) = (at(h2, h2) - at(h2, -h2) - at(-h2, h2) + at(-h2, -h2)) / (4 * h2 * h2);
        }
    }
    return M.determinant();
}

}  // namespace bilab
