#pragma once
// Discretized X-ray transform on a delta-net, its adjoint, Kakeya ratios and
// the tube inner-product constant.

#include "bilab/errors.hpp"
#include "bilab/fields.hpp"
#include "bilab/geometry.hpp"
#include "bilab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bilab {

struct XrayField {
    std::shared_ptr<const DirectionNet> net;
    double delta = 0;
    NetFunction values;

    XrayField() = default;
    explicit XrayField(std::shared_ptr<const DirectionNet> n) : net(n), delta(n->delta), values(n) {}
    int n() const { return net->n; }
};

inline nlohmann::json to_json(const XrayField& g) {
    return {{"n", g.net->n}, {"delta", g.delta}, {"separation", g.net->separation}, {"values", to_json(g.values)}};
}

inline XrayField xray_field_from_json(const nlohmann::json& j) {
    auto net = std::make_shared<const DirectionNet>(
        build_net(j.at("n").get<int>(), j.at("delta").get<double>(), j.value("separation", 0.5)));
    XrayField g(net);
    g.values = net_function_from_json(j.at("values"), net);
    return g;
}

struct KakeyaRatio {
    double p = 2, q = 2, delta = 0, value = 0;
    bool bilinear = false;
    double numerator = 0, denominator = 0;
};

template <class T>
void check_tube_spacing(const Grid<T>& g, double delta) {
    for (double h : g.spacing)
        if (h > delta / 4 + 1e-15)
            throw GuardError("tube resolution guard violated: grid spacing must be <= " + std::to_string(delta / 4), delta / 4);
}

namespace detail {

// Calls fn(linear index) for every grid cell whose center lies in the tube,
// restricted to the cells with last-axis index `layer`.
template <class T, class Fn>
void tube_layer_cells(const Grid<T>& g, const Tube& t, std::size_t layer, Fn&& fn) {
    const std::size_t d = t.omega.size();
    const double xn = g.origin[d] + g.spacing[d] * static_cast<double>(layer);
    if (std::abs(xn) > 1.0) return;
    std::vector<long long> lo(d), hi(d), k(d);
    Vec c(d);
    for (std::size_t a = 0; a < d; ++a) {
        c[a] = t.base[a] + xn * t.omega[a];
        lo[a] = std::max<long long>(0, static_cast<long long>(std::ceil((c[a] - t.delta - g.origin[a]) / g.spacing[a])));
        hi[a] = std::min<long long>(static_cast<long long>(g.dims[a]) - 1,
                                    static_cast<long long>(std::floor((c[a] + t.delta - g.origin[a]) / g.spacing[a])));
        if (hi[a] < lo[a]) return;
    }
    k = lo;
    const double r2 = t.delta * t.delta;
    while (true) {
        double s = 0;
        std::size_t idx = 0;
        for (std::size_t a = 0; a < d; ++a) {
            double z = g.origin[a] + g.spacing[a] * static_cast<double>(k[a]) - c[a];
            s += z * z;
            idx = idx * g.dims[a] + static_cast<std::size_t>(k[a]);
        }
        if (s <= r2) fn(idx * g.dims[d] + layer);
        std::size_t a = d;
        bool done = true;
        while (a > 0) {
            --a;
            if (++k[a] <= hi[a]) {
                done = false;
                break;
            }
            k[a] = lo[a];
        }
        if (done) break;
    }
}

inline std::pair<Vec, Vec> tube_bounds(const Tube& t) {
    const std::size_t d = t.omega.size();
    Vec lo(d + 1), hi(d + 1);
    for (std::size_t a = 0; a < d; ++a) {
        lo[a] = t.base[a] - std::abs(t.omega[a]) - t.delta;
        hi[a] = t.base[a] + std::abs(t.omega[a]) + t.delta;
    }
    lo[d] = -1;
    hi[d] = 1;
    return {lo, hi};
}

inline std::optional<std::pair<Vec, Vec>> field_bounds(const XrayField& F) {
    std::optional<std::pair<Vec, Vec>> box;
    for (const auto& [key, v] : F.values.values) {
        auto b = tube_bounds(net_tube(*F.net, key.first, key.second));
        if (!box) {
            box = b;
            continue;
        }
        for (std::size_t a = 0; a < b.first.size(); ++a) {
            box->first[a] = std::min(box->first[a], b.first[a]);
            box->second[a] = std::max(box->second[a], b.second[a]);
        }
    }
    return box;
}

}  // namespace detail

// Xf(omega, i) = delta^{1-n} * (midpoint quadrature of |f| over T_omega^i).
template <class T>
XrayField xray_transform(const Grid<T>& f, std::shared_ptr<const DirectionNet> net) {
    if (static_cast<int>(f.rank()) != net->n) throw std::invalid_argument("xray_transform: grid rank differs from n");
    check_tube_spacing(f, net->delta);
    const std::size_t d = static_cast<std::size_t>(net->n - 1);
    const double delta = net->delta, cell = f.cell_measure();
    const double norm = std::pow(delta, 1.0 - net->n);
    std::vector<double> pts;  // nonzero cells: (x_0..x_{n-1})
    std::vector<double> wts;
    {
        Vec x(d + 1);
        for (std::size_t i = 0; i < f.count(); ++i) {
            double m = magnitude(f[i]);
            if (m == 0) continue;
            f.center(i, x.data());
            if (std::abs(x[d]) > 1.0) continue;
            pts.insert(pts.end(), x.begin(), x.end());
            wts.push_back(m * cell);
        }
    }
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(net->size());
    parallel_for(net->size(), [&](std::size_t w) {
        const Vec om = net->point(w);
        std::vector<std::pair<std::size_t, double>> hits;
        std::vector<long long> lo(d), hi(d), k(d);
        Vec c(d);
        for (std::size_t m = 0; m < wts.size(); ++m) {
            const double* x = &pts[m * (d + 1)];
            bool empty = false;
            for (std::size_t a = 0; a < d; ++a) {
                c[a] = x[a] - x[d] * om[a];
                lo[a] = std::max(-net->half, static_cast<long long>(std::ceil((c[a] - delta) / delta - 1e-12)));
                hi[a] = std::min(net->half, static_cast<long long>(std::floor((c[a] + delta) / delta + 1e-12)));
                if (hi[a] < lo[a]) empty = true;
            }
            if (empty) continue;
            k = lo;
            while (true) {
                double s = 0;
                for (std::size_t a = 0; a < d; ++a) {
                    double z = c[a] - static_cast<double>(k[a]) * delta;
                    s += z * z;
                }
                if (s <= delta * delta) hits.emplace_back(*net->index_of(k), wts[m]);
                std::size_t a = d;
                bool done = true;
                while (a > 0) {
                    --a;
                    if (++k[a] <= hi[a]) {
                        done = false;
                        break;
                    }
                    k[a] = lo[a];
                }
                if (done) break;
            }
        }
        std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& row = rows[w];
        for (std::size_t s = 0; s < hits.size();) {
            std::size_t e = s;
            PairwiseSum acc;
            while (e < hits.size() && hits[e].first == hits[s].first) acc.add(hits[e++].second);
            row.emplace_back(hits[s].first, acc.value() * norm);
            s = e;
        }
    });
    XrayField out(net);
    for (std::size_t w = 0; w < rows.size(); ++w)
        for (const auto& [i, v] : rows[w])
            if (v > 0) out.values.values.emplace_hint(out.values.values.end(), std::make_pair(w, i), v);
    return out;
}

// X*g(x) = sum_{omega,i} g(omega,i) chi_T(x) on the cells of `tmpl`; parallel over x_n layers.
template <class T>
RealGrid xray_adjoint(const XrayField& g, const Grid<T>& tmpl) {
    if (static_cast<int>(tmpl.rank()) != g.n()) throw std::invalid_argument("xray_adjoint: grid rank differs from n");
    check_tube_spacing(tmpl, g.delta);
    RealGrid out = tmpl.template like<double>();
    std::vector<std::pair<Tube, double>> tubes;
    for (const auto& [key, v] : g.values.values) tubes.emplace_back(net_tube(*g.net, key.first, key.second), v);
    const std::size_t layers = tmpl.dims.back();
    parallel_for(layers, [&](std::size_t L) {
        for (const auto& [t, v] : tubes) detail::tube_layer_cells(out, t, L, [&](std::size_t idx) { out[idx] += v; });
    });
    return out;
}

// sum_{omega,i} delta^{n-1} Xf(omega,i) g(omega,i), the pairing that makes X* the adjoint of X.
inline double net_pairing(const XrayField& a, const XrayField& b) {
    const double dw = std::pow(a.delta, a.n() - 1);
    PairwiseSum s;
    for (const auto& [k, v] : a.values.values) s.add(dw * v * b.values.get(k.first, k.second));
    return s.value();
}

template <class T>
double grid_pairing(const Grid<T>& f, const RealGrid& u) {
    if (f.dims != u.dims) throw std::invalid_argument("grid_pairing: shape mismatch");
    PairwiseSum s;
    for (std::size_t i = 0; i < f.count(); ++i) s.add(magnitude(f[i]) * u[i]);
    return s.value() * f.cell_measure();
}

// ||Xf||_{L^q_omega L^inf_i} / (delta^{1-n/p} ||f||_p).
template <class T>
KakeyaRatio kakeya_ratio(const Grid<T>& f, std::shared_ptr<const DirectionNet> net, double p, double q) {
    const double nf = lp_norm(f, p);
    if (!(nf > 0)) throw std::domain_error("kakeya_ratio: ||f||_p = 0");
    XrayField X = xray_transform(f, net);
    KakeyaRatio r;
    r.p = p;
    r.q = q;
    r.delta = net->delta;
    r.numerator = mixed_norm(X.values, q, Inner::sup_i);
    r.denominator = std::pow(net->delta, 1.0 - net->n / p) * nf;
    r.value = r.numerator / r.denominator;
    return r;
}

inline void check_direction_support(const XrayField& F, int which) {
    for (const auto& [k, v] : F.values.values) {
        bool ok = which == 1 ? F.net->in_E1(k.first) : F.net->in_E2(k.first);
        if (!ok) throw std::domain_error("direction outside E" + std::to_string(which));
    }
}

// Grid of spacing delta/refine covering the common bounding box of both tube families.
inline std::optional<RealGrid> overlap_grid(const XrayField& F, const XrayField& G, int refine = 4) {
    auto bf = detail::field_bounds(F), bg = detail::field_bounds(G);
    if (!bf || !bg) return std::nullopt;
    Vec lo(bf->first.size()), hi(lo.size());
    for (std::size_t a = 0; a < lo.size(); ++a) {
        lo[a] = std::max(bf->first[a], bg->first[a]);
        hi[a] = std::min(bf->second[a], bg->second[a]);
        if (hi[a] <= lo[a]) return std::nullopt;
    }
    return RealGrid::covering(lo, hi, F.delta / refine);
}

// ||X*F X*G||_{p'/2} / (delta^{2-2n/p} ||F||_{L^{q'}_omega L^1_i} ||G||_{L^{q'}_omega L^1_i}).
inline KakeyaRatio bilinear_kakeya_ratio(const XrayField& F, const XrayField& G, double p, double q, int refine = 4) {
    if (F.net != G.net && (F.delta != G.delta || F.n() != G.n())) throw std::invalid_argument("bilinear_kakeya_ratio: nets differ");
    if (!(p > 1) || !(q > 1)) throw std::domain_error("bilinear_kakeya_ratio: p, q must exceed 1");
    check_direction_support(F, 1);
    check_direction_support(G, 2);
    const double pp = p / (p - 1), qq = q / (q - 1);
    KakeyaRatio r;
    r.p = p;
    r.q = q;
    r.delta = F.delta;
    r.bilinear = true;
    const int n = F.n();
    r.denominator = std::pow(F.delta, 2.0 - 2.0 * n / p) * mixed_norm(F.values, qq, Inner::sum_i) *
                    mixed_norm(G.values, qq, Inner::sum_i);
    if (!(r.denominator > 0)) throw std::domain_error("bilinear_kakeya_ratio: zero denominator");
    auto grid = overlap_grid(F, G, refine);
    if (grid) {
        RealGrid a = xray_adjoint(F, *grid), b = xray_adjoint(G, *grid);
        for (std::size_t i = 0; i < a.count(); ++i) a[i] *= b[i];
        bool any = false;
        for (double v : a.samples) any = any || v != 0;
        r.numerator = any ? lp_norm(a, pp / 2) : 0.0;
    }
    r.value = r.numerator / r.denominator;
    return r;
}

struct XrayConstantResult {
    double grid_value = 0;  // via the rasterized inner product
    double pair_value = 0;  // via sum of pairwise tube intersections
    double pair_stderr = 0;
    double delta = 0;
};

// <X*F, X*G> / (delta^{2-n} ||F||_{L^1 L^1} ||G||_{L^1 L^1}), computed two ways.
// refine <= 0 skips the rasterized computation (grid_value stays 0).
inline XrayConstantResult xray_pair_constant(const XrayField& F, const XrayField& G, int refine = 8, long long mc_samples = 20000,
                                      std::uint64_t seed = 1) {
    check_direction_support(F, 1);
    check_direction_support(G, 2);
    const int n = F.n();
    XrayConstantResult r;
    r.delta = F.delta;
    const double den = std::pow(F.delta, 2.0 - n) * mixed_norm(F.values, 1, Inner::sum_i) * mixed_norm(G.values, 1, Inner::sum_i);
    if (!(den > 0)) throw std::domain_error("xray_pair_constant: zero denominator");
    std::vector<std::pair<Tube, double>> gt, ft;
    for (const auto& [k, v] : F.values.values) ft.emplace_back(net_tube(*F.net, k.first, k.second), v);
    for (const auto& [k, v] : G.values.values) gt.emplace_back(net_tube(*G.net, k.first, k.second), v);
    if (auto grid = refine > 0 ? overlap_grid(F, G, refine) : std::nullopt) {
        RealGrid a = xray_adjoint(F, *grid);
        std::vector<double> part(gt.size());
        const double cell = a.cell_measure();
        parallel_for(gt.size(), [&](std::size_t m) {
            PairwiseSum s;
            for (std::size_t L = 0; L < a.dims.back(); ++L)
                detail::tube_layer_cells(a, gt[m].first, L, [&](std::size_t idx) { s.add(a[idx]); });
            part[m] = gt[m].second * s.value() * cell;
        });
        r.grid_value = pairwise_sum(part.begin(), part.end()) / den;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < ft.size(); ++i)
        for (std::size_t j = 0; j < gt.size(); ++j)
            if (axis_window(ft[i].first, gt[j].first)) pairs.emplace_back(i, j);
    std::vector<double> val(pairs.size()), var(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t m) {
        const auto [i, j] = pairs[m];
        auto est = tube_intersection_volume(ft[i].first, gt[j].first, mc_samples, derive_seed(seed, m));
        double w = ft[i].second * gt[j].second;
        val[m] = w * (est.exact ? *est.exact : est.estimate);
        var[m] = est.exact ? 0.0 : std::pow(w * est.stderr_, 2);
    });
    r.pair_value = pairwise_sum(val.begin(), val.end()) / den;
    r.pair_stderr = std::sqrt(pairwise_sum(var.begin(), var.end())) / den;
    return r;
}

// ---------------------------------------------------------------- coverage

struct Coverage {
    int min = 0, max = 0;
};

// Counts of tubes of direction omega covering each grid point of B(0, 1/2).
inline Coverage tube_coverage(const DirectionNet& net, std::size_t omega, double spacing) {
    const std::size_t d = static_cast<std::size_t>(net.n - 1);
    const Vec om = net.point(omega);
    const auto K = static_cast<long long>(std::floor(0.5 / spacing));
    Coverage c{1 << 30, 0};
    std::vector<long long> k(d + 1, -K);
    Vec x(d + 1);
    while (true) {
        double r2 = 0;
        for (std::size_t a = 0; a <= d; ++a) {
            x[a] = static_cast<double>(k[a]) * spacing;
            r2 += x[a] * x[a];
        }
        if (r2 <= 0.25) {
            int cnt = 0;
            Vec cc(d);
            std::vector<long long> lo(d), hi(d), j(d);
            for (std::size_t a = 0; a < d; ++a) {
                cc[a] = x[a] - x[d] * om[a];
                lo[a] = std::max(-net.half, static_cast<long long>(std::ceil(cc[a] / net.delta - 1 - 1e-12)));
                hi[a] = std::min(net.half, static_cast<long long>(std::floor(cc[a] / net.delta + 1 + 1e-12)));
            }
            j = lo;
            bool empty = false;
            for (std::size_t a = 0; a < d; ++a) empty = empty || hi[a] < lo[a];
            while (!empty) {
                double s = 0;
                for (std::size_t a = 0; a < d; ++a) s += std::pow(cc[a] - static_cast<double>(j[a]) * net.delta, 2);
                if (s <= net.delta * net.delta) ++cnt;
                std::size_t a = d;
                bool done = true;
                while (a > 0) {
                    --a;
                    if (++j[a] <= hi[a]) {
                        done = false;
                        break;
                    }
                    j[a] = lo[a];
                }
                if (done) break;
            }
            c.min = std::min(c.min, cnt);
            c.max = std::max(c.max, cnt);
        }
        std::size_t a = d + 1;
        bool done = true;
        while (a > 0) {
            --a;
            if (++k[a] <= K) {
                done = false;
                break;
            }
            k[a] = -K;
        }
        if (done) break;
    }
    return c;
}

// ---------------------------------------------------------------- necessity witnesses

enum class KakeyaWitnessKind { k0_deltas, k1_slab, bush };

inline KakeyaWitnessKind parse_kakeya_witness(const std::string& s) {
    if (s == "k0-deltas" || s == "k0") return KakeyaWitnessKind::k0_deltas;
    if (s == "k1-slab" || s == "k1") return KakeyaWitnessKind::k1_slab;
    if (s == "bush") return KakeyaWitnessKind::bush;
    throw std::invalid_argument("unknown kakeya witness kind: " + s);
}

struct KakeyaWitness {
    KakeyaWitnessKind kind;
    XrayField F, G;
    Vec i0;  // base point of the G family
    // delta-exponent of bilinear_kakeya_ratio; >= 0 exactly when the condition holds
    double predicted(double p, double q) const {
        const int n = F.n();
        switch (kind) {
            case KakeyaWitnessKind::k0_deltas: return 2.0 * n / p - 2.0;
            case KakeyaWitnessKind::k1_slab: return 4.0 / p + 2.0 * (n - 2) / q - 2.0;
            case KakeyaWitnessKind::bush: return 2.0 * n / p - 2.0;
        }
        return 0;
    }
};

// Volume of {|x_n| <= 1 : x/x_n in box E1, (x - i)/x_n in box E2} for the continuum
// cubes around the net subsets.
inline double cone_overlap(int n, double separation, const Vec& i) {
    const std::size_t d = static_cast<std::size_t>(n - 1);
    const double c = separation / 2 + 0.25;
    const int steps = 400;
    double vol = 0;
    for (int s = 0; s < steps; ++s) {
        double t = -1.0 + (s + 0.5) * 2.0 / steps;
        double area = 1;
        for (std::size_t a = 0; a < d && area > 0; ++a) {
            double m1 = a == 0 ? -c : 0.0, m2 = a == 0 ? c : 0.0;
            double l1 = t * (m1 - 0.25), h1 = t * (m1 + 0.25);
            double l2 = i[a] + t * (m2 - 0.25), h2 = i[a] + t * (m2 + 0.25);
            if (l1 > h1) std::swap(l1, h1);
            if (l2 > h2) std::swap(l2, h2);
            area *= std::max(0.0, std::min(h1, h2) - std::max(l1, l2));
        }
        vol += area * 2.0 / steps;
    }
    return vol;
}

// Candidate base points on the lattice (1/4)Z^{n-1} inside Q; the first maximizer wins.
inline Vec best_i0(int n, double separation) {
    const std::size_t d = static_cast<std::size_t>(n - 1);
    std::vector<int> k(d, -4);
    Vec best(d, 0.0);
    double bv = -1;
    while (true) {
        Vec i(d);
        for (std::size_t a = 0; a < d; ++a) i[a] = k[a] / 4.0;
        double v = cone_overlap(n, separation, i);
        if (v > bv + 1e-12) {
            bv = v;
            best = i;
        }
        std::size_t a = d;
        bool done = true;
        while (a > 0) {
            --a;
            if (++k[a] <= 4) {
                done = false;
                break;
            }
            k[a] = -4;
        }
        if (done) break;
    }
    return best;
}

inline KakeyaWitness kakeya_witness(KakeyaWitnessKind kind, int n, double delta, double separation = 0.5) {
    auto net = std::make_shared<const DirectionNet>(build_net(n, delta, separation));
    KakeyaWitness w{kind, XrayField(net), XrayField(net), {}};
    const std::size_t zero = net->nearest(Vec(static_cast<std::size_t>(n - 1), 0.0));
    switch (kind) {
        case KakeyaWitnessKind::k0_deltas: {
            w.i0 = best_i0(n, separation);
            const std::size_t i0 = net->nearest(w.i0);
            for (auto e : net->E1) w.F.values.set(e, zero, 1.0);
            for (auto e : net->E2) w.G.values.set(e, i0, 1.0);
            break;
        }
        case KakeyaWitnessKind::k1_slab: {
            // directions restricted to |omega_k| <= delta for k >= 2, bases in the (x1, x_n) plane
            w.i0 = best_i0(n, separation);
            for (std::size_t a = 1; a < w.i0.size(); ++a) w.i0[a] = 0;
            const std::size_t i0 = net->nearest(w.i0);
            auto in_slab = [&](std::size_t e) {
                Vec p = net->point(e);
                for (std::size_t a = 1; a < p.size(); ++a)
                    if (std::abs(p[a]) > delta + 1e-12) return false;
                return true;
            };
            for (auto e : net->E1)
                if (in_slab(e)) w.F.values.set(e, zero, 1.0);
            for (auto e : net->E2)
                if (in_slab(e)) w.G.values.set(e, i0, 1.0);
            break;
        }
        case KakeyaWitnessKind::bush:
            w.i0 = Vec(static_cast<std::size_t>(n - 1), 0.0);
            for (auto e : net->E1) w.F.values.set(e, zero, 1.0);
            for (auto e : net->E2) w.G.values.set(e, zero, 1.0);
            break;
    }
    return w;
}

}  // namespace bilab
