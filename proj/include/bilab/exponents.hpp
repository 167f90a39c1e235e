#pragma once
// Exact exponent calculus on the (1/p, 1/q) diagram.

#include "bilab/rational.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bilab {

enum class EstimateKind { linear, bilinear, kakeya, kakeya_bilinear };

inline const char* to_string(EstimateKind k) {
    switch (k) {
        case EstimateKind::linear: return "linear";
        case EstimateKind::bilinear: return "bilinear";
        case EstimateKind::kakeya: return "kakeya";
        case EstimateKind::kakeya_bilinear: return "kakeya-bilinear";
    }
    return "?";
}

struct EstimatePoint {
    Rational inv_p;
    Rational inv_q;
    std::optional<Rational> alpha;  // localization exponent, R*(p->q, alpha)
    EstimateKind kind = EstimateKind::linear;
    bool open = false;  // "+eps" rows: closed endpoint stored, estimate holds only beyond it

    Rational p() const { return reciprocal(inv_p); }
    Rational q() const { return reciprocal(inv_q); }

    static EstimatePoint from_pq(const Rational& p, const Rational& q, EstimateKind kind,
                                 bool open = false) {
        EstimatePoint e{reciprocal(p), reciprocal(q), std::nullopt, kind, open};
        e.validate();
        return e;
    }

    void validate() const {
        if (inv_p < Rational(0) || inv_p > Rational(1) || inv_q < Rational(0) || inv_q > Rational(1))
            throw std::domain_error("estimate point outside the unit square: (" + inv_p.str() + ", " +
                                    inv_q.str() + ")");
        if (alpha && *alpha < Rational(0)) throw std::domain_error("negative localization exponent");
    }

    friend bool operator==(const EstimatePoint&, const EstimatePoint&) = default;
};

// a*(1/p) + b*(1/q) <= c  (or < c when strict)
struct Halfplane {
    Rational a, b, c;
    bool strict = false;
    std::string label;

    Rational slack(const Rational& x, const Rational& y) const { return c - (a * x + b * y); }
    bool contains(const Rational& x, const Rational& y) const {
        Rational s = slack(x, y);
        return strict ? s > Rational(0) : s >= Rational(0);
    }
    bool on_boundary(const Rational& x, const Rational& y) const { return slack(x, y) == Rational(0); }
};

enum class RegionKind { restriction_conjecture, bilinear_restriction_conjecture, kakeya_bilinear_conjecture };

struct Region {
    std::vector<Halfplane> halfplanes;
    int dimension_n = 3;

    bool contains(const Rational& inv_p, const Rational& inv_q) const {
        return std::all_of(halfplanes.begin(), halfplanes.end(),
                           [&](const Halfplane& h) { return h.contains(inv_p, inv_q); });
    }
};

inline RegionKind parse_region_kind(const std::string& s) {
    if (s == "restriction" || s == "restriction-conjecture") return RegionKind::restriction_conjecture;
    if (s == "bilinear-restriction" || s == "bilinear-restriction-conjecture")
        return RegionKind::bilinear_restriction_conjecture;
    if (s == "kakeya-bilinear" || s == "kakeya-bilinear-conjecture") return RegionKind::kakeya_bilinear_conjecture;
    throw std::invalid_argument("unknown region kind '" + s + "'");
}

inline Region region(RegionKind kind, int n) {
    if (n < 2) throw std::domain_error("region needs n >= 2");
    const Rational N(n);
    Region r;
    r.dimension_n = n;
    switch (kind) {
        case RegionKind::restriction_conjecture:
            // q > 2n/(n-1) and p' <= (n-1)q/(n+1), i.e. 1/p + (n+1)/(n-1) * 1/q <= 1
            r.halfplanes.push_back({0, 1, (N - 1) / (2 * N), true, "q>2n/(n-1)"});
            r.halfplanes.push_back({1, (N + 1) / (N - 1), 1, false, "sharp"});
            break;
        case RegionKind::bilinear_restriction_conjecture:
            r.halfplanes.push_back({0, 1, (N - 1) / N, false, "c0"});
            r.halfplanes.push_back({N, (N + 2) / 2, N, false, "c1"});
            r.halfplanes.push_back({N - 2, (N + 2) / 2, N - 1, false, "c2"});
            break;
        case RegionKind::kakeya_bilinear_conjecture:
            // p <= n  <=>  -1/p <= -1/n ;  (n-2)/q + 2/p >= 1
            r.halfplanes.push_back({-1, 0, -(Rational(1) / N), false, "k0"});
            r.halfplanes.push_back({-2, -(N - 2), -1, false, "k1"});
            break;
    }
    return r;
}

struct PolygonEdge {
    std::size_t from, to;
    bool strict = false;
    std::string label;  // halfplane label, or "square" for the unit-square boundary
};

struct Polygon {
    std::vector<std::pair<Rational, Rational>> vertices;  // counterclockwise
    std::vector<PolygonEdge> edges;
    bool empty() const { return vertices.empty(); }
};

namespace detail {

inline std::vector<std::pair<Rational, Rational>> clip(const std::vector<std::pair<Rational, Rational>>& poly,
                                                        const Halfplane& h) {
    std::vector<std::pair<Rational, Rational>> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const auto& P = poly[i];
        const auto& Q = poly[(i + 1) % m];
        Rational sp = h.slack(P.first, P.second), sq = h.slack(Q.first, Q.second);
        bool pin = sp >= Rational(0), qin = sq >= Rational(0);
        if (pin) out.push_back(P);
        if (pin != qin && sp != Rational(0) && sq != Rational(0)) {
            Rational t = sp / (sp - sq);
            out.emplace_back(P.first + t * (Q.first - P.first), P.second + t * (Q.second - P.second));
        }
    }
    // drop consecutive duplicates
    std::vector<std::pair<Rational, Rational>> dedup;
    for (const auto& v : out)
        if (dedup.empty() || dedup.back() != v) dedup.push_back(v);
    while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
    return dedup;
}

}  // namespace detail

// Feasible polygon of the region intersected with the closed unit square.
inline Polygon region_vertices(const Region& r) {
    std::vector<std::pair<Rational, Rational>> poly = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (const auto& h : r.halfplanes) {
        if (h.a == Rational(0) && h.b == Rational(0)) throw std::domain_error("degenerate halfplane");
        poly = detail::clip(poly, h);
        if (poly.empty()) break;
    }
    // remove collinear middle points
    bool changed = true;
    while (changed && poly.size() > 2) {
        changed = false;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& A = poly[(i + poly.size() - 1) % poly.size()];
            const auto& B = poly[i];
            const auto& C = poly[(i + 1) % poly.size()];
            Rational cross = (B.first - A.first) * (C.second - A.second) - (B.second - A.second) * (C.first - A.first);
            if (cross == Rational(0)) {
                poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    Polygon out;
    if (poly.empty()) return out;
    auto it = std::min_element(poly.begin(), poly.end());
    std::rotate(poly.begin(), it, poly.end());
    out.vertices = poly;
    const std::size_t m = poly.size();
    if (m < 2) return out;
    for (std::size_t i = 0; i < m; ++i) {
        PolygonEdge e{i, (i + 1) % m, false, "square"};
        const auto& P = poly[i];
        const auto& Q = poly[(i + 1) % m];
        for (const auto& h : r.halfplanes) {
            if (h.on_boundary(P.first, P.second) && h.on_boundary(Q.first, Q.second)) {
                e.label = h.label;
                e.strict = h.strict;
                break;
            }
        }
        out.edges.push_back(e);
    }
    return out;
}

// p with p' = (n-1) q / (n+1).
inline Rational sharp_line(int n, const Rational& q) {
    Rational pp = Rational(n - 1) * q / Rational(n + 1);
    if (pp <= Rational(1)) throw std::domain_error("sharp_line: p' = " + pp.str() + " <= 1");
    return pp / (pp - Rational(1));
}

// Inverse of sharp_line: q = (n+1) p' / (n-1).
inline Rational sharp_line_q(int n, const Rational& p) { return Rational(n + 1) * conjugate(p) / Rational(n - 1); }

inline EstimatePoint interpolate(const EstimatePoint& e1, const EstimatePoint& e2, const Rational& theta) {
    if (e1.kind != e2.kind) throw std::invalid_argument("interpolate: kind mismatch");
    if (theta < Rational(0) || theta > Rational(1)) throw std::domain_error("interpolate: theta outside [0,1]");
    if (e1.alpha.has_value() != e2.alpha.has_value())
        throw std::invalid_argument("interpolate: localized and global points mixed");
    const Rational s = Rational(1) - theta;
    EstimatePoint e{s * e1.inv_p + theta * e2.inv_p, s * e1.inv_q + theta * e2.inv_q, std::nullopt, e1.kind,
                    e1.open || e2.open};
    if (e1.alpha) e.alpha = s * *e1.alpha + theta * *e2.alpha;
    return e;
}

struct LemmaAlphaResult {
    Rational q_tilde_inf;
    Rational ratio_sup;
    Rational p_tilde_inf() const { return q_tilde_inf / ratio_sup; }
};

inline LemmaAlphaResult lemma_alpha(const Rational& p, const Rational& q, const Rational& alpha, int n) {
    if (p <= Rational(0) || q <= Rational(0)) throw std::domain_error("lemma_alpha: p, q must be positive");
    Rational den = Rational(n + 1) / 2 - alpha * q;
    if (den <= Rational(0)) throw std::domain_error("lemma_alpha: needs (n+1)/2 > alpha*q");
    return {Rational(2) + q / den, Rational(1) + (q / p) / den};
}

inline Rational bootstrap_map(const Rational& alpha) { return alpha / 5 + Rational(3, 25); }

inline Rational bootstrap_fixed_point() {
    // alpha = alpha/5 + 3/25
    return Rational(3, 25) / (Rational(1) - Rational(1, 5));
}

inline Rational modest_threshold(int n) {
    if (n < 2) throw std::domain_error("modest_threshold needs n >= 2");
    return Rational(4 * n, 3 * n - 2);
}

struct WhitneyCheck {
    bool feasible = false;
    Rational epsilon{0};
    bool uses_exp2 = false;  // p_tilde > 2q branch
    Rational case_j0_zero;   // coefficient of j0 in the j=0 corner (common)
    Rational case_diag;      // coefficient of j0 on the diagonal j=j0
    Rational case_j_zero;    // coefficient of j in the j0=0 corner (common2)
};

// Corner evaluation of the Whitney exponent inequality; epsilon is the largest
// value for which LHS <= -eps*q*|j-j0| holds at all corners.
inline WhitneyCheck whitney_exponent_check(int n, const Rational& p, const Rational& p_tilde, const Rational& q) {
    WhitneyCheck w;
    const Rational N1(n - 1);
    w.uses_exp2 = p_tilde > Rational(2) * q;
    // j = 0: 2(n-1) q (1/p - 1/p~) j0  (same in both branches)
    w.case_j0_zero = Rational(2) * N1 * q * (reciprocal(p) - reciprocal(p_tilde));
    // j0 = 0: (2n - 2(n-1)q) j  (same in both branches)
    w.case_j_zero = Rational(2 * n) - Rational(2) * N1 * q;
    // j = j0 (only in the p~ <= 2q branch): 2(n-1)q (1/p - 1 + (n+1)/(2(n-1)q))
    w.case_diag = Rational(2) * N1 * q * (reciprocal(p) - Rational(1) + Rational(n + 1) / (Rational(2) * N1 * q));

    bool pre = p_tilde < p && q > Rational(n) / N1 && p > Rational(1) &&
               conjugate(p) <= N1 / Rational(n + 1) * Rational(2) * q;
    if (!pre) return w;
    if (!w.uses_exp2 && w.case_diag > Rational(0)) return w;
    Rational e1 = -w.case_j0_zero / q;
    Rational e2 = -w.case_j_zero / q;
    Rational eps = std::min(e1, e2);
    if (eps <= Rational(0)) return w;
    w.feasible = true;
    w.epsilon = eps;
    return w;
}

struct XImply {
    Rational w, r;
    bool applicable = false;
};

inline XImply x_imply(const Rational& p, const Rational& q) {
    if (q <= Rational(2) || q >= Rational(4)) throw std::domain_error("x_imply: q must lie in (2,4)");
    XImply x;
    x.w = (Rational(4) + q) / 2;
    x.r = Rational(4) * conjugate(p) / q;
    // r > 4(sqrt2 - 1)  <=>  (r/4 + 1)^2 > 2, decided on integers: (r + 4)^2 > 32 r'^2 form
    Rational s = x.r / 4 + Rational(1);
    BigInt a = s.num(), b = s.den();
    x.applicable = s > Rational(0) && a * a > BigInt(2) * b * b;
    return x;
}

// Determinant whose vanishing expresses collinearity of (1/p,1/q), (1-2/w,1/w), (1/r,1/4).
inline Rational x_imply_collinearity(const Rational& p, const Rational& q) {
    XImply x = x_imply(p, q);
    Rational ax = reciprocal(p), ay = reciprocal(q);
    Rational bx = Rational(1) - Rational(2) / x.w, by = reciprocal(x.w);
    Rational cx = reciprocal(x.r), cy = Rational(1, 4);
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

struct CatalogRow {
    EstimatePoint point;
    std::string label;
    bool sharp = false;  // estimate of the form R*_s(q)
};

// Known restriction theorems for n = 3, in the order of the historical table.
inline std::vector<CatalogRow> table1_catalog() {
    auto L = [](Rational p, Rational q, bool open, std::string label, bool sharp = false) {
        CatalogRow row{EstimatePoint{reciprocal(p), q == Rational(0) ? Rational(0) : reciprocal(q), std::nullopt,
                                     EstimateKind::linear, open},
                       std::move(label), sharp};
        return row;
    };
    std::vector<CatalogRow> rows;
    // row 1: R*(1 -> infinity); q = infinity is stored as inv_q = 0
    rows.push_back({EstimatePoint{1, 0, std::nullopt, EstimateKind::linear, false}, "R*(1->inf), trivial", true});
    rows.push_back(L(2, 6, false, "R*(2->6)"));
    rows.push_back(L(2, 4, true, "R*(2->4+eps)"));
    rows.push_back(L(2, 4, false, "R*(2->4) = R*_s(4)", true));
    rows.push_back(L(Rational(58, 15), Rational(58, 15), true, "R*(4-2/15 -> 4-2/15)"));
    rows.push_back(L(Rational(42, 11), Rational(42, 11), true, "R*(4-2/11 -> 4-2/11)"));
    rows.push_back(L(Rational(7, 3), Rational(42, 11), true, "R*(7/3 -> 4-2/11)"));
    rows.push_back(L(Rational(170, 77), Rational(34, 9), true, "R*(170/77 -> 4-2/9)"));
    rows.push_back(L(sharp_line(3, Rational(103, 27)), Rational(103, 27), true, "R*_s(4-5/27)", true));
    return rows;
}

// The chain of exact exponents behind the main n = 3 theorem.
struct MainChain {
    EstimatePoint trace_interpolant;  // R*(30/17 x 30/17 -> 5/3, 1/5)
    Rational fixed_point;             // 3/20
    Rational halved_once;             // 3/40 after the bilinear-to-localized step
    Rational halved_twice;            // 3/80 after the linear step
    LemmaAlphaResult global;          // q~ = 34/9, ratio 77/45
    EstimatePoint bilinear_global;    // R*(170/77 x 170/77 -> 17/9)
    EstimatePoint sharp_point;        // bilinear point on 1/p + 1/q = 1, 2q = 103/27
    EstimatePoint beta_point;         // p = 2, q = 133/69
};

inline MainChain main_chain() {
    MainChain c;
    const auto bil = EstimateKind::bilinear;
    EstimatePoint trace{Rational(1, 2), Rational(1), Rational(1), bil, false};
    EstimatePoint modest{Rational(7, 12), Rational(1, 2), Rational(0), bil, false};
    c.trace_interpolant = interpolate(trace, modest, Rational(4, 5));
    c.fixed_point = bootstrap_fixed_point();
    c.halved_once = c.fixed_point / 2;
    c.halved_twice = c.halved_once / 2;
    c.global = lemma_alpha(Rational(5, 2), Rational(10, 3), c.halved_twice, 3);
    EstimatePoint lin{reciprocal(c.global.p_tilde_inf()), reciprocal(c.global.q_tilde_inf / 2), std::nullopt, bil,
                      true};
    c.bilinear_global = lin;
    EstimatePoint m12{Rational(7, 12), Rational(1, 2), std::nullopt, bil, false};
    // theta solving (1-t)(x1+y1) + t(x2+y2) = 1
    Rational s1 = lin.inv_p + lin.inv_q, s2 = m12.inv_p + m12.inv_q;
    c.sharp_point = interpolate(lin, m12, (Rational(1) - s1) / (s2 - s1));
    c.beta_point = interpolate(lin, m12, (Rational(1, 2) - lin.inv_p) / (m12.inv_p - lin.inv_p));
    return c;
}

// The localized bootstrap as affine maps: bilinear -> localized halves alpha,
// then interpolation at p = 2 with R*(30/17 x 30/17 -> 5/3, 1/5).
inline Rational bootstrap_by_interpolation(const Rational& alpha) {
    const auto bil = EstimateKind::bilinear;
    EstimatePoint a{Rational(2, 5), Rational(3, 5), alpha / 2, bil, false};
    EstimatePoint b{Rational(17, 30), Rational(3, 5), Rational(1, 5), bil, false};
    Rational theta = (Rational(1, 2) - a.inv_p) / (b.inv_p - a.inv_p);
    return *interpolate(a, b, theta).alpha;
}

}  // namespace bilab
