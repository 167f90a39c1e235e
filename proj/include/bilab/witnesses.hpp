#pragma once
// Counterexample families for the restriction and Kakeya conditions, scale
// sweeps and log-log power-law fits.

#include "bilab/errors.hpp"
#include "bilab/extension.hpp"
#include "bilab/io.hpp"
#include "bilab/rational.hpp"
#include "bilab/xray.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilab {

enum class Family { c0, c1, c2, knapp, local_trace, bilinear_l2, kakeya_ball, k0, k1 };

inline Family parse_family(const std::string& s) {
    if (s == "c0" || s == "c0-modulated") return Family::c0;
    if (s == "c1" || s == "c1-squashed") return Family::c1;
    if (s == "c2" || s == "c2-stretched") return Family::c2;
    if (s == "knapp" || s == "knapp-classic") return Family::knapp;
    if (s == "local-trace" || s == "trace") return Family::local_trace;
    if (s == "bilinear-l2") return Family::bilinear_l2;
    if (s == "kakeya-ball" || s == "kakeya-delta-ball") return Family::kakeya_ball;
    if (s == "k0" || s == "k0-deltas") return Family::k0;
    if (s == "k1" || s == "k1-slab") return Family::k1;
    throw std::invalid_argument("unknown family: " + s);
}

inline std::string family_name(Family f) {
    switch (f) {
        case Family::c0: return "c0-modulated";
        case Family::c1: return "c1-squashed";
        case Family::c2: return "c2-stretched";
        case Family::knapp: return "knapp-classic";
        case Family::local_trace: return "local-trace";
        case Family::bilinear_l2: return "bilinear-l2";
        case Family::kakeya_ball: return "kakeya-ball";
        case Family::k0: return "k0-deltas";
        case Family::k1: return "k1-slab";
    }
    return "?";
}

// Families parametrized by R >= 1 rather than delta <= 1/4.
inline bool uses_radius(Family f) { return f == Family::c0 || f == Family::local_trace || f == Family::bilinear_l2; }
inline bool is_kakeya(Family f) { return f == Family::kakeya_ball || f == Family::k0 || f == Family::k1; }

// Exponent of the fitted power law, arranged so that >= 0 iff the necessity
// condition holds. delta families fit against delta, c0 against 1/R, the
// localized families against R.
inline double predicted_exponent(Family kind, int n, double p, double q) {
    if (!(p > 0 && q > 0)) throw std::domain_error("predicted_exponent: p, q must be positive");
    switch (kind) {
        case Family::c0: return (n - 1) - n / q;
        case Family::c1: return 2.0 * n - (n + 2) / q - 2.0 * n / p;
        case Family::c2: return 2.0 * (n - 1) - (n + 2) / q - 2.0 * (n - 2) / p;
        case Family::knapp: return 2.0 * (n - 1) - n / q - 2.0 * (n - 1) / p;
        case Family::local_trace: return 1.0;
        case Family::bilinear_l2: return 0.0;
        case Family::kakeya_ball: return 0.0;
        case Family::k0: return 2.0 * n / p - 2.0;
        case Family::k1: return 4.0 / p + 2.0 * (n - 2) / q - 2.0;
    }
    return 0;
}

// ---------------------------------------------------------------- witness construction

struct WitnessOptions {
    double box_constant = 8;
    std::size_t box_samples = 16;
    std::uint64_t seed = 1;
};

struct Witness {
    Family kind = Family::c1;
    int n = 3;
    double scale = 0.125;
    CapFunction f, g;
    EvalBox box;
    std::optional<EvalBox> knapp_tube;  // single-cap dual box, sheared coordinates (x1 + x_n w1, ..., x_n)
    double search_score = 0, search_target = 0;

    double support_measure(const CapFunction& c) const {
        double m = 1;
        for (int k = 0; k < c.dim(); ++k) m *= c.hi[k] - c.lo[k];
        return m;
    }
};

inline Vec cap_center(int which, int dim) {
    Vec c(static_cast<std::size_t>(dim), 0.0);
    c[0] = which == 1 ? -0.5 : 0.5;
    return c;
}

// Box [lo, hi] = center +- half intersected with the sub-cube Q_which.
inline CapFunction clipped_cap(int which, const Vec& half) {
    const int d = static_cast<int>(half.size());
    Vec c = cap_center(which, d), lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
        lo[k] = std::max(c[k] - half[k], c[k] - 0.25);
        hi[k] = std::min(c[k] + half[k], c[k] + 0.25);
    }
    return CapFunction::indicator(lo, hi);
}

namespace detail {

inline void odometer_sample(int dim, int radius, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> k(static_cast<std::size_t>(dim), -radius);
    while (true) {
        fn(k);
        int a = dim;
        bool done = true;
        while (a > 0) {
            --a;
            if (++k[a] <= radius) {
                done = false;
                break;
            }
            k[a] = -radius;
        }
        if (done) break;
    }
}

}  // namespace detail

struct ModulationChoice {
    Vec x0;
    double score = 0;
};

// Lattice search over x0 = c * 2 half, c in {-4..4}^n; the score is the minimum of
// |R*f| over the 3^n points center + {-0.9, 0, 0.9} half. First maximizer wins.
inline ModulationChoice search_modulation(const CapFunction& cap, const EllipticPhase& phi, const EvalBox& box) {
    const int n = cap.dim() + 1;
    std::vector<Vec> pts;
    detail::odometer_sample(n, 1, [&](const std::vector<int>& k) {
        Vec x(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) x[a] = box.center[a] + 0.9 * k[a] * box.half[a];
        pts.push_back(x);
    });
    Vec reach(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) reach[a] = std::abs(box.center[a]) + box.half[a] + 8 * box.half[a];
    auto counts = required_counts(cap, phi, reach);
    std::vector<std::vector<int>> cands;
    detail::odometer_sample(n, 4, [&](const std::vector<int>& k) { cands.push_back(k); });
    std::vector<double> scores(cands.size());
    parallel_for(cands.size(), [&](std::size_t c) {
        CapFunction t = cap;
        t.modulation.assign(static_cast<std::size_t>(n), 0.0);
        for (int a = 0; a < n; ++a) t.modulation[a] = 2.0 * box.half[a] * cands[c][a];
        auto q = detail::build_quadrature(t, phi, counts);
        double s = 1e300;
        for (const auto& x : pts) s = std::min(s, std::abs(detail::evaluate_point(q, x.data())));
        scores[c] = s;
    });
    ModulationChoice best;
    best.score = -1;
    for (std::size_t c = 0; c < cands.size(); ++c) {
        if (scores[c] > best.score * (1 + 1e-9) + 1e-300) {
            best.score = scores[c];
            best.x0.assign(static_cast<std::size_t>(n), 0.0);
            for (int a = 0; a < n; ++a) best.x0[a] = 2.0 * box.half[a] * cands[c][a];
        }
    }
    return best;
}

// |int_lo^hi exp(-2 pi i (a t + b t^2 / 2)) dt| by a fine midpoint rule.
inline double narrow_factor(double lo, double hi, double a, double b) {
    const int m = 4096;
    const double h = (hi - lo) / m;
    cplx s = 0;
    for (int i = 0; i < m; ++i) {
        double t = lo + (i + 0.5) * h;
        s += std::polar(1.0, -kTwoPi * (a * t + 0.5 * b * t * t));
    }
    return std::abs(s) * h;
}

inline void check_search(const ModulationChoice& m, double target, const std::string& what) {
    if (m.score < 0.5 * target)
        throw std::runtime_error("modulation search for " + what + " reached " + format_double(m.score) +
                                 ", below half the stationary-phase amplitude " + format_double(target));
}

inline Witness build_witness(Family kind, int n, double scale, const EllipticPhase& phi, const WitnessOptions& opt = {}) {
    if (n < 2) throw std::domain_error("build_witness: n >= 2");
    if (phi.dim != n - 1) throw std::invalid_argument("build_witness: phase dimension must be n - 1");
    if (is_kakeya(kind)) throw std::invalid_argument("build_witness: Kakeya families are built by kakeya_witness");
    if (uses_radius(kind)) {
        if (!(scale >= 4)) throw std::domain_error("build_witness: R must be >= 4");
    } else if (!(scale > 0 && scale <= 0.25)) {
        throw std::domain_error("build_witness: delta must lie in (0, 1/4]");
    }
    const int d = n - 1;
    const double C = opt.box_constant;
    Witness w;
    w.kind = kind;
    w.n = n;
    w.scale = scale;
    w.box.samples = opt.box_samples;
    w.box.center.assign(static_cast<std::size_t>(n), 0.0);
    w.box.half.assign(static_cast<std::size_t>(n), 0.0);
    const double dl = scale;
    auto squashed_box = [&] {
        w.box.half[0] = 1 / (C * dl * dl);
        for (int k = 1; k < d; ++k) w.box.half[k] = 1 / (C * dl);
        w.box.half[d] = 1 / (C * dl * dl);
    };
    switch (kind) {
        case Family::c1: {
            Vec half(static_cast<std::size_t>(d), dl);
            half[0] = dl * dl;
            w.f = clipped_cap(1, half);
            w.g = clipped_cap(2, half);
            squashed_box();
            break;
        }
        case Family::c2: {
            Vec half(static_cast<std::size_t>(d), dl);
            half[0] = 0.25;
            w.f = clipped_cap(1, half);
            w.g = clipped_cap(2, half);
            squashed_box();
            auto mf = search_modulation(w.f, phi, w.box);
            auto mg = search_modulation(w.g, phi, w.box);
            // stationary phase along y1 times the exact narrow-direction integrals at the box center
            auto target = [&](const CapFunction& cap, const Vec& x0) {
                double a = std::pow(std::max(std::abs(x0[d]), 1.0), -0.5);
                for (int k = 1; k < d; ++k) a *= narrow_factor(cap.lo[k], cap.hi[k], x0[k], x0[d]);
                return a;
            };
            const double tf = target(w.f, mf.x0), tg = target(w.g, mg.x0);
            check_search(mf, tf, "f");
            check_search(mg, tg, "g");
            w.f.modulation = mf.x0;
            w.g.modulation = mg.x0;
            w.search_score = std::min(mf.score, mg.score);
            w.search_target = std::min(tf, tg);
            break;
        }
        case Family::c0: {
            const double R = scale;
            Vec half(static_cast<std::size_t>(d), 0.25);
            w.f = clipped_cap(1, half);
            w.g = clipped_cap(2, half);
            w.box.center[0] = 2 * R;
            w.box.center[d] = 4 * R;
            for (auto& h : w.box.half) h = R / 2;
            auto mg = search_modulation(w.g, phi, w.box);
            const double xi_n = std::abs(w.box.center[d] + mg.x0[d]);
            const double target = std::pow(std::max(xi_n, 1.0), -0.5 * d);
            check_search(mg, target, "g");
            w.g.modulation = mg.x0;
            w.search_score = mg.score;
            w.search_target = target;
            break;
        }
        case Family::knapp: {
            Vec half(static_cast<std::size_t>(d), dl / 2);
            w.f = clipped_cap(1, half);
            w.g = clipped_cap(2, half);
            for (auto& h : w.box.half) h = 1 / (C * dl);
            EvalBox t;
            t.samples = opt.box_samples;
            t.center.assign(static_cast<std::size_t>(n), 0.0);
            t.half.assign(static_cast<std::size_t>(n), 1 / (C * dl));
            t.half[d] = 1 / (C * dl * dl);
            w.knapp_tube = t;
            break;
        }
        case Family::local_trace: {
            const double R = scale;
            const int cells = std::max(1, static_cast<int>(std::lround(R / 2)));
            Vec half(static_cast<std::size_t>(d), 0.25);
            CapFunction a = clipped_cap(1, half), b = clipped_cap(2, half);
            w.f = random_phase_cap(a.lo, a.hi, cells, derive_seed(opt.seed, 2 * static_cast<std::uint64_t>(R)));
            w.g = random_phase_cap(b.lo, b.hi, cells, derive_seed(opt.seed, 2 * static_cast<std::uint64_t>(R) + 1));
            break;
        }
        case Family::bilinear_l2: {
            Vec half(static_cast<std::size_t>(d), 0.25);
            w.f = clipped_cap(1, half);
            w.g = clipped_cap(2, half);
            break;
        }
        default: break;
    }
    return w;
}

// ---------------------------------------------------------------- power-law fit

struct PowerLawFit {
    double slope = 0, intercept = 0, max_residual = 0, slope_stderr = 0;
    std::vector<std::pair<double, double>> points;  // (scale, value), scale increasing
};

// Least squares of log2(value) against log2(scale).
inline PowerLawFit fit_power_law(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 2) throw std::invalid_argument("fit_power_law: needs at least 2 points");
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].first > 0)) throw std::domain_error("fit_power_law: scales must be positive");
        if (!(pts[i].second > 0)) throw std::domain_error("fit_power_law: nonpositive value");
        if (i > 0 && !(pts[i].first > pts[i - 1].first)) throw std::domain_error("fit_power_law: scales must be distinct");
    }
    const double m = static_cast<double>(pts.size());
    double sx = 0, sy = 0;
    for (const auto& [s, v] : pts) {
        sx += std::log2(s);
        sy += std::log2(v);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (const auto& [s, v] : pts) {
        sxx += (std::log2(s) - mx) * (std::log2(s) - mx);
        sxy += (std::log2(s) - mx) * (std::log2(v) - my);
    }
    PowerLawFit fit;
    fit.points = pts;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0;
    for (const auto& [s, v] : pts) {
        double r = std::log2(v) - (fit.intercept + fit.slope * std::log2(s));
        ssr += r * r;
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
    }
    if (pts.size() > 2) fit.slope_stderr = std::sqrt(ssr / (m - 2) / sxx);
    return fit;
}

// ---------------------------------------------------------------- sweeps

struct SweepConfig {
    Family family = Family::c1;
    int n = 3;
    std::string p_text = "2", q_text = "2";
    double p = 2, q = 2;
    std::vector<double> scales;
    std::size_t grid_n = 16;  // cells per axis at the coarsest scale; cells per delta for Kakeya families
    std::uint64_t seed = 1;
    double tolerance = 0.15;
    double eps0 = 0;
    WitnessOptions witness;
};

struct SweepRow {
    double scale = 0, ratio = 0;
    std::size_t grid_n = 0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    SweepConfig config;
    std::vector<SweepRow> rows;
    PowerLawFit fit;
    double predicted = 0;
    bool pass = false;
};

inline EllipticPhase sweep_phase(const SweepConfig& c) {
    return c.eps0 == 0 ? make_quadratic_phase(c.n - 1) : make_perturbed_phase(c.n - 1, c.eps0);
}

// Fit abscissa for a row: delta, R, or 1/R for c0.
inline double fit_abscissa(Family f, double scale) { return f == Family::c0 ? 1.0 / scale : scale; }

inline void validate_sweep(const SweepConfig& c) {
    if (c.scales.size() < 3) throw std::invalid_argument("sweep: at least 3 scales required");
    auto s = c.scales;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i) {
        double r = std::log2(s[i] / s[i - 1]);
        if (!(r > 0.5) || std::abs(r - std::round(r)) > 1e-9)
            throw std::invalid_argument("sweep: scales must be distinct and dyadically spaced");
    }
    if (c.family == Family::local_trace && !(c.p == 2 && c.q == 1 && c.n >= 2))
        throw std::invalid_argument("local-trace family is defined at p = 2, q = 1");
    if (c.family == Family::bilinear_l2 && !(c.p == 2 && c.q == 2 && c.n == 2))
        throw std::invalid_argument("bilinear-l2 family is defined at n = 2, p = q = 2");
    if (is_kakeya(c.family) && c.grid_n < 4) throw GuardError("Kakeya sweeps need at least 4 cells per delta (grid_n >= 4)", 4);
}

namespace detail {

inline std::vector<std::size_t> scaled_counts(const Vec& need, const Vec& need0, std::size_t grid_n) {
    std::vector<std::size_t> out(need.size());
    for (std::size_t k = 0; k < need.size(); ++k) {
        double ratio = need0[k] > 0 ? need[k] / need0[k] : 1.0;
        auto factor = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 0.05)));
        out[k] = std::max(grid_n * factor, static_cast<std::size_t>(std::ceil(need[k] - 1e-9)));
    }
    return out;
}

inline std::size_t max_count(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t m = 0;
    for (auto v : a) m = std::max(m, v);
    for (auto v : b) m = std::max(m, v);
    return m;
}

// Ball of radius delta at the origin on a grid of cells delta/refine.
inline RealGrid delta_ball(int n, double delta, int refine) {
    Vec lo(static_cast<std::size_t>(n), -delta), hi(static_cast<std::size_t>(n), delta);
    RealGrid g = RealGrid::covering(lo, hi, delta / refine);
    Vec x(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.count(); ++i) {
        g.center(i, x.data());
        double r2 = 0;
        for (double v : x) r2 += v * v;
        g[i] = r2 <= delta * delta ? 1.0 : 0.0;
    }
    return g;
}

}  // namespace detail

inline SweepResult finish_sweep(const SweepConfig& cfg, std::vector<SweepRow> rows) {
    SweepResult r;
    r.config = cfg;
    std::sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) {
        return fit_abscissa(cfg.family, a.scale) < fit_abscissa(cfg.family, b.scale);
    });
    r.rows = rows;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows) pts.emplace_back(fit_abscissa(cfg.family, row.scale), row.ratio);
    r.fit = fit_power_law(pts);
    r.predicted = predicted_exponent(cfg.family, cfg.n, cfg.p, cfg.q);
    r.pass = std::abs(r.fit.slope - r.predicted) <= cfg.tolerance;
    return r;
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
    validate_sweep(cfg);
    std::vector<SweepRow> rows;
    auto scales = cfg.scales;
    // coarsest scale first: largest delta, or smallest R
    std::sort(scales.begin(), scales.end());
    if (!uses_radius(cfg.family)) std::reverse(scales.begin(), scales.end());

    if (is_kakeya(cfg.family)) {
        const int refine = static_cast<int>(cfg.grid_n);
        for (double dl : scales) {
            SweepRow row{dl, 0, cfg.grid_n, cfg.seed};
            if (cfg.family == Family::kakeya_ball) {
                auto net = std::make_shared<const DirectionNet>(build_net(cfg.n, dl));
                row.ratio = kakeya_ratio(detail::delta_ball(cfg.n, dl, refine), net, cfg.p, cfg.q).value;
            } else {
                auto w = kakeya_witness(cfg.family == Family::k0 ? KakeyaWitnessKind::k0_deltas : KakeyaWitnessKind::k1_slab,
                                        cfg.n, dl);
                row.ratio = bilinear_kakeya_ratio(w.F, w.G, cfg.p, cfg.q, refine).value;
            }
            rows.push_back(row);
        }
        return finish_sweep(cfg, rows);
    }

    const EllipticPhase phi = sweep_phase(cfg);
    WitnessOptions wopt = cfg.witness;
    wopt.seed = cfg.seed;
    const bool local = cfg.family == Family::local_trace || cfg.family == Family::bilinear_l2;
    const double spacing = 0.25;
    Vec need0_f, need0_g;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        Witness w = build_witness(cfg.family, cfg.n, scales[s], phi, wopt);
        Vec ef = local ? ball_extent(w.f, scales[s], spacing) : box_extent(w.f, w.box);
        Vec eg = local ? ball_extent(w.g, scales[s], spacing) : box_extent(w.g, w.box);
        Vec nf = guard_need(w.f, phi, ef), ng = guard_need(w.g, phi, eg);
        if (s == 0) {
            need0_f = nf;
            need0_g = ng;
            double worst = 0;
            for (double v : nf) worst = std::max(worst, std::ceil(v - 1e-9));
            for (double v : ng) worst = std::max(worst, std::ceil(v - 1e-9));
            if (static_cast<double>(cfg.grid_n) < worst)
                throw GuardError("oscillation guard violated at the coarsest scale: sweep needs grid_n >= " +
                                     std::to_string(static_cast<long long>(worst)),
                                 worst);
        }
        auto cf = detail::scaled_counts(nf, need0_f, cfg.grid_n);
        auto cg = detail::scaled_counts(ng, need0_g, cfg.grid_n);
        SweepRow row{scales[s], 0, detail::max_count(cf, cg), cfg.seed};
        if (local) row.ratio = local_ratio(w.f, &w.g, phi, cfg.p, cfg.q, scales[s], cf, cg, spacing).value;
        else row.ratio = box_ratio(w.f, w.g, phi, cfg.p, cfg.q, w.box, cf, cg).value;
        rows.push_back(row);
    }
    return finish_sweep(cfg, rows);
}

// ---------------------------------------------------------------- persistence

inline std::string sweep_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "family,n,p,q,scale,ratio,grid_n,seed\n";
    for (const auto& row : r.rows)
        out << family_name(r.config.family) << ',' << r.config.n << ',' << r.config.p_text << ',' << r.config.q_text << ','
            << format_double(row.scale) << ',' << format_double(row.ratio) << ',' << row.grid_n << ',' << row.seed << '\n';
    return out.str();
}

inline nlohmann::ordered_json sweep_summary(const SweepResult& r) {
    nlohmann::ordered_json j;
    j["family"] = family_name(r.config.family);
    j["n"] = r.config.n;
    j["p"] = r.config.p_text;
    j["q"] = r.config.q_text;
    j["slope"] = format_double(r.fit.slope);
    j["predicted"] = format_double(r.predicted);
    j["max_residual"] = format_double(r.fit.max_residual);
    j["tolerance"] = format_double(r.config.tolerance);
    j["pass"] = r.pass;
    return j;
}

// Rebuilds rows from a CSV written by sweep_csv and refits.
inline SweepResult replay_sweep_csv(const std::string& csv, double tolerance) {
    auto lines = split(csv, '\n');
    if (lines.empty() || trim(lines[0]) != "family,n,p,q,scale,ratio,grid_n,seed")
        throw std::invalid_argument("sweep CSV: missing or wrong header");
    SweepConfig cfg;
    cfg.tolerance = tolerance;
    std::vector<SweepRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto c = split(lines[i], ',');
        if (c.size() != 8) throw std::invalid_argument("sweep CSV: row " + std::to_string(i) + " has wrong arity");
        cfg.family = parse_family(c[0]);
        cfg.n = std::stoi(c[1]);
        cfg.p_text = c[2];
        cfg.q_text = c[3];
        cfg.p = Rational::parse(c[2]).to_double();
        cfg.q = Rational::parse(c[3]).to_double();
        rows.push_back({parse_double(c[4]), parse_double(c[5]), static_cast<std::size_t>(std::stoull(c[6])),
                        static_cast<std::uint64_t>(std::stoull(c[7]))});
        cfg.scales.push_back(rows.back().scale);
        cfg.grid_n = rows.back().grid_n;
        cfg.seed = rows.back().seed;
    }
    return finish_sweep(cfg, rows);
}

}  // namespace bilab
