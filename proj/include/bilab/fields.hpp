#pragma once
// Grid-sampled functions, midpoint-rule norms and mixed norms on the net.

#include "bilab/geometry.hpp"
#include "bilab/parallel.hpp"

#include "json.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace bilab {

using cplx = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform grid; sample k sits at the center of its cell, origin is the center
// of cell 0. Axis 0 is the slowest index.
template <class T>
struct Grid {
    std::vector<std::size_t> dims;
    Vec origin, spacing;
    std::vector<T> samples;

    Grid() = default;
    Grid(std::vector<std::size_t> d, Vec o, Vec s) : dims(std::move(d)), origin(std::move(o)), spacing(std::move(s)) {
        if (dims.size() != origin.size() || dims.size() != spacing.size())
            throw std::invalid_argument("Grid: dims/origin/spacing length mismatch");
        for (double h : spacing)
            if (!(h > 0)) throw std::invalid_argument("Grid: spacing must be positive");
        samples.assign(count(), T{});
    }

    // Grid of cells of width h covering [lo, hi] per axis.
    static Grid covering(const Vec& lo, const Vec& hi, double h) {
        std::vector<std::size_t> d(lo.size());
        Vec o(lo.size()), s(lo.size(), h);
        for (std::size_t a = 0; a < lo.size(); ++a) {
            auto m = static_cast<std::size_t>(std::ceil((hi[a] - lo[a]) / h - 1e-9));
            d[a] = std::max<std::size_t>(m, 1);
            double mid = 0.5 * (lo[a] + hi[a]);
            o[a] = mid - 0.5 * h * static_cast<double>(d[a] - 1);
        }
        return Grid(d, o, s);
    }

    std::size_t rank() const { return dims.size(); }
    std::size_t count() const {
        std::size_t c = 1;
        for (auto d : dims) c *= d;
        return c;
    }
    double cell_measure() const {
        double m = 1;
        for (double h : spacing) m *= h;
        return m;
    }
    std::size_t linear(const std::vector<std::size_t>& k) const {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < rank(); ++a) idx = idx * dims[a] + k[a];
        return idx;
    }
    void center(std::size_t idx, double* x) const {
        for (std::size_t a = rank(); a-- > 0;) {
            x[a] = origin[a] + spacing[a] * static_cast<double>(idx % dims[a]);
            idx /= dims[a];
        }
    }
    Vec center(std::size_t idx) const {
        Vec x(rank());
        center(idx, x.data());
        return x;
    }
    T& operator[](std::size_t i) { return samples[i]; }
    const T& operator[](std::size_t i) const { return samples[i]; }

    template <class U>
    Grid<U> like() const {
        Grid<U> g;
        g.dims = dims;
        g.origin = origin;
        g.spacing = spacing;
        g.samples.assign(count(), U{});
        return g;
    }
};

using GridFunction = Grid<cplx>;
using RealGrid = Grid<double>;

struct Domain {
    enum class Kind { box, ball, everything } kind = Kind::everything;
    Vec center;
    Vec half;  // box half-widths
    double radius = 0;

    static Domain all() { return {}; }
    static Domain box(Vec c, Vec h) { return {Kind::box, std::move(c), std::move(h), 0}; }
    static Domain ball(Vec c, double r) { return {Kind::ball, std::move(c), {}, r}; }

    bool contains(const double* x) const {
        switch (kind) {
            case Kind::everything: return true;
            case Kind::box:
                for (std::size_t a = 0; a < center.size(); ++a)
                    if (std::abs(x[a] - center[a]) > half[a]) return false;
                return true;
            case Kind::ball: {
                double r2 = 0;
                for (std::size_t a = 0; a < center.size(); ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
                return r2 <= radius * radius;
            }
        }
        return false;
    }
};

template <class T>
double magnitude(const T& v) {
    if constexpr (std::is_same_v<T, cplx>) return std::abs(v);
    else return std::abs(static_cast<double>(v));
}

// (sum |u|^p * cell)^(1/p) over cells whose centers lie in the domain; p = inf gives the max.
// Also used for 0 < p < 1 (quasi-norm).
template <class T>
double lp_norm(const Grid<T>& u, double p, const Domain& dom = Domain::all()) {
    if (!(p > 0)) throw std::domain_error("lp_norm: p must be positive");
    Vec x(u.rank());
    bool any = false;
    PairwiseSum s;
    double mx = 0;
    for (std::size_t i = 0; i < u.count(); ++i) {
        u.center(i, x.data());
        if (!dom.contains(x.data())) continue;
        any = true;
        double m = magnitude(u[i]);
        if (std::isinf(p)) mx = std::max(mx, m);
        else if (m != 0) s.add(std::pow(m, p));
    }
    if (!any) throw std::domain_error("lp_norm: domain does not meet the grid");
    if (std::isinf(p)) return mx;
    return std::pow(s.value() * u.cell_measure(), 1.0 / p);
}

// ---------------------------------------------------------------- net functions

struct NetFunction {
    std::shared_ptr<const DirectionNet> net;
    std::map<std::pair<std::size_t, std::size_t>, double> values;  // (omega, base) -> value >= 0

    explicit NetFunction(std::shared_ptr<const DirectionNet> n = nullptr) : net(std::move(n)) {}

    void set(std::size_t w, std::size_t i, double v) {
        if (!net || w >= net->size() || i >= net->size()) throw std::out_of_range("NetFunction: index outside net");
        if (v < 0) throw std::domain_error("NetFunction: negative value");
        if (v == 0) values.erase({w, i});
        else values[{w, i}] = v;
    }
    void add(std::size_t w, std::size_t i, double v) { set(w, i, get(w, i) + v); }
    double get(std::size_t w, std::size_t i) const {
        auto it = values.find({w, i});
        return it == values.end() ? 0.0 : it->second;
    }
    void scale(double c) {
        for (auto& kv : values) kv.second *= c;
    }
    double total() const {
        PairwiseSum s;
        for (const auto& kv : values) s.add(kv.second);
        return s.value();
    }
};

enum class Inner { sup_i, sum_i };

// (sum_omega delta^{n-1} (aggregate over i)^q)^{1/q}; q = inf gives max_omega.
inline double mixed_norm(const NetFunction& g, double outer_q, Inner inner) {
    if (!(outer_q > 0)) throw std::domain_error("mixed_norm: q must be positive");
    if (!g.net) throw std::invalid_argument("mixed_norm: function without net");
    const double dw = std::pow(g.net->delta, g.net->n - 1);
    std::map<std::size_t, double> agg;
    std::map<std::size_t, PairwiseSum> sums;
    for (const auto& [key, v] : g.values) {
        if (inner == Inner::sup_i) agg[key.first] = std::max(agg[key.first], v);
        else sums[key.first].add(v);
    }
    if (inner == Inner::sum_i)
        for (const auto& [w, s] : sums) agg[w] = s.value();
    if (std::isinf(outer_q)) {
        double m = 0;
        for (const auto& kv : agg) m = std::max(m, kv.second);
        return m;
    }
    PairwiseSum s;
    for (const auto& kv : agg) s.add(dw * std::pow(kv.second, outer_q));
    return std::pow(s.value(), 1.0 / outer_q);
}

inline nlohmann::json to_json(const NetFunction& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [k, v] : g.values) arr.push_back({k.first, k.second, v});
    return arr;
}

inline NetFunction net_function_from_json(const nlohmann::json& j, std::shared_ptr<const DirectionNet> net) {
    NetFunction g(std::move(net));
    for (const auto& e : j) g.set(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>());
    return g;
}

// ---------------------------------------------------------------- refinement check

struct ResampleResult {
    double coarse = 0, fine = 0;
    double relative_difference() const { return fine == 0 ? std::abs(coarse) : std::abs(fine - coarse) / std::abs(fine); }
};

// Norm of a sampled field at the grid spacing h and at h/factor (nested cells).
inline ResampleResult resample_check(const std::function<cplx(const double*)>& field, const GridFunction& base, double p,
                                     const Domain& dom, int factor = 2, std::size_t max_samples = std::size_t(1) << 27) {
    if (factor < 2) throw std::invalid_argument("resample_check: factor must be >= 2");
    std::size_t fine_count = base.count();
    for (std::size_t a = 0; a < base.rank(); ++a) fine_count *= static_cast<std::size_t>(factor);
    if (fine_count > max_samples)
        throw std::length_error("resample_check: refined grid needs " + std::to_string(fine_count) +
                                " samples, limit " + std::to_string(max_samples));
    auto fill = [&](GridFunction g) {
        Vec x(g.rank());
        for (std::size_t i = 0; i < g.count(); ++i) {
            g.center(i, x.data());
            g[i] = field(x.data());
        }
        return g;
    };
    GridFunction coarse = fill(GridFunction(base.dims, base.origin, base.spacing));
    std::vector<std::size_t> d(base.rank());
    Vec o(base.rank()), s(base.rank());
    for (std::size_t a = 0; a < base.rank(); ++a) {
        d[a] = base.dims[a] * static_cast<std::size_t>(factor);
        s[a] = base.spacing[a] / factor;
        o[a] = base.origin[a] - 0.5 * base.spacing[a] + 0.5 * s[a];
    }
    GridFunction fine = fill(GridFunction(d, o, s));
    return {lp_norm(coarse, p, dom), lp_norm(fine, p, dom)};
}

// ---------------------------------------------------------------- binary I/O

inline nlohmann::json grid_header(const GridFunction& g) {
    return {{"dims", g.dims}, {"origin", g.origin}, {"spacing", g.spacing}, {"format", "f64le-complex"}};
}

// Writes <stem>.bin (little-endian (re, im) pairs) and <stem>.json.
inline void write_grid(const GridFunction& g, const std::filesystem::path& stem) {
    static_assert(std::numeric_limits<double>::is_iec559, "IEEE doubles required");
    std::ofstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + stem.string() + ".bin");
    for (const auto& v : g.samples) {
        for (double c : {v.real(), v.imag()}) {
            std::uint64_t bits;
            std::memcpy(&bits, &c, 8);
            unsigned char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
            bin.write(reinterpret_cast<const char*>(b), 8);
        }
    }
    std::ofstream js(stem.string() + ".json");
    js << grid_header(g).dump(2) << "\n";
}

inline GridFunction read_grid(const std::filesystem::path& stem) {
    std::ifstream js(stem.string() + ".json");
    if (!js) throw std::runtime_error("cannot read " + stem.string() + ".json");
    nlohmann::json h = nlohmann::json::parse(js);
    GridFunction g(h.at("dims").get<std::vector<std::size_t>>(), h.at("origin").get<Vec>(), h.at("spacing").get<Vec>());
    std::ifstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot read " + stem.string() + ".bin");
    for (auto& v : g.samples) {
        double c[2];
        for (double& x : c) {
            unsigned char b[8];
            if (!bin.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated grid file");
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
            std::memcpy(&x, &bits, 8);
        }
        v = {c[0], c[1]};
    }
    return g;
}

}  // namespace bilab
