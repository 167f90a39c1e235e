// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "bilab/exponents.hpp"
#include "bilab/io.hpp"
#include "bilab/verify.hpp"
#include "bilab/witnesses.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace bilab;
namespace fs = std::filesystem;

namespace {

using R = Rational;

R r(long long a, long long b = 1) { return R(a) / R(b); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Runner {
    int failed = 0;
    void run(int k, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = dt <= budget_s;
        const bool ok = o.pass && in_time;
        if (!ok) ++failed;
        std::ostringstream line;
        line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << title << " (" << o.detail << "; "
             << format_double(std::round(dt * 100) / 100) << " s of " << budget_s << " s"
             << (in_time ? "" : ", over budget") << ")";
        std::cout << line.str() << std::endl;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

SweepConfig sweep(Family f, int n, const std::string& p, const std::string& q, std::vector<double> scales,
                  std::size_t grid_n, double tolerance = 0.15) {
    SweepConfig c;
    c.family = f;
    c.n = n;
    c.p_text = p;
    c.q_text = q;
    c.p = R::parse(p).to_double();
    c.q = R::parse(q).to_double();
    c.scales = std::move(scales);
    c.grid_n = grid_n;
    c.seed = 1;
    c.tolerance = tolerance;
    return c;
}

std::string slope_text(const SweepResult& s) {
    return family_name(s.config.family) + " p=" + s.config.p_text + " q=" + s.config.q_text + " slope " + fmt(s.fit.slope) +
           " vs " + fmt(s.predicted);
}

int sh(const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// ---------------------------------------------------------------- criteria

Outcome exponent_calculus() {
    std::vector<std::string> bad;
    auto need = [&](bool c, const char* what) {
        if (!c) bad.push_back(what);
    };
    auto m = lemma_alpha(r(5, 2), r(10, 3), r(3, 80), 3);
    need(m.q_tilde_inf == r(34, 9) && m.ratio_sup == r(77, 45) && m.p_tilde_inf() == r(170, 77), "lemma_alpha main");
    need(lemma_alpha(r(20, 7), r(10, 3), r(1, 20), 3).q_tilde_inf == r(42, 11), "lemma_alpha 42/11");
    need(bootstrap_fixed_point() == r(3, 20) && bootstrap_map(r(3, 20)) == r(3, 20), "fixed point");
    R a(1);
    int steps = 0;
    while (abs(a - r(3, 20)) > r(1, 1000000000000LL) && steps < 100) {
        a = bootstrap_map(a);
        ++steps;
    }
    need(steps <= 60, "bootstrap iteration");
    const auto bil = EstimateKind::bilinear;
    EstimatePoint e1{r(3, 7), r(11, 21), std::nullopt, bil, false}, e2{r(7, 12), r(1, 2), std::nullopt, bil, false};
    auto c = interpolate(e1, e2, r(4, 11));
    need(c.inv_p + c.inv_q == R(1) && c.q() == r(33, 17) && R(2) * c.q() == R(4) - r(2, 17), "interpolate");
    auto x = x_imply(r(170, 77), r(34, 9));
    need(x.w == r(35, 9) && x.r == r(60, 31) && x.applicable && x_imply_collinearity(r(170, 77), r(34, 9)) == R(0), "x_imply");
    need(modest_threshold(3) == r(12, 7), "modest");
    need(sharp_line(3, R(4)) == R(2), "sharp_line");
    std::string d = "bootstrap from 1 reached 1e-12 in " + std::to_string(steps) + " steps";
    for (const auto& b : bad) d += "; mismatch: " + b;
    return {bad.empty(), d};
}

Outcome from_check(const verify::Check& c, const std::string& detail) { return {c.pass, detail}; }

Outcome cordoba() {
    auto c = verify::cordoba(derive_seed(1, 3));
    return from_check(c, "max constant " + fmt(c.detail["max_constant"].get<double>()) + " <= 64, MC vs exact strip " +
                             fmt(100 * c.detail["max_mc_vs_exact"].get<double>()) + "% <= 2%");
}

Outcome kakeya_sharpness() {
    auto c = verify::kakeya_ball(1);
    return from_check(c, "|slope| " + fmt(std::abs(c.detail["slope"].get<double>())) + " <= 0.1, spread " +
                             fmt(c.detail["spread"].get<double>()) + " <= 4");
}

Outcome kakeya_necessity() {
    bool ok = true;
    std::string d;
    const std::vector<double> deltas = {0.125, 0.0625, 0.03125, 0.015625};
    for (const std::string p : {"2", "3", "4"}) {
        auto s = run_sweep(sweep(Family::k0, 3, p, p, deltas, 4));
        ok = ok && s.pass;
        d += slope_text(s) + "; ";
    }
    auto s = run_sweep(sweep(Family::k1, 3, "5/2", "5", deltas, 4));
    ok = ok && s.pass;
    d += slope_text(s);
    return {ok, d};
}

Outcome xray_constant() {
    auto a = verify::xray_constant_crossing(derive_seed(1, 3));
    auto b = verify::xray_constant_random(derive_seed(1, 4));
    return {a.pass && b.pass, "dual computations differ by " + fmt(100 * a.detail["max_relative_difference"].get<double>()) +
                                  "% <= 5%, normalized constant " + fmt(b.detail["max_constant"].get<double>()) + " <= 32"};
}

Outcome restriction_necessity() {
    const std::vector<double> deltas = {0.25, 0.125, 0.0625, 0.03125};
    std::vector<SweepResult> rs;
    rs.push_back(run_sweep(sweep(Family::c1, 3, "2", "5/3", deltas, 16)));
    rs.push_back(run_sweep(sweep(Family::c2, 3, "2", "5/3", {0.25, 0.125, 0.0625}, 256)));
    rs.push_back(run_sweep(sweep(Family::c1, 3, "2", "2", deltas, 16)));
    rs.push_back(run_sweep(sweep(Family::c0, 2, "2", "2", {8, 16, 32, 64}, 128)));
    bool ok = true;
    std::string d;
    for (const auto& s : rs) {
        ok = ok && s.pass;
        d += (d.empty() ? "" : "; ") + slope_text(s);
    }
    return {ok, d};
}

Outcome localized() {
    auto t = run_sweep(sweep(Family::local_trace, 3, "2", "1", {8, 16, 32, 64}, 32, 0.2));
    auto b = run_sweep(sweep(Family::bilinear_l2, 2, "2", "2", {8, 16, 32, 64}, 512, 0.1));
    const bool ok = t.fit.slope >= 0.8 && t.fit.slope <= 1.2 && std::abs(b.fit.slope) <= 0.1;
    return {ok, "trace slope " + fmt(t.fit.slope) + " in [0.8, 1.2]; planar bilinear L2 slope " + fmt(b.fit.slope) +
                    " within 0.1 of 0"};
}

Outcome whitney() {
    auto a = verify::whitney(derive_seed(1, 1), 2), b = verify::whitney(derive_seed(1, 2), 3);
    auto part = [](const verify::Check& c) {
        return std::to_string(c.detail["oracle_match"].get<int>()) + "/" + std::to_string(c.detail["pairs"].get<int>());
    };
    return {a.pass && b.pass, "oracle match n=2 " + part(a) + ", n=3 " + part(b)};
}

Outcome lemma_suite() {
    auto y = verify::young(derive_seed(1, 1));
    auto q = verify::quasi_orthogonality(derive_seed(1, 2));
    auto x = verify::xr_est(derive_seed(1, 3));
    return {y.pass && q.pass && x.pass,
            "young " + std::to_string(y.detail["held"].get<int>()) + "/100, quasi-orthogonality " +
                fmt(q.detail["max_ratio"].get<double>()) + " <= 4 and " + fmt(q.detail["max_ratio_p2"].get<double>()) +
                " at p=2, xr-est constant " + fmt(x.detail["max_constant"].get<double>()) +
                " <= 16, p=1 identity " + (x.detail["p1_identity"].get<bool>() ? "exact" : "broken")};
}

Outcome rotational() {
    auto c = verify::rotational(derive_seed(1, 5));
    return from_check(c, "quadratic error " + fmt(c.detail["quadratic_max_error"].get<double>()) +
                             ", perturbed constant " + fmt(c.detail["perturbed_constant"].get<double>()) + " <= 10");
}

Outcome cz() {
    auto a = verify::cz(derive_seed(1, 4));
    auto b = verify::xr_monotone(derive_seed(1, 5));
    return {a.pass && b.pass, "decompositions " + std::to_string(a.detail["held"].get<int>()) + "/200 exact, " +
                                  std::to_string(a.detail["bad_cubes"].get<std::size_t>()) + " bad cubes; xr_norm monotone " +
                                  std::to_string(b.detail["held"].get<int>()) + "/50"};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("bilab_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"c1-squashed", "--family c1 --n 3 --p 2 --q 5/3 --scales 1/4,1/8,1/16,1/32 --grid-n 16"},
        {"c0-modulated", "--family c0 --n 2 --p 2 --q 2 --scales 8,16,32,64 --grid-n 128"},
        {"kakeya-ball", "--family kakeya-ball --n 2 --p 2 --q 2 --scales 1/8,1/16,1/32 --grid-n 4"},
        {"k1-slab", "--family k1 --n 3 --p 5/2 --q 5 --scales 1/8,1/16,1/32 --grid-n 4"}};
    int same = 0;
    std::string d;
    for (const auto& [name, args] : runs) {
        std::string out[2][3];
        for (int k = 0; k < 2; ++k) {
            const fs::path dir = root / (name + std::to_string(k));
            const std::string cmd = std::string("'") + BILAB_CLI_PATH + "' --seed 3 --output-dir '" + dir.string() +
                                    "' sweep " + args + " > '" + (dir.string() + ".stdout") + "' 2>/dev/null";
            fs::create_directories(dir);
            sh(cmd);
            out[k][0] = read_file(dir / (name + ".csv"));
            out[k][1] = read_file(dir / (name + ".summary.json"));
            out[k][2] = read_file(dir.string() + ".stdout");
        }
        const bool eq = out[0][0] == out[1][0] && out[0][1] == out[1][1] && out[0][2] == out[1][2];
        same += eq;
        if (!eq) d += name + " differs; ";
    }
    fs::remove_all(root);
    d += std::to_string(same) + "/" + std::to_string(runs.size()) + " sweeps byte-identical (CSV, summary, stdout)";
    return {same == static_cast<int>(runs.size()), d};
}

}  // namespace

int main() {
    Runner run;
    run.run(1, "exponent calculus exactness", 6, exponent_calculus);
    run.run(2, "Cordoba tube intersections", 60, cordoba);
    run.run(3, "Kakeya delta-ball sharpness, n=3", 300, kakeya_sharpness);
    run.run(4, "Kakeya necessity slopes, n=3", 600, kakeya_necessity);
    run.run(5, "bilinear X-ray constant", 120, xray_constant);
    run.run(6, "restriction necessity slopes", 900, restriction_necessity);
    run.run(7, "localized estimates", 600, localized);
    run.run(8, "Whitney structure", 60, whitney);
    run.run(9, "appendix lemma suite", 120, lemma_suite);
    run.run(10, "rotational curvature", 60, rotational);
    run.run(11, "Calderon-Zygmund decomposition", 60, cz);
    run.run(12, "sweep determinism", 600, determinism);
    std::cout << (run.failed == 0 ? "all criteria passed" : std::to_string(run.failed) + " criteria failed") << std::endl;
    return run.failed == 0 ? 0 : 1;
}
