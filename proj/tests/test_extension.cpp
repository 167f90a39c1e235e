#include "bilab/extension.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace bilab;

namespace {

CapFunction with_density(Vec lo, Vec hi, std::function<cplx(const double*)> d) {
    auto f = CapFunction::indicator(std::move(lo), std::move(hi));
    f.density = std::move(d);
    return f;
}

// Smooth non-separable test density.
cplx smooth_density(const double* y, int dim) {
    double s = 0, t = 0;
    for (int k = 0; k < dim; ++k) s += y[k], t += (k + 1) * y[k] * y[k];
    return {1.0 + 0.5 * s, 0.3 * t};
}

}  // namespace

// ---------------------------------------------------------------- evaluate_extension

TEST(Extension, OneAtOriginIsMeasureOfQ) {
    for (int n = 2; n <= 4; ++n) {
        const auto d = static_cast<std::size_t>(n - 1);
        auto f = CapFunction::indicator(Vec(d, -1.0), Vec(d, 1.0));
        auto v = evaluate_extension(f, make_quadratic_phase(n - 1), {Vec(d + 1, 0.0)}, 8);
        EXPECT_NEAR(v[0].real(), std::pow(2.0, n - 1), 1e-12);
        EXPECT_NEAR(v[0].imag(), 0.0, 1e-12);
    }
}

TEST(Extension, ModulationCovariance) {
    oracle::Gen gen(1);
    for (int n = 2; n <= 3; ++n) {
        const auto d = static_cast<std::size_t>(n - 1);
        for (bool general : {false, true}) {
            CapFunction f = general ? with_density(Vec(d, -0.5), Vec(d, 0.75),
                                                   [n](const double* y) { return smooth_density(y, n - 1); })
                                    : CapFunction::indicator(Vec(d, -0.5), Vec(d, 0.75));
            auto phi = general ? make_perturbed_phase(n - 1, 0.1) : make_quadratic_phase(n - 1);
            Vec a(d + 1);
            for (auto& v : a) v = gen.real(-3, 3);
            std::vector<Vec> pts, shifted;
            for (int t = 0; t < 10; ++t) {
                Vec x(d + 1);
                for (auto& v : x) v = gen.real(-4, 4);
                pts.push_back(x);
                Vec s = x;
                for (std::size_t k = 0; k <= d; ++k) s[k] += a[k];
                shifted.push_back(s);
            }
            auto g = f;
            g.modulation = a;
            auto lhs = evaluate_extension(g, phi, pts, 96);
            auto rhs = evaluate_extension(f, phi, shifted, 96);
            for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(lhs[i] - rhs[i]), 1e-10);
        }
    }
}

TEST(Extension, QuadraticDecayAgainstQuadratureOracle) {
    // n = 3, f = 1 on Q, points (0, 0, t)
    auto f = CapFunction::indicator({-1, -1}, {1, 1});
    auto phi = make_quadratic_phase(2);
    auto v = evaluate_extension(f, phi, {{0, 0, 16}}, 4096);
    auto ref = oracle::extension_quadratic({-1, -1}, {1, 1}, {0, 0, 16}, 8192);
    EXPECT_LT(std::abs(v[0] - ref), 1e-6);
    std::vector<std::pair<double, double>> pts;
    for (double t : {8.0, 16.0, 32.0}) pts.emplace_back(t, std::abs(evaluate_extension(f, phi, {{0, 0, t}}, 4096)[0]));
    EXPECT_NEAR(oracle::loglog_slope(pts), -1.0, 0.1);
}

TEST(Extension, GeneralPathMatchesOracle) {
    // a non-separable density that happens to be constant goes through the general quadrature
    auto f = with_density({-0.5, -0.25}, {0.5, 1.0}, [](const double*) { return cplx(1.0); });
    auto v = evaluate_extension(f, make_quadratic_phase(2), {{1.5, -2.0, 3.0}}, 64);
    auto ref = oracle::extension_quadratic({-0.5, -0.25}, {0.5, 1.0}, {1.5, -2.0, 3.0}, 64);
    EXPECT_LT(std::abs(v[0] - ref), 1e-12);
}

TEST(Extension, Linearity) {
    oracle::Gen gen(2);
    auto phi = make_perturbed_phase(2, 0.05);
    auto d1 = [](const double* y) { return cplx(std::cos(3 * y[0]), y[1]); };
    auto d2 = [](const double* y) { return cplx(y[0] * y[1], 1.0); };
    const cplx a{1.5, -0.5}, b{-2.0, 0.25};
    auto f = with_density({-1, -1}, {1, 1}, d1), g = with_density({-1, -1}, {1, 1}, d2);
    auto h = with_density({-1, -1}, {1, 1}, [=](const double* y) { return a * d1(y) + b * d2(y); });
    std::vector<Vec> pts;
    for (int t = 0; t < 12; ++t) pts.push_back({gen.real(-3, 3), gen.real(-3, 3), gen.real(-3, 3)});
    auto vf = evaluate_extension(f, phi, pts, 64), vg = evaluate_extension(g, phi, pts, 64),
         vh = evaluate_extension(h, phi, pts, 64);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(vh[i] - (a * vf[i] + b * vg[i])), 1e-12);
}

TEST(Extension, BoundedByL1Norm) {
    oracle::Gen gen(3);
    for (int t = 0; t < 10; ++t) {
        auto f = random_phase_cap({-1, -0.5}, {0.5, 1}, 7, static_cast<std::uint64_t>(t));
        const double amp = gen.real(0.1, 4);
        f.amplitude = amp;
        auto phi = make_quadratic_phase(2);
        std::vector<Vec> pts;
        for (int k = 0; k < 30; ++k) pts.push_back({gen.real(-6, 6), gen.real(-6, 6), gen.real(-6, 6)});
        const std::vector<std::size_t> counts{128, 128};
        double l1 = cap_norm(f, 1.0, counts);
        EXPECT_NEAR(l1, amp * 1.5 * 1.5, 1e-12);
        for (auto v : evaluate_extension(f, phi, pts, counts)) EXPECT_LE(std::abs(v), l1 * (1 + 1e-12));
    }
}

TEST(Extension, ParabolicRescalingCovariance) {
    // R*f(2^j x, 2^{2j} x_n) = 2^{-dj} R*[f(2^{-j} .)](x, x_n) for the quadratic phase,
    // f supported in 2^{-j} Q; evaluation of f uses the rescaled phase (identical here).
    oracle::Gen gen(4);
    for (int dim = 1; dim <= 2; ++dim) {
        const auto d = static_cast<std::size_t>(dim);
        for (int j = 1; j <= 3; ++j) {
            const double s = std::ldexp(1.0, -j);
            auto dens = [dim](const double* y) { return smooth_density(y, dim); };
            auto f = with_density(Vec(d, -s), Vec(d, s), dens);
            auto g = with_density(Vec(d, -1.0), Vec(d, 1.0), [dens, s, dim](const double* z) {
                double y[2];
                for (int k = 0; k < dim; ++k) y[k] = s * z[k];
                return dens(y);
            });
            auto phi = make_quadratic_phase(dim);
            auto phit = parabolic_rescale(phi, j, Vec(d, 0.0));
            for (int t = 0; t < 8; ++t) {
                Vec x(d + 1), X(d + 1);
                for (std::size_t k = 0; k < d; ++k) {
                    x[k] = gen.real(-1, 1);
                    X[k] = x[k] / s;
                }
                x[d] = gen.real(-1, 1);
                X[d] = x[d] / (s * s);
                cplx lhs = evaluate_extension(f, phit, {X}, 64)[0];
                cplx rhs = std::pow(s, dim) * evaluate_extension(g, phi, {x}, 64)[0];
                EXPECT_LT(std::abs(lhs - rhs), 1e-8) << "dim " << dim << " j " << j;
            }
        }
    }
}

TEST(Extension, GuardNamesRequiredGrid) {
    auto f = CapFunction::indicator({-1}, {1});
    try {
        evaluate_extension(f, make_quadratic_phase(1), {{10.0, 0.0}}, 8);
        FAIL() << "expected GuardError";
    } catch (const GuardError& e) {
        // h (|x|) <= 1/4 with h = 2/N  =>  N >= 80
        EXPECT_EQ(e.required, 80.0);
        EXPECT_NE(std::string(e.what()).find("80"), std::string::npos);
    }
    EXPECT_NO_THROW(evaluate_extension(f, make_quadratic_phase(1), {{10.0, 0.0}}, 80));
}

TEST(Extension, CapValidation) {
    auto phi = make_quadratic_phase(1);
    EXPECT_THROW(evaluate_extension(CapFunction::indicator({0.5}, {0.5}), phi, {{0, 0}}, 8), std::domain_error);
    EXPECT_THROW(evaluate_extension(CapFunction::indicator({-2}, {0}), phi, {{0, 0}}, 8), std::domain_error);
    EXPECT_THROW(evaluate_extension(CapFunction::indicator({0}, {1}), phi, {{0, 0, 0}}, 8), std::invalid_argument);
}

// ---------------------------------------------------------------- localized ratios

TEST(LocalRatio, ScalarInvarianceAndErrors) {
    auto phi = make_quadratic_phase(1);
    auto f = random_phase_cap({-1}, {-0.25}, 5, 1), g = random_phase_cap({0.25}, {1}, 5, 2);
    auto base = local_ratio(f, nullptr, phi, 2, 4, 8, 128);
    auto bil = local_ratio(f, &g, phi, 2, 2, 8, 128);
    auto f3 = f, g3 = g;
    f3.amplitude = {0, 3};
    g3.amplitude = -0.5;
    EXPECT_NEAR(local_ratio(f3, nullptr, phi, 2, 4, 8, 128).value, base.value, 1e-12 * base.value);
    EXPECT_NEAR(local_ratio(f3, &g3, phi, 2, 2, 8, 128).value, bil.value, 1e-12 * bil.value);
    EXPECT_GT(base.value, 0);
    EXPECT_TRUE(bil.bilinear);

    auto zero = f;
    zero.amplitude = 0;
    EXPECT_THROW(local_ratio(zero, nullptr, phi, 2, 4, 8, 128), std::domain_error);
    auto near = CapFunction::indicator({-0.2}, {0.1});
    EXPECT_THROW(local_ratio(f, &near, phi, 2, 2, 8, 128), std::domain_error);
    EXPECT_THROW(local_ratio(f, nullptr, phi, 2, 4, 0.5, 128), std::domain_error);
    EXPECT_THROW(local_ratio(f, nullptr, phi, 2, 4, 8, 4), GuardError);
}

TEST(LocalRatio, PlanarBilinearL2IsScaleFree) {
    // n = 2, p = q = 2: the ratio stays flat in R
    auto phi = make_quadratic_phase(1);
    auto f = CapFunction::indicator({-1}, {-0.25}), g = CapFunction::indicator({0.25}, {1});
    std::vector<std::pair<double, double>> pts;
    for (double R : {8.0, 16.0, 32.0, 64.0}) pts.emplace_back(R, local_ratio(f, &g, phi, 2, 2, R, 512).value);
    EXPECT_NEAR(oracle::loglog_slope(pts), 0.0, 0.2);
}

TEST(LocalRatio, BallMatchesDirectSum) {
    // the tensor-grid norm equals a plain loop over the lattice points of B_R
    auto phi = make_quadratic_phase(1);
    auto f = random_phase_cap({-1}, {-0.25}, 3, 9);
    const double R = 4, sp = 0.25;
    auto r = local_ratio(f, nullptr, phi, 2, 3, R, 64);
    std::vector<Vec> pts;
    for (int a = -16; a <= 16; ++a)
        for (int b = -16; b <= 16; ++b)
            if (a * a + b * b <= 256) pts.push_back({a * sp, b * sp});
    double s = 0;
    for (auto v : evaluate_extension(f, phi, pts, 64)) s += std::pow(std::abs(v), 3);
    double num = std::pow(s * sp * sp, 1.0 / 3);
    EXPECT_NEAR(r.numerator, num, 1e-10 * num);
    EXPECT_NEAR(r.denominator, std::sqrt(0.75), 1e-12);
}

// ---------------------------------------------------------------- annulus form

TEST(Annulus, HomogeneityAndZero) {
    auto phi = make_quadratic_phase(1);
    const double R = 8;
    auto f = build_annulus(phi, {-1}, {-0.25}, R, 1 / (4 * R));
    auto g = build_annulus(phi, {0.25}, {1}, R, 1 / (4 * R));
    double base = annulus_ratio(f, g, 2, R);
    auto f3 = f;
    for (auto& v : f3.grid.samples) v *= 3.0;
    EXPECT_NEAR(annulus_ratio(f3, g, 2, R), base, 1e-10 * base);
    auto z = f;
    for (auto& v : z.grid.samples) v = 0;
    EXPECT_THROW(annulus_ratio(z, z, 2, R), std::domain_error);
    auto bad = f;
    bad.grid.samples[0] = 1.0;  // corner cell lies off the thickened graph
    EXPECT_THROW(annulus_ratio(bad, g, 2, R), std::domain_error);
}

TEST(Annulus, SlopeAgreesWithLocalRatio) {
    auto phi = make_quadratic_phase(1);
    auto fc = CapFunction::indicator({-1}, {-0.25}), gc = CapFunction::indicator({0.25}, {1});
    std::vector<std::pair<double, double>> ann, loc;
    for (double R : {8.0, 16.0, 32.0}) {
        auto f = build_annulus(phi, {-1}, {-0.25}, R, 1 / (4 * R));
        auto g = build_annulus(phi, {0.25}, {1}, R, 1 / (4 * R));
        ann.emplace_back(R, annulus_ratio(f, g, 2, R));
        loc.emplace_back(R, local_ratio(fc, &gc, phi, 2, 2, R, 512).value);
    }
    EXPECT_NEAR(oracle::loglog_slope(ann), oracle::loglog_slope(loc), 0.25);
}

// ---------------------------------------------------------------- rotational curvature

TEST(Rotational, QuadraticExamples) {
    auto phi = make_quadratic_phase(2);
    EXPECT_NEAR(rotational_curvature(phi, {0.8, 0}, {0.6, 0}), 0.36, 1e-8);
    EXPECT_NEAR(rotational_curvature(phi, {0.3, -0.2}, {0, 0}), 0.0, 1e-8);
    oracle::Gen gen(5);
    for (int t = 0; t < 50; ++t) {
        Vec y{gen.real(-0.9, 0.9), gen.real(-0.9, 0.9)}, w{gen.real(-0.9, 0.9), gen.real(-0.9, 0.9)};
        EXPECT_NEAR(rotational_curvature(phi, y, w), w[0] * w[0] + w[1] * w[1], 1e-8);
    }
    auto phi1 = make_quadratic_phase(1);
    EXPECT_NEAR(rotational_curvature(phi1, {0.5}, {-0.4}), 0.16, 1e-8);
}

TEST(Rotational, PerturbedPhaseStaysNearQuadratic) {
    const double eps = 0.05;
    auto phi = make_perturbed_phase(2, eps);
    oracle::Gen gen(6);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        Vec y{gen.real(-0.9, 0.9), gen.real(-0.9, 0.9)}, w{gen.real(-0.9, 0.9), gen.real(-0.9, 0.9)};
        double w2 = w[0] * w[0] + w[1] * w[1], y2 = y[0] * y[0] + y[1] * y[1];
        double C = std::abs(rotational_curvature(phi, y, w) - w2) / (eps * (y2 + w2));
        worst = std::max(worst, C);
    }
    EXPECT_LE(worst, 10.0);
    EXPECT_THROW(rotational_curvature(phi, {1.9, 0}, {-0.5, 0}), std::domain_error);
}
