#include "bilab/exponents.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bilab;
using R = Rational;

namespace {

R r(long long a, long long b = 1) { return {BigInt(a), BigInt(b)}; }
R from(const oracle::Frac& f) { return r(f.n, f.d); }

}  // namespace

// ---------------------------------------------------------------- rationals

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
    EXPECT_EQ(R::parse("10/4"), r(5, 2));
    EXPECT_EQ(R::parse("-7"), r(-7));
    EXPECT_EQ(R::parse("-2.75"), r(-11, 4));
    EXPECT_EQ(R::parse(" 3/6 ").str(), "1/2");
    EXPECT_THROW(R::parse("1/0"), std::invalid_argument);
    EXPECT_THROW(R::parse("abc"), std::invalid_argument);
}

TEST(Rational, PropertyInverseAndNormalization) {
    oracle::Gen gen(11);
    for (int t = 0; t < 500; ++t) {
        auto f = gen.frac(1000, 1000);
        if (f.n == 0) continue;
        R a = from(f);
        EXPECT_EQ(a * reciprocal(a), R(1));
        // lowest terms: reparsing the printed form is the identity
        EXPECT_EQ(R::parse(a.str()), a);
        EXPECT_EQ(R::parse(a.str()).str(), a.str());
        // the 64-bit oracle and the big rational agree on sums
        auto g = gen.frac(1000, 1000);
        EXPECT_EQ(a + from(g), from(f + g));
    }
}

// ---------------------------------------------------------------- sharp line

TEST(SharpLine, Examples) {
    EXPECT_EQ(sharp_line(3, r(4)), r(2));
    EXPECT_EQ(sharp_line(3, r(103, 27)), r(103, 49));
    EXPECT_THROW(sharp_line(3, r(2)), std::domain_error);
}

TEST(SharpLine, InverseIsIdentity) {
    oracle::Gen gen(3);
    for (int t = 0; t < 200; ++t) {
        int n = static_cast<int>(gen.integer(2, 6));
        // q above (n+1)/(n-1)
        R q = r(n + 1, n - 1) + from(gen.positive_frac(50, 17));
        R p = sharp_line(n, q);
        EXPECT_EQ(sharp_line_q(n, p), q);
    }
}

// ---------------------------------------------------------------- regions

namespace {

// Spec formulas rewritten as lines a x + b y <= c with x = 1/p, y = 1/q, plus the unit square.
std::vector<oracle::Line> oracle_lines(RegionKind k, long long n) {
    using oracle::Frac;
    std::vector<oracle::Line> L = {{Frac(-1), Frac(0), Frac(0)}, {Frac(1), Frac(0), Frac(1)},
                                   {Frac(0), Frac(-1), Frac(0)}, {Frac(0), Frac(1), Frac(1)}};
    switch (k) {
        case RegionKind::bilinear_restriction_conjecture:
            L.push_back({Frac(0), Frac(1), Frac(n - 1, n)});
            L.push_back({Frac(n), Frac(n + 2, 2), Frac(n)});
            L.push_back({Frac(n - 2), Frac(n + 2, 2), Frac(n - 1)});
            break;
        case RegionKind::kakeya_bilinear_conjecture:
            L.push_back({Frac(-1), Frac(0), Frac(-1, n)});
            L.push_back({Frac(-2), Frac(-(n - 2)), Frac(-1)});
            break;
        case RegionKind::restriction_conjecture:
            L.push_back({Frac(0), Frac(1), Frac(n - 1, 2 * n)});
            L.push_back({Frac(1), Frac(n + 1, n - 1), Frac(1)});
            break;
    }
    return L;
}

}  // namespace

TEST(Region, BilinearExamples) {
    Region reg = region(RegionKind::bilinear_restriction_conjecture, 3);
    // (1/2, 3/5) saturates c1 and c2
    EXPECT_TRUE(reg.contains(r(1, 2), r(3, 5)));
    EXPECT_TRUE(reg.halfplanes[1].on_boundary(r(1, 2), r(3, 5)));
    EXPECT_TRUE(reg.halfplanes[2].on_boundary(r(1, 2), r(3, 5)));
    auto poly = region_vertices(reg);
    EXPECT_NE(std::find(poly.vertices.begin(), poly.vertices.end(), std::make_pair(r(1, 2), r(3, 5))), poly.vertices.end());
}

TEST(Region, KakeyaExamples) {
    Region reg = region(RegionKind::kakeya_bilinear_conjecture, 3);
    // Wolff point p = 5/2, q = 5 lies on k1
    EXPECT_TRUE(reg.halfplanes[1].on_boundary(r(2, 5), r(1, 5)));
    for (int n = 2; n <= 6; ++n) {
        Region rn = region(RegionKind::kakeya_bilinear_conjecture, n);
        for (const auto& h : rn.halfplanes) EXPECT_TRUE(h.on_boundary(r(1, n), r(1, n))) << "n=" << n;
    }
    auto poly = region_vertices(reg);
    EXPECT_EQ(poly.vertices.front(), std::make_pair(r(1, 3), r(1, 3)));
}

TEST(Region, SingleHalfplaneClipsSquare) {
    Region reg;
    reg.halfplanes.push_back({1, 1, 1, false, "x+y<=1"});
    auto poly = region_vertices(reg);
    ASSERT_EQ(poly.vertices.size(), 3u);
    EXPECT_EQ(poly.vertices[0], std::make_pair(r(0), r(0)));
    EXPECT_EQ(poly.vertices[1], std::make_pair(r(1), r(0)));
    EXPECT_EQ(poly.vertices[2], std::make_pair(r(0), r(1)));
}

TEST(Region, VerticesMatchBruteForceOracle) {
    for (auto kind : {RegionKind::restriction_conjecture, RegionKind::bilinear_restriction_conjecture,
                      RegionKind::kakeya_bilinear_conjecture}) {
        for (int n = 2; n <= 7; ++n) {
            auto poly = region_vertices(region(kind, n));
            auto expect = oracle::feasible_vertices(oracle_lines(kind, n));
            ASSERT_EQ(poly.vertices.size(), expect.size()) << "kind " << static_cast<int>(kind) << " n=" << n;
            for (const auto& [x, y] : expect)
                EXPECT_NE(std::find(poly.vertices.begin(), poly.vertices.end(), std::make_pair(from(x), from(y))),
                          poly.vertices.end());
            // counterclockwise, starting at the lexicographically smallest vertex
            const auto& v = poly.vertices;
            EXPECT_EQ(*std::min_element(v.begin(), v.end()), v.front());
            for (std::size_t i = 0; i < v.size() && v.size() >= 3; ++i) {
                const auto &A = v[i], &B = v[(i + 1) % v.size()], &C = v[(i + 2) % v.size()];
                R cross = (B.first - A.first) * (C.second - A.second) - (B.second - A.second) * (C.first - A.first);
                EXPECT_GT(cross, R(0));
            }
        }
    }
}

TEST(Region, HolderMonotonicitySignConditions) {
    // Every bilinear halfplane has a nonnegative 1/p coefficient, so lowering 1/p
    // at fixed 1/q keeps a feasible point feasible.
    for (int n = 2; n <= 6; ++n) {
        Region reg = region(RegionKind::bilinear_restriction_conjecture, n);
        for (const auto& h : reg.halfplanes) EXPECT_GE(h.a, R(0));
        oracle::Gen gen(static_cast<std::uint64_t>(n));
        for (int t = 0; t < 200; ++t) {
            R x = r(gen.integer(0, 60), 60), y = r(gen.integer(0, 60), 60);
            if (!reg.contains(x, y)) continue;
            EXPECT_TRUE(reg.contains(x * r(gen.integer(0, 10), 10), y));
        }
    }
}

TEST(Region, ParseKind) {
    EXPECT_EQ(parse_region_kind("bilinear-restriction"), RegionKind::bilinear_restriction_conjecture);
    EXPECT_EQ(parse_region_kind("kakeya-bilinear"), RegionKind::kakeya_bilinear_conjecture);
    EXPECT_THROW(parse_region_kind("nonsense"), std::invalid_argument);
}

// ---------------------------------------------------------------- interpolation

TEST(Interpolate, Examples) {
    const auto bil = EstimateKind::bilinear;
    EstimatePoint a{r(3, 7), r(11, 21), std::nullopt, bil, false};
    EstimatePoint b{r(7, 12), r(1, 2), std::nullopt, bil, false};
    auto c = interpolate(a, b, r(4, 11));
    EXPECT_EQ(c.inv_p, r(16, 33));
    EXPECT_EQ(c.inv_q, r(17, 33));
    EXPECT_EQ(c.inv_p + c.inv_q, R(1));
    EXPECT_EQ(r(2) * c.q(), r(4) - r(2, 17));
    EXPECT_EQ(interpolate(a, b, R(0)), a);
    EstimatePoint m1{r(1, 2), r(1, 2), std::nullopt, bil, false}, m2{r(1, 2), r(1, 4), std::nullopt, bil, false};
    EXPECT_EQ(interpolate(m1, m2, r(1, 2)).inv_q, r(3, 8));
    EstimatePoint lin{r(1, 2), r(1, 2), std::nullopt, EstimateKind::linear, false};
    EXPECT_THROW(interpolate(a, lin, r(1, 2)), std::invalid_argument);
    EXPECT_THROW(interpolate(a, b, r(3, 2)), std::domain_error);
}

// ---------------------------------------------------------------- lemma alpha

TEST(LemmaAlpha, Examples) {
    auto m = lemma_alpha(r(5, 2), r(10, 3), r(3, 80), 3);
    EXPECT_EQ(m.q_tilde_inf, r(34, 9));
    EXPECT_EQ(m.ratio_sup, r(77, 45));
    EXPECT_EQ(m.p_tilde_inf(), r(170, 77));
    EXPECT_EQ(lemma_alpha(r(20, 7), r(10, 3), r(1, 20), 3).q_tilde_inf, r(42, 11));
    for (int k = 1; k <= 20; ++k) {
        R q = r(k, 3);
        EXPECT_EQ(lemma_alpha(q, q, R(0), 3).q_tilde_inf, R(2) + q / 2);
    }
    EXPECT_THROW(lemma_alpha(r(2), r(4), r(1, 2), 3), std::domain_error);
}

TEST(LemmaAlpha, DecreasingAlphaGivesSmallerQTilde) {
    oracle::Gen gen(5);
    for (int t = 0; t < 300; ++t) {
        R p = r(gen.integer(11, 60), 10), q = r(gen.integer(11, 60), 10);
        R a1 = r(gen.integer(0, 100), 1000), a2 = a1 + r(gen.integer(1, 100), 1000);
        if (R(2) <= a2 * q) continue;  // (n+1)/2 = 2 for n = 3
        EXPECT_LT(lemma_alpha(p, q, a1, 3).q_tilde_inf, lemma_alpha(p, q, a2, 3).q_tilde_inf);
    }
}

// ---------------------------------------------------------------- bootstrap

TEST(Bootstrap, FixedPointAndContraction) {
    EXPECT_EQ(bootstrap_fixed_point(), r(3, 20));
    EXPECT_EQ(bootstrap_map(r(3, 20)), r(3, 20));
    EXPECT_EQ(bootstrap_map(R(1)), r(8, 25));
    R a = 1;
    for (int k = 1; k <= 60; ++k) {
        a = bootstrap_map(a);
        // |a_k - 3/20| = 5^{-k} * 17/20 exactly
        R err = abs(a - r(3, 20));
        R bound = r(17, 20);
        for (int j = 0; j < k; ++j) bound = bound / 5;
        EXPECT_EQ(err, bound);
    }
    EXPECT_LT(abs(a - r(3, 20)).to_double(), 1e-12);
    oracle::Gen gen(9);
    for (int t = 0; t < 100; ++t) {
        R x = from(gen.frac(100, 50)), y = from(gen.frac(100, 50));
        EXPECT_EQ(abs(bootstrap_map(x) - bootstrap_map(y)), abs(x - y) / 5);
    }
    // the same map recovered from the interpolation step
    for (int t = 0; t < 50; ++t) {
        R x = r(gen.integer(0, 200), 200);
        EXPECT_EQ(bootstrap_by_interpolation(x), bootstrap_map(x));
    }
}

// ---------------------------------------------------------------- modest threshold

TEST(Modest, Examples) {
    EXPECT_EQ(modest_threshold(3), r(12, 7));
    EXPECT_EQ(modest_threshold(2), r(2));
    EXPECT_EQ(modest_threshold(4), r(8, 5));
}

// ---------------------------------------------------------------- whitney exponents

TEST(WhitneyExponent, Examples) {
    auto w = whitney_exponent_check(3, r(2), r(199, 100), r(2));
    EXPECT_TRUE(w.feasible);
    EXPECT_GT(w.epsilon, R(0));
    EXPECT_FALSE(whitney_exponent_check(3, r(2), r(2), r(2)).feasible);
    auto b = whitney_exponent_check(3, r(2), r(199, 100), r(3, 2));
    EXPECT_FALSE(b.feasible);
    EXPECT_EQ(b.epsilon, R(0));
}

TEST(WhitneyExponent, EpsilonSatisfiesEveryCorner) {
    oracle::Gen gen(21);
    int feasible = 0;
    for (int t = 0; t < 300; ++t) {
        int n = static_cast<int>(gen.integer(2, 5));
        R p = r(gen.integer(11, 40), 10), pt = p - r(gen.integer(1, 30), 100), q = r(gen.integer(11, 60), 10);
        auto w = whitney_exponent_check(n, p, pt, q);
        if (!w.feasible) continue;
        ++feasible;
        // corners: LHS <= -eps q |j - j0|
        EXPECT_LE(w.case_j0_zero, -w.epsilon * q);
        EXPECT_LE(w.case_j_zero, -w.epsilon * q);
        if (!w.uses_exp2) {
            EXPECT_LE(w.case_diag, R(0));
        }
    }
    EXPECT_GT(feasible, 10);
}

// ---------------------------------------------------------------- x_imply

TEST(XImply, Examples) {
    auto x = x_imply(r(170, 77), r(34, 9));
    EXPECT_EQ(x.w, r(35, 9));
    EXPECT_EQ(x.w, r(4) - r(1, 9));
    EXPECT_EQ(x.r, r(60, 31));
    EXPECT_TRUE(x.applicable);
    EXPECT_EQ(x_imply_collinearity(r(170, 77), r(34, 9)), R(0));
    EXPECT_THROW(x_imply(r(2), r(4)), std::domain_error);
    EXPECT_THROW(x_imply(r(2), r(2)), std::domain_error);
}

TEST(XImply, CollinearForRandomQ) {
    oracle::Gen gen(33);
    for (int t = 0; t < 100; ++t) {
        R q = r(2) + r(gen.integer(1, 999), 500);
        R p = r(gen.integer(101, 400), 100);
        EXPECT_EQ(x_imply_collinearity(p, q), R(0));
    }
}

TEST(XImply, ApplicabilityMatchesFloatingComparisonAwayFromTheBoundary) {
    oracle::Gen gen(34);
    const double threshold = 4 * (std::sqrt(2.0) - 1);
    for (int t = 0; t < 300; ++t) {
        R q = r(2) + r(gen.integer(1, 999), 500);
        R p = r(gen.integer(101, 800), 100);
        auto x = x_imply(p, q);
        double rv = x.r.to_double();
        if (std::abs(rv - threshold) < 1e-9) continue;
        EXPECT_EQ(x.applicable, rv > threshold);
    }
}

// ---------------------------------------------------------------- catalog and chain

TEST(Table1, Rows) {
    auto rows = table1_catalog();
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[5].point.p(), r(42, 11));
    EXPECT_EQ(rows[5].point.q(), r(42, 11));
    EXPECT_EQ(rows[7].point.p(), r(170, 77));
    EXPECT_EQ(rows[7].point.q(), r(34, 9));
    EXPECT_TRUE(rows[8].sharp);
    EXPECT_EQ(rows[8].point.q(), r(103, 27));
    EXPECT_EQ(rows[3].point.p(), sharp_line(3, r(4)));
    EXPECT_TRUE(rows[2].point.open);
    EXPECT_EQ(rows[0].point.inv_q, R(0));
}

TEST(MainChain, Exponents) {
    auto c = main_chain();
    EXPECT_EQ(c.fixed_point, r(3, 20));
    EXPECT_EQ(c.halved_once, r(3, 40));
    EXPECT_EQ(c.halved_twice, r(3, 80));
    EXPECT_EQ(c.global.q_tilde_inf, r(34, 9));
    EXPECT_EQ(c.global.p_tilde_inf(), r(170, 77));
    EXPECT_EQ(c.trace_interpolant.p(), r(30, 17));
    EXPECT_EQ(c.trace_interpolant.q(), r(5, 3));
    EXPECT_EQ(*c.trace_interpolant.alpha, r(1, 5));
    EXPECT_EQ(c.sharp_point.inv_p + c.sharp_point.inv_q, R(1));
    EXPECT_EQ(r(2) * c.sharp_point.q(), r(103, 27));
    EXPECT_EQ(c.beta_point.p(), r(2));
    EXPECT_EQ(c.beta_point.q(), r(133, 69));
}
