#include <gtest/gtest.h>

#include <random>

#include "parabolic/fixsplit.hpp"
#include "parabolic/parse.hpp"

using namespace parabolic;

TEST(Index, SimpleFixedPointMatchesMultiplier) {
    EXPECT_LT(std::abs(holomorphic_index(parse_map("0.5*z + z^2"), 1, 0.0) - 2.0), 1e-10);
}

TEST(Index, ParabolicDoublePointIsZero) {
    EXPECT_LT(std::abs(holomorphic_index(parse_map("z + z^2"), 1, 0.0, 0.1)), 1e-12);
}

TEST(Index, ContourThroughFixedPoint) {
    try {
        holomorphic_index(parse_map("z + z^2 - 0.01"), 1, 0.0, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FixedPointOnContour);
    }
}

TEST(Index, UnconvergedQuadratureIsReported) {
    NumericConfig cfg;
    cfg.quad_nodes_max = 1024;
    try {
        holomorphic_index(parse_map("z + z^2 - 0.01"), 1, 0.1, 1e-9 + 0.2, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoQuadConvergence);
    }
}

TEST(Horocyclic, Values) {
    EXPECT_DOUBLE_EQ(horocyclic_statistic(0.5), 2.0);
    EXPECT_NEAR(horocyclic_statistic(std::exp(Complex(0, 0.3))), 0.5, 1e-14);
    try {
        horocyclic_statistic(1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AtParabolic);
    }
}

TEST(Split, QuadraticPerturbationIsStar) {
    const auto rep = split_fixed_points(parse_map("z + z^2 - 0.0001"), 0.0, 0.5);
    ASSERT_EQ(rep.points.size(), 2u);
    EXPECT_EQ(rep.multiplicity, 2);
    EXPECT_EQ(rep.classification, SplitClass::Star);
    for (const auto& p : rep.points) EXPECT_NEAR(std::abs(p.point), 0.01, 1e-12);
}

TEST(Split, QuarticPerturbationIsBalanced) {
    const auto rep = split_fixed_points(parse_map("z + z^4 + 0.0001"), 0.0, 0.5);
    EXPECT_EQ(rep.multiplicity, 4);
    EXPECT_EQ(rep.classification, SplitClass::Balanced);
}

TEST(Split, UnperturbedIsDegenerate) {
    const auto rep = split_fixed_points(parse_map("z + z^2"), 0.0, 0.5);
    EXPECT_EQ(rep.multiplicity, 2);
    EXPECT_EQ(rep.classification, SplitClass::Degenerate);
    ASSERT_EQ(rep.points.size(), 1u);
    EXPECT_FALSE(rep.points[0].horo_stat.has_value());
}

TEST(Split, BoundaryRoot) {
    try {
        split_fixed_points(parse_map("z + z^2 - 0.0001"), 0.0, 0.01);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BoundaryRoot);
    }
}

TEST(Split, PeriodTwoCluster) {
    const auto rep = split_fixed_points(parse_map("a*z + z^2", {{"a", -0.99}}), 0.0, 0.5, 2);
    EXPECT_EQ(rep.multiplicity, 3);
    EXPECT_EQ(rep.points.size(), 3u);
}

TEST(Split, CsvFormat) {
    std::ostringstream os;
    write_csv(os, split_fixed_points(parse_map("z + z^2 - 0.0001"), 0.0, 0.5));
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "n,point_re,point_im,mult_re,mult_im,index_re,index_im,horo_stat,class");
    EXPECT_NE(s.find(",Star\n"), std::string::npos);
}

TEST(Split, PropertyIndicesSumToZeroOverAllFixedPoints) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const int d = 2 + t % 4;
        std::vector<Complex> c(static_cast<std::size_t>(d) + 1);
        for (auto& x : c) x = Complex(u(rng), u(rng));
        c.back() = 1.0;
        const MapExpr f{Poly(c)};
        const auto rep = split_fixed_points(f, 0.0, 1e3);
        Complex sum{};
        for (auto& p : rep.points) sum += p.index;
        EXPECT_LT(std::abs(sum), 1e-8);
        for (auto& p : rep.points) {
            if (!p.horo_stat) continue;
            EXPECT_LT(std::abs(p.index - 1.0 / (1.0 - p.multiplier)), 1e-8 * std::max(1.0, std::abs(p.index)));
        }
    }
}

TEST(Horocyclic, RadialFamilyDiverges) {
    std::vector<SplittingReport> reps;
    for (int n = 2; n <= 256; n *= 2)
        reps.push_back(split_fixed_points(parse_map("a*z + z^2", {{"a", 1.0 - 1.0 / n}}), 0.0, 0.75));
    const auto v = classify_horocyclic(reps);
    ASSERT_EQ(v.tracks.size(), 2u);
    int plus = 0, minus = 0;
    for (auto& t : v.tracks) {
        plus += t.verdict == Tendency::PlusInf;
        minus += t.verdict == Tendency::MinusInf;
    }
    EXPECT_EQ(plus, 1);
    EXPECT_EQ(minus, 1);
    EXPECT_EQ(v.ell, 1);
}

TEST(Horocyclic, TangentialFamilyBounded) {
    std::vector<SplittingReport> reps;
    for (int n = 2; n <= 256; n *= 2)
        reps.push_back(split_fixed_points(parse_map("a*z + z^2", {{"a", Complex(1.0, 1.0 / n)}}), 0.0, 0.75));
    const auto v = classify_horocyclic(reps);
    for (auto& t : v.tracks) EXPECT_EQ(t.verdict, Tendency::Bounded);
    EXPECT_EQ(v.ell, 0);
}

TEST(Horocyclic, InvariantUnderReordering) {
    std::vector<SplittingReport> reps;
    for (int n = 100; n <= 12800; n *= 2)
        reps.push_back(split_fixed_points(parse_map("z + z^4 + c", {{"c", 1.0 / n}}), 0.0, 0.5));
    const auto a = classify_horocyclic(reps);
    for (auto& r : reps) std::reverse(r.points.begin(), r.points.end());
    const auto b = classify_horocyclic(reps);
    EXPECT_EQ(a.ell, b.ell);
    EXPECT_EQ(a.ell, 4);
}
