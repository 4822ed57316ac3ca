#include <gtest/gtest.h>

#include <random>

#include "parabolic/parse.hpp"

using namespace parabolic;

namespace {

// Independent oracle: closed-form roots of a z^2 + b z + c.
std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c) {
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    const Complex q = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
    return {q / a, c / q};
}

double nearest(const std::vector<Root>& rs, Complex z) {
    double d = 1e300;
    for (auto& r : rs) d = std::min(d, std::abs(r.value - z));
    return d;
}

}  // namespace

TEST(Poly, HornerMatchesDirectSum) {
    Poly p{1.0, Complex(0, 2), -3.0, 0.5};
    const Complex z(0.3, -1.1);
    Complex direct = 1.0 + Complex(0, 2) * z - 3.0 * z * z + 0.5 * z * z * z;
    EXPECT_LT(std::abs(p(z) - direct), 1e-14);
}

TEST(Poly, TrimsTrailingZeros) {
    Poly p{1.0, 2.0, 0.0, 0.0};
    EXPECT_EQ(p.degree(), 1);
    EXPECT_TRUE(Poly{}.is_zero());
}

TEST(Poly, ComposeAndPow) {
    const Poly f{0.0, 1.0, 1.0};  // z + z^2
    const Poly ff = f.compose(f);
    // z + 2z^2 + 2z^3 + z^4
    EXPECT_EQ(ff, (Poly{0.0, 1.0, 2.0, 2.0, 1.0}));
    EXPECT_EQ((Poly{1.0, 1.0}).pow(3), (Poly{1.0, 3.0, 3.0, 1.0}));
}

TEST(Parse, PolynomialLiterals) {
    const MapExpr f = parse_map("z + z^4 + 0.01");
    EXPECT_TRUE(f.is_polynomial());
    EXPECT_EQ(f.degree(), 4);
    EXPECT_EQ(f.num(), (Poly{0.01, 1.0, 0.0, 0.0, 1.0}));
    const MapExpr g = parse_map("(0.9+0i)*z + z^2");
    EXPECT_EQ(g.num(), (Poly{0.0, 0.9, 1.0}));
    const MapExpr h = parse_map("a*z + z^2", {{"a", Complex(1, 0.25)}});
    EXPECT_EQ(h.num().coeff(1), Complex(1, 0.25));
    EXPECT_EQ(parse_map("2i*z").num().coeff(1), Complex(0, 2));
}

TEST(Parse, RationalReducesCommonFactors) {
    const MapExpr f = parse_map("(z^2 - 1)/(z - 1)");
    EXPECT_TRUE(f.is_polynomial());
    EXPECT_LT(std::abs(f.eval(3.0) - 4.0), 1e-12);
    const MapExpr g = parse_map("1/z");
    EXPECT_FALSE(g.is_polynomial());
    EXPECT_EQ(g.degree(), 1);
}

TEST(Parse, ErrorsCarryColumn) {
    try {
        parse_map("z + * 2");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.column(), 5);
    }
    EXPECT_THROW(parse_map("z + w"), ParseError);
    EXPECT_THROW(parse_map("z^(1/2)"), ParseError);
    EXPECT_THROW(parse_map("(z + 1"), ParseError);
    EXPECT_THROW(parse_scalar("z + 1"), ParseError);
}

TEST(Parse, ScalarExpressions) {
    EXPECT_LT(std::abs(parse_scalar("1 - 1/n", {{"n", 4.0}}) - 0.75), 1e-15);
    EXPECT_LT(std::abs(parse_scalar("-exp(i/n)", {{"n", 2.0}}) + std::exp(Complex(0, 0.5))), 1e-15);
    EXPECT_LT(std::abs(parse_scalar("1e-4") - 1e-4), 1e-20);
}

TEST(MapExpr, PoleAndOverflow) {
    const MapExpr g = parse_map("1/z");
    try {
        g.eval(0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PoleHit);
    }
    const MapExpr f = parse_map("z^2");
    try {
        iterate(f, 10.0, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Overflow);
    }
}

TEST(MapExpr, DerivativeQuotientRule) {
    const MapExpr f = parse_map("z^2/(z - 3)");
    const MapExpr df = f.derivative();
    const Complex z(0.4, 0.7);
    const double h = 1e-6;
    const Complex fd = (f.eval(z + h) - f.eval(z - h)) / (2 * h);
    EXPECT_LT(std::abs(df.eval(z) - fd), 1e-8);
}

TEST(MapExpr, FixedPointPolyDegreeAndGuard) {
    const MapExpr f = parse_map("z + z^2");
    EXPECT_EQ(fixed_point_poly(f, 3).degree(), 8);
    try {
        fixed_point_poly(f, 7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegreeGuard);
    }
}

TEST(Roots, FixedPointsOfCubicPerturbation) {
    // z + z^4 + 0.01: fixed points solve z^4 = -0.01
    const auto rs = roots(fixed_point_poly(parse_map("z + z^4 + 0.01"), 1));
    ASSERT_EQ(rs.size(), 4u);
    for (int k = 0; k < 4; ++k) {
        const Complex expect = std::polar(std::sqrt(0.1), pi / 4 + k * pi / 2);
        EXPECT_LT(nearest(rs, expect), 1e-12);
    }
}

TEST(Roots, MultipleRootsCarryMultiplicity) {
    const auto a = roots(fixed_point_poly(parse_map("z + z^2"), 1));
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].multiplicity, 2);
    const auto b = roots(fixed_point_poly(parse_map("-z + z^2"), 2));  // z^3 (z - 2)
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0].multiplicity, 3);
    EXPECT_LT(std::abs(b[0].value), 1e-12);
    const auto c = roots(Poly{1.0, -3.0, 3.0, -1.0});  // (1 - z)^3, inexact shift
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].multiplicity, 3);
    EXPECT_LT(std::abs(c[0].value - 1.0), 1e-9);
}

TEST(Roots, CloseButDistinctRootsStaySeparate) {
    const auto rs = roots(Poly{-1e-12, 0.0, 1.0});
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_LT(nearest(rs, 1e-6), 1e-15);
}

TEST(Roots, PropertyRandomQuadraticsAgainstClosedForm) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        const Complex a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
        if (std::abs(a) < 0.1) continue;
        const auto rs = roots(Poly{c, b, a});
        const auto [r1, r2] = quadratic_roots(a, b, c);
        const double sep = std::abs(r1 - r2);
        if (sep < 1e-6) continue;
        ASSERT_EQ(rs.size(), 2u);
        EXPECT_LT(nearest(rs, r1), 1e-10 * (1 + std::abs(r1)));
        EXPECT_LT(nearest(rs, r2), 1e-10 * (1 + std::abs(r2)));
    }
}

TEST(Roots, PropertyMultiplicitiesSumToDegree) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const int d = 2 + t % 7;
        std::vector<Complex> c(static_cast<std::size_t>(d) + 1);
        for (auto& x : c) x = Complex(u(rng), u(rng));
        const Poly p(c);
        const auto rs = roots(p);
        int total = 0;
        for (auto& r : rs) {
            total += r.multiplicity;
            EXPECT_LE(std::abs(p(r.value)), 1e-9 * p.max_abs_coeff());
        }
        EXPECT_EQ(total, d);
    }
}
