#include <gtest/gtest.h>

#include <sstream>

#include "parabolic/extray.hpp"
#include "parabolic/parse.hpp"

using namespace parabolic;

namespace {
double analytic_deviation(const RaySample& r) {
    double worst = 0.0;
    for (const auto& [t, z] : r.samples) worst = std::max(worst, std::abs(z - std::exp(Complex(t, 2 * pi * r.theta))));
    return worst;
}
}  // namespace

TEST(Ray, SquareRaysAreRadial) {
    const auto f = parse_map("z^2");
    for (double theta : {0.0, 0.5, 1.0 / 3}) {
        const auto r = trace_ray(f, theta, 1e-6);
        EXPECT_FALSE(r.truncated);
        EXPECT_LT(analytic_deviation(r), 1e-9) << theta;
        EXPECT_NEAR(r.samples.back().first, 1e-6, 1e-6 * 0.1);
    }
    for (const auto& [t, z] : trace_ray(f, 0.0, 1e-6).samples) EXPECT_EQ(z.imag(), 0.0);
}

TEST(Ray, LadderIsGeometricAndDescending) {
    const auto r = trace_ray(parse_map("z^2 - 1"), 0.25, 1.0, 1e-3, {.steps_per_halving = 4});
    for (std::size_t i = 1; i < r.samples.size(); ++i)
        EXPECT_NEAR(r.samples[i].first / r.samples[i - 1].first, std::pow(2.0, -0.25), 1e-12);
}

// The 1/3 ray of z^2 - 1 lands at the alpha fixed point; z^2 - 1 = z has roots
// (1 +- sqrt 5)/2 and the landing point is the one in (-1, 0). Near it f^2
// scales distances by |f'(alpha)|^2 while potentials grow by 4, so the ray
// approaches like t^(log|2 alpha|^2 / log 4).
TEST(Ray, BasilicaRayLandsAtAlpha) {
    const auto f = parse_map("z^2 - 1");
    const double alpha = (1.0 - std::sqrt(5.0)) / 2.0;
    ASSERT_NEAR(alpha * alpha - 1.0, alpha, 1e-15);
    const double rate = std::log(4.0 * alpha * alpha) / std::log(4.0);
    const auto a = trace_ray(f, 1.0 / 3, 1e-6), b = trace_ray(f, 1.0 / 3, 1e-10);
    const double da = std::abs(a.samples.back().second - alpha), db = std::abs(b.samples.back().second - alpha);
    EXPECT_LT(db, da);
    EXPECT_NEAR(std::log(da / db) / std::log(1e4), rate, 0.01);
    EXPECT_LT(db, 1e-3);
}

TEST(Ray, PushforwardConsistency) {
    const auto f = parse_map("z^2 - 1");
    const auto a = trace_ray(f, 1.0 / 3, 1e-4), b = trace_ray(f, 2.0 / 3, 1e-4);
    EXPECT_LE(pushforward_residual(f, a, b), 1e-8);
    EXPECT_LE(pushforward_residual(f, b, a), 1e-8);
    const auto g = parse_map("z^3 + 0.2i*z + 0.1");
    const auto c = trace_ray(g, 0.1, 1e-3), d = trace_ray(g, 0.3, 1e-3);
    EXPECT_LE(pushforward_residual(g, c, d), 1e-8);
}

TEST(Ray, GreenResidual) {
    for (const char* m : {"z^2 - 1", "z^2 + 0.25", "z^3 + 0.2i*z + 0.1"}) {
        const auto f = parse_map(m);
        const auto r = trace_ray(f, 0.2, 1e-4);
        EXPECT_LE(green_residual(f, r), 1e-6) << m;
    }
}

TEST(Ray, NonCenteredMapIsConjugated) {
    // 0.5 z + z^2 is conjugate to w^2 + 0.1875 by z = w - 0.25
    const auto a = trace_ray(parse_map("0.5*z + z^2"), 0.1, 1e-3);
    const auto b = trace_ray(parse_map("z^2 + 0.1875"), 0.1, 1e-3);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        EXPECT_LT(std::abs(a.samples[i].second - (b.samples[i].second - 0.25)), 1e-9);
}

TEST(Ray, Errors) {
    EXPECT_THROW(trace_ray(parse_map("2*z^2"), 0.0, 1e-3), Error);
    EXPECT_THROW(trace_ray(parse_map("z^2"), 0.0, 2.0, 3.0), Error);
    EXPECT_THROW(trace_ray(parse_map("1/z + z^2"), 0.0, 1e-3), Error);
}

TEST(Tail, Statistics) {
    const auto f = parse_map("z^2");
    const auto a = trace_ray(f, 0.0, 1e-8);
    EXPECT_EQ(ray_tail_distance(a, a, 1.0), 0.0);
    // interpolation in log t misses e^t by about t (log d / S)^2 / 8
    const auto b = trace_ray(f, 0.0, default_t_start(f), 1e-8, {.steps_per_halving = 5});
    EXPECT_LE(ray_tail_distance(a, b, 1e-6), 1e-8);
    const auto c = trace_ray(f, 0.0, 0.5, 0.1);
    try {
        ray_tail_distance(a, c, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PotentialMismatch);
    }
}

TEST(Tail, RadialFamilyApproachesParabolicRay) {
    const auto limit = trace_ray(parse_map("z + z^2"), 0.0, 1.0, 1e-3);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {4, 8, 16, 32}) {
        const auto r = trace_ray(parse_map("a*z + z^2", {{"a", 1.0 - 1.0 / n}}), 0.0, 1.0, 1e-3);
        const double d = ray_tail_distance(r, limit, 0.1);
        EXPECT_LT(d, prev) << n;
        prev = d;
    }
}

TEST(Ray, CsvFormat) {
    std::ostringstream os;
    write_csv(os, trace_ray(parse_map("z^2"), 0.5, 0.5, 0.2));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "theta,potential,x,y");
    EXPECT_NE(os.str().find("\n0.5,0.5,"), std::string::npos);
}
