#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "sphere/doubling_rho.hpp"

using namespace sphere;
using fixtures::inverse_square;

namespace {

const DoublingRhoReport& coarse_report() {
    static const DoublingRhoReport r = verify_doubling_rho(inverse_square(), fixtures::constants(inverse_square()));
    return r;
}

TEST(DiskArea, InteriorAndBoundary) {
    EXPECT_NEAR(halfplane_disk_area({0.0, 10.0}, 2.0), std::numbers::pi * 4.0, 1e-12);
    EXPECT_NEAR(halfplane_disk_area({0.0, 0.0}, 2.0), std::numbers::pi * 2.0, 1e-12);
    EXPECT_NEAR(halfplane_disk_area({5.0, 1.0}, 2.0),
                oracle::integrate([](double x) { return std::sqrt(4.0 - x * x) + std::min(1.0, std::sqrt(4.0 - x * x)); },
                                  -2.0, 2.0, 1e-12),
                1e-6);
}

TEST(InfinityBall, ExactMassMatchesPolarQuadrature) {
    const auto f = Density::powlog(-2.0, 0.0);
    for (double r : {0.1, 0.01, 1e-3}) {
        // T(|y|) = 1/(|y|+2) < r  <=>  |y| > 1/r - 2
        const double R = 1.0 / r - 2.0;
        const double ref = oracle::halfplane_exterior_mass(oracle::powlog(-2.0, 0.0), 2.0, R);
        EXPECT_NEAR(infinity_ball_mass_exact(f, 2.0, r), ref, 1e-6 * ref) << r;
    }
}

TEST(InfinityBall, MeshMassCloseToExact) {
    const auto& v = inverse_square();
    for (double r : {0.02, 0.005}) {
        const double exact = infinity_ball_mass_exact(v.density(), 2.0, r);
        EXPECT_NEAR(infinity_ball_mass(v, r), exact, 0.05 * exact) << r;
    }
}

TEST(DoublingRho, InverseSquareFiniteOverThousandBalls) {
    const auto& r = coarse_report();
    EXPECT_GE(r.samples, 1000);
    EXPECT_TRUE(std::isfinite(r.C_murho_hat));
    EXPECT_GE(r.C_murho_hat, 1.0);
    EXPECT_LT(r.C_murho_hat, 20.0);
    EXPECT_NE(r.verdict, Finding::violated);
    for (const auto& s : r.strata) EXPECT_GT(s.samples, 0) << s.name;
    EXPECT_GT(r.strata[3].resolved, 0);
    EXPECT_FALSE(r.trend_increasing);
}

TEST(DoublingRho, InclusionsHoldExactly) {
    const auto& r = coarse_report();
    EXPECT_GT(r.point_inclusions.balls, 0);
    EXPECT_EQ(r.point_inclusions.violations, 0);
    EXPECT_GT(r.infinity_inclusions.nontrivial, 0);
    EXPECT_EQ(r.infinity_inclusions.violations, 0);
}

TEST(DoublingRho, IntermediateRatiosBounded) {
    const auto& r = coarse_report();
    EXPECT_GT(r.comparable_lo, 0.0);
    EXPECT_TRUE(std::isfinite(r.comparable_factor()));
    EXPECT_GE(r.intermediate_factor(), r.comparable_factor());
}

TEST(DoublingRho, StableUnderRefinement) {
    const auto& fine = fixtures::inverse_square_fine();
    DoublingRhoOptions o;
    o.centers = 120;
    const auto a = verify_doubling_rho(inverse_square(), fixtures::constants(inverse_square()), o);
    const auto b = verify_doubling_rho(fine, fixtures::constants(fine), o);
    EXPECT_LT(std::abs(b.C_murho_hat - a.C_murho_hat) / a.C_murho_hat, 0.10)
        << a.C_murho_hat << " vs " << b.C_murho_hat;
}

TEST(Necessity, CriticalExponentTrendIncreases) {
    const auto f = Density::powlog(-2.0, -2.0);
    SphericalizeOptions o;
    o.sigma = 1.0;
    const auto v = sphericalize(fixtures::halfplane(), f, o);
    DoublingRhoOptions d;
    d.centers = 40;
    const auto r = verify_doubling_rho(v, fixtures::constants(v), d);
    EXPECT_TRUE(r.trend_increasing);
    EXPECT_EQ(r.verdict, Finding::violated);
    const std::size_t n = r.trend.size();
    ASSERT_GE(n, 3u);
    EXPECT_LT(r.trend[n - 3].witness, r.trend[n - 2].witness);
    EXPECT_LT(r.trend[n - 2].witness, r.trend[n - 1].witness);
    for (std::size_t i = 1; i < n; ++i) EXPECT_LT(r.trend[i].r, r.trend[i - 1].r);
}

TEST(Necessity, WitnessIsLowerBoundOnRatio) {
    for (const auto& row : infinity_trend(Density::powlog(-2.0, -2.0), 1.0, 1e-2, 6)) {
        EXPECT_GE(row.ratio, 1.0);
        EXPECT_NEAR(row.witness, std::cbrt(row.mass_r / (row.mass_2r - row.mass_r)), 1e-9 * row.witness);
    }
}

TEST(Necessity, SubcriticalTrendFlat) {
    const auto t = infinity_trend(Density::powlog(-2.0, 0.0), 2.0, 1e-2, 8);
    const std::size_t n = t.size();
    EXPECT_NEAR(t[n - 1].witness, t[n - 3].witness, 0.01 * t[n - 3].witness);
}

}  // namespace
