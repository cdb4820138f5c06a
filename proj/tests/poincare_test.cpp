#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "sphere/curves.hpp"
#include "sphere/poincare.hpp"
#include "sphere/verify.hpp"

using namespace sphere;
using fixtures::inverse_square;

namespace {

TEST(UpperGradient, DistanceFieldsAreOneLipschitz) {
    const auto& v = inverse_square();
    const auto& m = v.base();
    const int x = m.nearest_node({2.0, 3.0});
    const ScalarField d{"d", base_distance_field(m, x)};
    const ScalarField r{"rho", v.d_rho(x).dist};
    for (double g : local_upper_gradient(v, d, Metric::base).values) EXPECT_LE(g, 1.0 + 1e-9);
    for (double g : local_upper_gradient(v, r, Metric::rho).values) EXPECT_LE(g, 1.0 + 1e-9);
}

TEST(UpperGradient, ExcessAtMostOneForOwnGradient) {
    const auto& v = inverse_square();
    const auto& m = v.base();
    for (const auto& u : test_suite(m, 3)) {
        const auto g = local_upper_gradient(v, u, Metric::base);
        EXPECT_LE(upper_gradient_excess(m, m.lengths(), u, g.values), 1.0 + 1e-12) << u.tag;
    }
}

TEST(UpperGradient, ConstantFieldHasZeroGradient) {
    const auto& v = inverse_square();
    for (double g : local_upper_gradient(v, constant_field(v.base(), 3.0), Metric::rho).values) EXPECT_EQ(g, 0.0);
}

TEST(TransformIdentity, RadialSegmentMatchesClosedForm) {
    const auto& v = inverse_square();
    const auto c = curve_from_polyline(v, {{0.0, 1.0}, {0.0, 3.0}});
    EXPECT_NEAR(c.length(Metric::rho), 2.0 / 15.0, 0.02 * 2.0 / 15.0);
    const auto t = transform_identity_check(v, {c});
    EXPECT_EQ(t.curves, 1);
    EXPECT_LT(t.worst_relative_error, 10.0 * v.base().mesh_rel);
}

TEST(TransformIdentity, RandomCurvesWithinMeshTolerance) {
    const auto& v = inverse_square();
    const auto curves = random_curves(v, 300, 7);
    const auto t = transform_identity_check(v, curves);
    EXPECT_EQ(t.curves, 300);
    EXPECT_LT(t.worst_relative_error, 10.0 * v.base().mesh_rel);
    const auto u = smooth_random_field(v.base(), 4);
    const auto g = local_upper_gradient(v, u, Metric::base);
    EXPECT_LT(transform_identity_check(v, curves, &g).worst_relative_error, 10.0 * v.base().mesh_rel);
}

TEST(TransformIdentity, LpNormsAgreeToRoundoff) {
    for (double sigma : {1.0, 2.0}) {
        SphericalizeOptions o;
        o.sigma = sigma;
        const auto v = sphericalize(fixtures::halfplane(), Density::powlog(-2.0, 0.0), o);
        for (const auto& u : test_suite(v.base(), 5))
            for (double p : {1.0, 2.0, 3.0}) {
                const auto t = ug_transform_check(v, u, p);
                EXPECT_LT(t.lp_relative_error, 1e-12) << u.tag << " p=" << p << " sigma=" << sigma;
            }
    }
}

TEST(TransformIdentity, ScaledGradientNearUpperGradient) {
    const auto& v = inverse_square();
    const ScalarField u{"log_radial", [&] {
                            std::vector<double> x;
                            for (const auto& n : v.base().nodes) x.push_back(std::log(n.radial));
                            return x;
                        }()};
    const auto t = ug_transform_check(v, u, 1.0);
    // node-sampled rho against edge-averaged weights: bias of order the mesh
    EXPECT_NEAR(t.edge_excess, 1.0, v.base().mesh_rel);
}

TEST(TransformIdentity, RejectsSubunitExponent) {
    const auto& v = inverse_square();
    EXPECT_THROW(ug_transform_check(v, constant_field(v.base()), 0.5), DomainError);
    EXPECT_THROW(poincare_sweep(v, Metric::base, {}, {}, PoincareOptions{0.5, 2.0, 7}), DomainError);
    EXPECT_THROW(poincare_sweep(v, Metric::base, {}, {}, PoincareOptions{1.0, 0.5, 7}), DomainError);
}

TEST(Poincare, ConstantFieldGivesZero) {
    const auto& v = inverse_square();
    const auto balls = sample_poincare_balls(v, Metric::rho, 10, 2, 2.0);
    const auto s = poincare_sweep(v, Metric::rho, balls, {constant_field(v.base())});
    EXPECT_EQ(s.C_P_hat, 0.0);
}

TEST(Poincare, SphericalizedComparableToBase) {
    const auto& v = inverse_square();
    const auto fields = test_suite(v.base(), 1);
    const auto base = poincare_sweep(v, Metric::base, sample_poincare_balls(v, Metric::base, 30, 9, 2.0), fields);
    const auto rho = poincare_sweep(v, Metric::rho, sample_poincare_balls(v, Metric::rho, 30, 9, 2.0), fields);
    EXPECT_GT(base.samples.size(), 0u);
    EXPECT_GT(rho.samples.size(), 0u);
    EXPECT_GT(base.C_P_hat, 0.0);
    EXPECT_LT(base.C_P_hat, 2.0);
    EXPECT_LE(rho.C_P_hat, 10.0 * base.C_P_hat);
}

TEST(Poincare, StableUnderRefinement) {
    const auto& coarse = inverse_square();
    const auto& fine = fixtures::inverse_square_fine();
    auto run = [](const SphereView& v) {
        return poincare_sweep(v, Metric::rho, sample_poincare_balls(v, Metric::rho, 20, 10, 2.0),
                              test_suite(v.base(), 1))
            .C_P_hat;
    };
    const double a = run(coarse), b = run(fine);
    EXPECT_LT(std::abs(a - b) / a, 0.25) << a << " vs " << b;
}

TEST(Poincare, DilatedEnergyGrowsWithLambda) {
    const auto& v = inverse_square();
    const auto u = smooth_random_field(v.base(), 8);
    const auto g = local_upper_gradient(v, u, Metric::rho);
    for (const auto& b : sample_poincare_balls(v, Metric::rho, 5, 11, 4.0)) {
        double prev = 0.0;
        for (double lambda : {1.0, 2.0, 4.0}) {
            const double e = dilated_energy(v, Metric::rho, b, g, 1.0, lambda);
            EXPECT_GE(e, prev);
            prev = e;
        }
    }
}

TEST(InteriorPoints, BallsReachAwayFromBoundary) {
    const auto& v = inverse_square();
    const auto u = estimate_uniformity(v, sample_pairs(v.base(), 80, 31), Metric::rho);
    const auto c = check_interior_points(v, u.C_hat, 30, 12);
    EXPECT_EQ(c.balls, 30);
    EXPECT_EQ(c.violations, 0);
    EXPECT_GT(c.worst_ratio, 0.0);
}

}  // namespace
