#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "sphere/curves.hpp"
#include "sphere/verify.hpp"

using namespace sphere;
using fixtures::inverse_square;

namespace {

const std::vector<double> ladder{1.0, 2.0, 4.0, 8.0, 16.0};

TEST(Functional, RadialSegmentIsOne) {
    const auto& v = inverse_square();
    const auto c = curve_from_polyline(v, {{0.0, 1.0}, {0.0, 3.0}});
    EXPECT_NEAR(c.length(Metric::base), 2.0, 1e-12);
    EXPECT_NEAR(uniformity_functional(c, Metric::base, 2.0), 1.0, 1e-12);
    // the cone term alone peaks at the midpoint: min(1, 1) / 2
    double cone = 0.0;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
        cone = std::max(cone, std::min(c.cum_d[i], 2.0 - c.cum_d[i]) / c.dX[i]);
    EXPECT_NEAR(cone, 0.5, 0.01);
}

TEST(Functional, SingleEdgeIsOne) {
    const auto& v = inverse_square();
    const auto& m = v.base();
    const auto& e = m.edges[m.edges.size() / 2];
    const auto c = curve_from_path(v, {e.a, e.b});
    EXPECT_DOUBLE_EQ(uniformity_functional(c, Metric::base, e.length), 1.0);
}

TEST(Functional, SegmentHuggingBoundaryBlowsUp) {
    const auto& v = inverse_square();
    for (double eps : {0.1, 0.01}) {
        const double a = 1.0;
        const auto c = curve_from_polyline(v, {{-a, eps}, {a, eps}});
        const double u = uniformity_functional(c, Metric::base, 2.0 * a);
        EXPECT_NEAR(u, a / eps, 0.05 * a / eps) << eps;
    }
}

TEST(Functional, DegenerateEndpoints) {
    const auto& v = inverse_square();
    const auto c = curve_from_polyline(v, {{0.0, 1.0}, {0.0, 3.0}});
    EXPECT_THROW(uniformity_functional(c, Metric::base, 0.0), DegenerateError);
    EXPECT_THROW(estimate_pair(v, 5, 5, Metric::rho), DegenerateError);
}

TEST(Curves, CumulativeMonotoneAndBoundaryPositive) {
    const auto& v = inverse_square();
    for (const auto& c : {detour_curve(v, {-2.0, 1.0}, {3.0, 0.5}, 50.0),
                          boundary_orthogonal_arc(v, {-2.0, 1.0}, {3.0, 0.5})}) {
        for (std::size_t i = 1; i < c.size(); ++i) {
            EXPECT_GE(c.cum_d[i], c.cum_d[i - 1]);
            EXPECT_GE(c.cum_rho[i], c.cum_rho[i - 1]);
        }
        for (std::size_t i = 1; i + 1 < c.size(); ++i) EXPECT_GT(c.dX_rho[i], 0.0);
    }
}

TEST(Uniformity, FlatHalfPlaneNearHalfPi) {
    const auto& v = inverse_square();
    const auto pairs = sample_pairs(v.base(), 150, 21, 0.5, v.base().R_max / 4.0);
    const auto u = estimate_uniformity(v, pairs, Metric::base);
    EXPECT_LE(u.C_hat, std::numbers::pi / 2.0 * discretization_tolerance(v.base().mesh_rel));
    EXPECT_GE(u.C_hat, 1.0);
}

TEST(Uniformity, SphericalizedFiniteWithSoundCertificates) {
    const auto& v = inverse_square();
    const auto pairs = sample_pairs(v.base(), 150, 22);
    const auto u = estimate_uniformity(v, pairs, Metric::rho);
    EXPECT_TRUE(std::isfinite(u.C_hat));
    EXPECT_LT(u.C_hat, 5.0);
    ASSERT_TRUE(u.witness.has_value());
    for (const auto& r : u.rows) {
        EXPECT_LE(r.certificate_lb, r.best_functional);
        EXPECT_LE(r.best_functional, r.rho_geodesic);
        EXPECT_LE(r.best_functional, r.d_geodesic);
    }
}

TEST(Uniformity, StableUnderRefinement) {
    const auto& coarse = inverse_square();
    const auto& fine = fixtures::inverse_square_fine();
    const auto a = estimate_uniformity(coarse, sample_pairs(coarse.base(), 120, 23), Metric::rho);
    const auto b = estimate_uniformity(fine, sample_pairs(fine.base(), 120, 23), Metric::rho);
    EXPECT_LT(std::abs(b.C_hat - a.C_hat) / a.C_hat, 0.10) << a.C_hat << " vs " << b.C_hat;
}

TEST(Uniformity, AntipodalPairsUnderExponentialGrow) {
    SphericalizeOptions o;
    o.force = true;
    const auto v = sphericalize(fixtures::halfplane(), Density::exponential(1.0), o);
    double prev = 0.0;
    for (double r : {2.0, 8.0, 32.0}) {
        const auto [px, py] = antipodal_pair(r);
        const auto row = estimate_pair(v, v.base().nearest_node(px), v.base().nearest_node(py), Metric::rho);
        EXPECT_GT(row.best_functional, prev) << r;
        prev = row.best_functional;
    }
    EXPECT_GT(prev, 8.0);
}

TEST(FailsB, QuarteringRefutesLadder) {
    const auto f = Density::powlog(-1.0, -2.0);
    double last_r = 0.0;
    for (double C : ladder) {
        const auto c = fails_B_refute(f, C, false);
        EXPECT_TRUE(c.informative);
        EXPECT_GT(c.value, C);
        EXPECT_LT(c.R1, c.r);
        EXPECT_LT(c.r, c.R2);
        EXPECT_NEAR(f.tail(c.R1), 2.0 * f.tail(c.r), 1e-6 * f.tail(c.R1));
        EXPECT_NEAR(f.tail(c.r), 2.0 * f.tail(c.R2), 1e-6 * f.tail(c.r));
        EXPECT_GE(c.r, last_r);
        last_r = c.r;
    }
}

TEST(FailsB, QuarteringMatchesDirectCertificate) {
    const auto f = Density::powlog(-1.0, -2.0);
    const auto c = fails_B_quartering(f, 64.0);
    EXPECT_NEAR(c.value, certificate_fails_B(f, c.R1, c.r, c.R2), 1e-6 * c.value);
}

TEST(FailsB, PassingDensityStaysBounded) {
    const auto f = Density::powlog(-2.0, 0.0);
    double sup = 0.0;
    EXPECT_THROW(fails_B_quartering(f, 1.0), DomainError);  // T(R1) = 2/3 exceeds T(0)
    for (double r = 4.0; r < 1e6; r *= 4.0) sup = std::max(sup, fails_B_quartering(f, r).value);
    EXPECT_LT(sup, 2.0);
    EXPECT_THROW(fails_B_refute(f, 16.0, true, 4.0, 1e8), PrereqError);
}

TEST(FailsB, EmptyPieceGivesZero) {
    const auto f = Density::powlog(-1.0, -2.0);
    EXPECT_DOUBLE_EQ(certificate_fails_B(f, 5.0, 5.0, 9.0), 0.0);
    EXPECT_DOUBLE_EQ(certificate_fails_B(f, 1.0, 9.0, 9.0), 0.0);
    EXPECT_THROW(certificate_fails_B(f, 9.0, 5.0, 10.0), DomainError);
}

TEST(FailsA, ExponentialRefutesLadder) {
    const auto f = Density::exponential(1.0);
    const auto rep = classify(f);
    for (double C : ladder) {
        const auto c = certificate_fails_A(f, C, std::max(1.0, rep.C_qd_hat), false);
        EXPECT_TRUE(c.refutes()) << C;
        EXPECT_TRUE(c.threshold_met) << C;
        // tails underflow at these radii; compare logarithms
        EXPECT_NEAR(f.log_tail(c.r), std::log(2.0 * C + 1.0) + f.log_tail(c.R), 1e-6);
        EXPECT_NEAR(f.log_tail(c.r), std::log(1.5 * C + 1.0) + f.log_tail(c.R_prime), 1e-6);
        // refuting C refutes every smaller constant
        for (double Cs : ladder) {
            if (Cs > C) break;
            EXPECT_TRUE(certificate_fails_A(f, Cs, std::max(1.0, rep.C_qd_hat)).refutes());
        }
    }
}

TEST(FailsA, InverseSquareNotRefuted) {
    const auto f = Density::powlog(-2.0, 0.0);
    const auto rep = classify(f);
    for (double C : {2.0, 4.0, 8.0}) {
        const auto c = certificate_fails_A(f, C, rep.C_qd_hat, true);
        EXPECT_FALSE(c.refutes()) << C;
        EXPECT_FALSE(c.informative);
    }
}

TEST(FailsA, AntipodalPairGeometry) {
    const auto [x, y] = antipodal_pair(10.0);
    EXPECT_NEAR(norm(x), 10.0, 1e-12);
    EXPECT_NEAR(norm(y), 10.0, 1e-12);
    EXPECT_NEAR(dist(x, y), 11.0, 1e-12);
    EXPECT_THROW(antipodal_pair(1.0), DomainError);
}

TEST(BracketLemmas, AllHoldOnInverseSquare) {
    const auto& v = inverse_square();
    const auto k = fixtures::constants(v);
    const auto reports = verify_bracket_lemmas(v, sample_pairs(v.base(), 200, 24), k);
    EXPECT_EQ(reports.size(), 7u);
    for (const auto& r : reports) {
        EXPECT_NE(r.verdict, Finding::violated) << r.lemma << " " << r.worst_ratio;
        EXPECT_GT(r.samples, 0) << r.lemma;
    }
}

TEST(BracketLemmas, LowerComparisonAtClosedFormPair) {
    const auto& v = inverse_square();
    const auto& m = v.base();
    const int x = m.nearest_node({0.0, 1.0});
    const int t[] = {m.nearest_node({0.0, 2.0})};
    const double d = v.d_rho(x, t)[0];
    const double ratio = d / (v.density()(1.0) * 1.0);
    EXPECT_NEAR(ratio, 0.75, 0.02);
    EXPECT_GE(ratio, fixtures::constants(v).lower_factor());
    EXPECT_NEAR(1.0 / fixtures::constants(v).lower_factor(), 128.0, 0.5);
}

TEST(Tolerance, CombinesAnisotropyAndMesh) {
    EXPECT_NEAR(discretization_tolerance(0.05), 1.0 / std::cos(std::numbers::pi / 8.0) * 1.25, 1e-12);
}

TEST(VerifierReport, ViolatedOnlyBeyondTolerance) {
    VerifierReport r{"probe", 0, 0.0, "", Finding::holds, discretization_tolerance(0.05), ""};
    r.record(1.05, "a");
    r.settle();
    EXPECT_EQ(r.verdict, Finding::resolution_limited);
    r.record(2.0, "b");
    r.settle();
    EXPECT_EQ(r.verdict, Finding::violated);
    EXPECT_EQ(r.witness, "b");
}

}  // namespace
