// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sphere/curves.hpp"
#include "sphere/doubling_rho.hpp"
#include "sphere/poincare.hpp"
#include "sphere/verify.hpp"

using namespace sphere;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const SpaceModel& coarse_space() {
    static const SpaceModel m = build_halfplane(HalfPlaneOptions{});
    return m;
}

const SpaceModel& fine_space() {
    HalfPlaneOptions o;
    o.mesh_rel /= 2.0;
    static const SpaceModel m = build_halfplane(o);
    return m;
}

const SphereView& coarse() {
    static const SphereView v = sphericalize(coarse_space(), Density::powlog(-2.0, 0.0));
    return v;
}

const SphereView& fine() {
    static const SphereView v = sphericalize(fine_space(), Density::powlog(-2.0, 0.0));
    return v;
}

LemmaConstants constants(const SphereView& v) { return {v.report->C_A_hat, v.report->C_B_hat, v.base().C_U}; }

double d_rho_between(const SphereView& v, Point a, Point b) {
    const auto& m = v.base();
    const int t[] = {m.nearest_node(b)};
    return v.d_rho(m.nearest_node(a), t)[0];
}

const std::vector<double> ladder{1.0, 2.0, 4.0, 8.0, 16.0};

void classification(Outcome& o) {
    const auto t0 = Clock::now();
    int cases = 0;
    for (double alpha : {-0.5, -1.0, -2.0})
        for (double beta : {0.0, -1.0, -2.0}) {
            const auto f = Density::powlog(alpha, beta);
            ++cases;
            const bool integrable = alpha < -1.0 || (alpha == -1.0 && beta < -1.0);
            if (!integrable) {
                bool threw = false;
                try {
                    classify(f);
                } catch (const DivergenceError&) {
                    threw = true;
                }
                o.require(threw, f.describe() + " should diverge");
                continue;
            }
            const auto r = classify(f);
            const Verdict want_b = alpha == -1.0 ? Verdict::fail : Verdict::pass;
            o.require(r.verdict_A == Verdict::pass && r.verdict_B == want_b, f.describe());
        }
    const auto e = classify(Density::exponential(1.0));
    ++cases;
    o.require(e.verdict_A == Verdict::fail && e.verdict_B == Verdict::pass, "exponential");
    const double dt = seconds_since(t0);
    o.require(dt < 10.0, "runtime");
    o.detail << cases << " densities in " << dt << " s";
}

void radial_distance(Outcome& o) {
    const auto t0 = Clock::now();
    const double d = d_rho_between(coarse(), {0.0, 1.0}, {0.0, 3.0});
    o.require(rel(d, 2.0 / 15.0) < 0.02, "d_rho((0,1),(0,3)) vs 2/15");
    const auto lb = check_radial_lower_bound(coarse(), 100, 101, 1);
    o.require(lb.samples >= 10'000 && lb.violations == 0, "radial lower bound");
    const double dt = seconds_since(t0);
    o.require(dt < 60.0, "runtime");
    o.detail << "d_rho " << d << " vs " << 2.0 / 15.0 << ", lower bound " << lb.violations << "/" << lb.samples
             << " violations, " << dt << " s";
}

void infinity_bracket(Outcome& o) {
    const auto& v = coarse();
    const auto k = constants(v);
    std::vector<int> nodes;
    for (int i = 0; i < 100; ++i) nodes.push_back(static_cast<int>(i * v.base().size() / 100));
    const auto b = check_infinity_bracket(v, nodes, k);
    const double bound = k.diameter_bound(v.report->C_qd_hat, v.report->integral_total);
    o.require(b.samples == 100 && b.violations == 0, "bracket");
    o.require(v.diam_rho_hat <= bound, "diameter");
    o.detail << b.violations << "/" << b.samples << " bracket violations, diam " << v.diam_rho_hat << " <= " << bound;
}

void uniformity(Outcome& o) {
    const auto a = estimate_uniformity(coarse(), sample_pairs(coarse_space(), 500, 41), Metric::rho);
    const auto b = estimate_uniformity(fine(), sample_pairs(fine_space(), 500, 41), Metric::rho);
    o.require(a.rows.size() >= 500 && std::isfinite(a.C_hat), "finite over 500 pairs");
    o.require(rel(b.C_hat, a.C_hat) < 0.10, "refinement");

    const auto expo = Density::exponential(1.0);
    const double c_qd = std::max(1.0, classify(expo).C_qd_hat);
    int refuted_a = 0;
    for (double C : ladder) refuted_a += certificate_fails_A(expo, C, c_qd).refutes();
    o.require(refuted_a == static_cast<int>(ladder.size()), "exponential ladder");

    const auto slow = Density::powlog(-1.0, -2.0);
    int refuted_b = 0;
    for (double C : ladder) {
        const auto c = fails_B_refute(slow, C, false);
        refuted_b += c.informative && c.value > C;
    }
    o.require(refuted_b == static_cast<int>(ladder.size()), "slow-tail ladder");
    o.detail << "C " << a.C_hat << " -> " << b.C_hat << " on refinement, ladders refuted " << refuted_a << "/"
             << ladder.size() << " and " << refuted_b << "/" << ladder.size();
}

void doubling(Outcome& o) {
    const auto a = verify_doubling_rho(coarse(), constants(coarse()));
    const auto b = verify_doubling_rho(fine(), constants(fine()));
    o.require(a.samples >= 1000 && std::isfinite(a.C_murho_hat), "finite over 1000 balls");
    o.require(rel(b.C_murho_hat, a.C_murho_hat) < 0.10, "refinement");
    o.require(a.point_inclusions.violations == 0 && a.infinity_inclusions.violations == 0, "inclusions");

    SphericalizeOptions so;
    so.sigma = 1.0;
    const auto crit = sphericalize(coarse_space(), Density::powlog(-2.0, -2.0), so);
    DoublingRhoOptions d;
    d.centers = 40;
    const auto c = verify_doubling_rho(crit, constants(crit), d);
    const std::size_t n = c.trend.size();
    const bool increasing =
        n >= 3 && c.trend[n - 3].witness < c.trend[n - 2].witness && c.trend[n - 2].witness < c.trend[n - 1].witness;
    o.require(increasing, "critical trend");
    o.detail << "C " << a.C_murho_hat << " -> " << b.C_murho_hat << " over " << a.samples
             << " balls, inclusion violations " << a.point_inclusions.violations + a.infinity_inclusions.violations
             << ", third-case factor " << a.intermediate_factor();
    if (n >= 3)
        o.detail << ", critical witness " << c.trend[n - 3].witness << " < " << c.trend[n - 2].witness << " < "
                 << c.trend[n - 1].witness;
}

void transforms(Outcome& o) {
    const auto& v = coarse();
    const auto t = transform_identity_check(v, random_curves(v, 1000, 43));
    o.require(t.curves == 1000 && t.worst_relative_error < 10.0 * v.base().mesh_rel, "length identity");
    double worst = 0.0;
    for (const auto& u : test_suite(v.base(), 1))
        for (double p : {1.0, 2.0, 3.0}) worst = std::max(worst, ug_transform_check(v, u, p).lp_relative_error);
    o.require(worst < 1e-12, "L^p identity");
    o.detail << "length error " << t.worst_relative_error << " over " << t.curves << " curves, L^p error " << worst;
}

void poincare(Outcome& o) {
    const PoincareOptions opt{1.0, 2.0, 7};
    auto rho_sweep = [&](const SphereView& v) {
        return poincare_sweep(v, Metric::rho, sample_poincare_balls(v, Metric::rho, 40, 47, opt.lambda),
                              test_suite(v.base(), 1), opt);
    };
    const auto& v = coarse();
    const auto base = poincare_sweep(v, Metric::base, sample_poincare_balls(v, Metric::base, 40, 47, opt.lambda),
                                     test_suite(v.base(), 1), opt);
    const auto a = rho_sweep(v);
    const auto b = rho_sweep(fine());
    o.require(base.C_P_hat > 0.0 && a.C_P_hat <= 10.0 * base.C_P_hat, "ratio to base");
    o.require(rel(b.C_P_hat, a.C_P_hat) < 0.25, "refinement");
    o.detail << "C_P " << a.C_P_hat << " (base " << base.C_P_hat << "), refined " << b.C_P_hat;
}

void oracle_cross_checks(Outcome& o) {
    const auto inv = Density::powlog(-2.0, 0.0);
    const auto slow = Density::powlog(-1.0, -2.0);
    const auto expo = Density::exponential(1.0);
    for (double r : {0.0, 1.0, 10.0, 1e3}) {
        o.require(rel(inv.tail(r), oracle::integrate_tail(oracle::powlog(-2.0, 0.0), r)) < 1e-8, "inverse-square tail");
        o.require(rel(slow.tail(r), oracle::powlog_tail(-1.0, -2.0, r)) < 1e-6, "log tail");
    }
    // the quadrature loses relative accuracy once e^-r nears its absolute tolerance
    for (double r : {0.0, 1.0, 5.0, 10.0})
        o.require(rel(expo.tail(r), oracle::integrate_tail(oracle::exponential(1.0), r)) < 1e-8, "exponential tail");
    const double l15 = d_rho_between(coarse(), {0.0, 1.0}, {0.0, 3.0});
    const double l12 = d_rho_between(coarse(), {0.0, 1.0}, {0.0, 2.0});
    o.require(rel(l15, oracle::integrate(oracle::powlog(-2.0, 0.0), 1.0, 3.0)) < 0.02, "2/15");
    o.require(rel(l12, oracle::integrate(oracle::powlog(-2.0, 0.0), 1.0, 2.0)) < 0.02, "1/12");

    const auto rep = classify(inv);
    o.require(rel(rep.tau1_hat, 1.0 / 36.0) < 0.01, "tau1");
    o.require(rel(rep.epsilon_hat, 1.0 / 8.0) < 0.01, "epsilon");

    const auto c = check_condition_C(coarse(), RadialGrid{1e-1, 1e6, 8});
    const auto rho = oracle::powlog(-2.0, 0.0);
    const double ratio = oracle::halfplane_exterior_mass(rho, 2.0, 1.0) /
                         (rho(1.0) * rho(1.0) * 0.5 * std::numbers::pi * 4.0);
    double lib = NAN;
    for (const auto& row : c.table)
        if (std::abs(row.r - 1.0) < 1e-9) lib = row.lhs / row.rhs;
    o.require(std::abs(lib - ratio) < 0.02 && std::abs(ratio - 1.25) < 0.005, "condition C ratio");
    o.detail << "2/15 " << l15 << ", 1/12 " << l12 << ", tau1 " << rep.tau1_hat << ", eps " << rep.epsilon_hat
             << ", C ratio " << lib << " (oracle " << ratio << ")";
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"classification", classification}, {"radial-distance", radial_distance},
        {"infinity-bracket", infinity_bracket}, {"uniformity", uniformity},
        {"doubling", doubling}, {"transforms", transforms},
        {"poincare", poincare}, {"oracle", oracle_cross_checks}};
    int failed = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::printf("%s %d %-16s %6.1fs  %s\n", o.pass ? "PASS" : "FAIL", ++index, name, seconds_since(t0),
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
