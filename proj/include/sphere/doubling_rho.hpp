#pragma once

// Doubling of mu_rho in d_rho: node-centered balls stratified by their radius
// relative to d_rho(x, inf), balls centered at infinity, the ball inclusions
// near a point and near infinity, and the comparison
// mu_rho(B_rho(x, r)) ~ rho(|x|)^sigma mu(B(x, |x| + 1)) for intermediate radii.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sphere/conditions.hpp"
#include "sphere/constants.hpp"
#include "sphere/errors.hpp"
#include "sphere/sphericalize.hpp"
#include "sphere/verify.hpp"

namespace sphere {

// mu_rho of the node ball {d_rho(x, .) < r}, plus the exterior beyond R_max that
// is reached through infinity when r exceeds d_rho(x, inf).
inline double rho_ball_mass(const SphereView& v, std::span<const double> field, double d_inf, double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i)
        if (field[i] < r) s += v.node_mu_rho[i];
    if (v.has_polar_oracle() && v.has_infinity() && r > d_inf) {
        const double rest = r - d_inf;
        const double R = v.base().R_max;
        const double edge = rest >= v.density().tail(R) ? R : v.density().tail_inverse(rest);
        s += v.exterior_mass(edge);
    }
    return s;
}

// mu_rho(B_rho(inf, r)) on the mesh (bracket points) plus the exterior.
inline double infinity_ball_mass(const SphereView& v, double r) {
    if (!v.has_infinity()) throw PrereqError("point at infinity unavailable");
    double s = 0.0;
    for (std::size_t i = 0; i < v.infinity.size(); ++i)
        if (v.infinity[i].point < r) s += v.node_mu_rho[i];
    if (v.has_polar_oracle()) {
        const double R = v.base().R_max;
        s += v.exterior_mass(r >= v.density().tail(R) ? R : v.density().tail_inverse(r));
    }
    return s;
}

// Half-plane only: B_rho(inf, r) = {T(|y|) < r} exactly, since radial escape
// attains the lower bound T(|y|) <= d_rho(y, inf).
inline double infinity_ball_mass_exact(const Density& f, double sigma, double r) {
    const double R = f.tail_inverse(r);
    return std::numbers::pi * radial_moment_tail(f, sigma, R);
}

// Area of the disk B(c, s) inside the upper half-plane.
inline double halfplane_disk_area(Point c, double s) {
    const double y = std::min(c.y, s);
    const double cap = s * s * std::acos(y / s) - y * std::sqrt(std::max(0.0, s * s - y * y));
    return std::numbers::pi * s * s - cap;
}

struct RhoBall {
    int center = -1;  // -1 for infinity
    double radius = 0.0;
    double ratio = 0.0;  // mu_rho(B(2r)) / mu_rho(B(r))
    int stratum = 0;     // 0: r < c0 D, 1: c0 D <= r < 2D, 2: r >= 2D, 3: centered at infinity
    bool resolved = true;
};

struct StratumSummary {
    std::string name;
    int samples = 0;
    int resolved = 0;
    double worst_ratio = 0.0;
    RhoBall witness;
};

struct InfinityTrendRow {
    double r = 0.0;
    double mass_r = 0.0, mass_2r = 0.0;
    double ratio = 0.0;    // mu(B(inf, 2r)) / mu(B(inf, r))
    double witness = 0.0;  // (mu(B(inf, r)) / mu(B(inf, 2r) \ B(inf, r)))^(1/3), a lower bound for C_mu_rho
};

struct InclusionCheck {
    int balls = 0;
    int nontrivial = 0;  // balls whose node sets contain more than the center (or are non-empty at infinity)
    int violations = 0;
};

struct DoublingRhoOptions {
    int centers = 250;
    int radii_per_center = 4;
    int infinity_radii = 48;
    std::uint64_t seed = 5;
    int trend_decades = 12;
    double resolution_cells = 3.0;
};

struct DoublingRhoReport {
    double C_murho_hat = 0.0;
    RhoBall worst;
    int samples = 0;
    int resolution_limited = 0;
    std::array<StratumSummary, 4> strata{StratumSummary{"near_point", 0, 0, 0.0, {}},
                                         StratumSummary{"intermediate", 0, 0, 0.0, {}},
                                         StratumSummary{"contains_infinity", 0, 0, 0.0, {}},
                                         StratumSummary{"centered_at_infinity", 0, 0, 0.0, {}}};
    std::vector<RhoBall> table;
    InclusionCheck point_inclusions;     // B(x, a1 r / rho) within B_rho(x, r) within B(x, a2 r / rho)
    InclusionCheck infinity_inclusions;  // complements of base balls around b sandwich B_rho(inf, r)
    double intermediate_lo = std::numeric_limits<double>::infinity();
    double intermediate_hi = 0.0;  // range of mu_rho(B_rho(x, r)) / (rho^sigma mu(B(x, |x|+1)))
    double comparable_lo = std::numeric_limits<double>::infinity();
    double comparable_hi = 0.0;  // the same ratio restricted to D/4 <= r <= 4D
    std::vector<InfinityTrendRow> trend;
    double trend_slope = 0.0;  // d witness / d log10(1/r) over the smallest three decades
    bool trend_increasing = false;  // > 1% growth per decade across those decades
    Finding verdict = Finding::holds;

    double intermediate_factor() const { return intermediate_hi / intermediate_lo; }
    double comparable_factor() const { return comparable_hi / comparable_lo; }
};

namespace detail {

inline bool rho_ball_resolved(const SphereView& v, std::span<const double> field, int x, double r, double cells) {
    const auto& m = v.base();
    double widest = 0.0;
    bool touches_core = false;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!(field[i] < 2.0 * r) && static_cast<int>(i) != x) continue;
        for (int e : m.incident(static_cast<int>(i))) widest = std::max(widest, v.edge_rho[e]);
        if (m.layout && m.nodes[i].radial <= m.layout->ring_radius(0) * (1.0 + 1e-12)) touches_core = true;
    }
    if (r < cells * widest) return false;
    if (touches_core) {
        const double core = 2.0 * m.layout->r_inner * v.density()(m.layout->r_inner);
        if (r < 4.0 * core) return false;
    }
    return true;
}

inline InfinityTrendRow trend_row(const Density& f, double sigma, double r) {
    InfinityTrendRow row;
    row.r = r;
    row.mass_r = infinity_ball_mass_exact(f, sigma, r);
    row.mass_2r = infinity_ball_mass_exact(f, sigma, 2.0 * r);
    row.ratio = row.mass_2r / row.mass_r;
    row.witness = std::cbrt(row.mass_r / (row.mass_2r - row.mass_r));
    return row;
}

}  // namespace detail

// Trend of infinity-centered balls over decades r = r_top 10^-k (half-plane, exact).
inline std::vector<InfinityTrendRow> infinity_trend(const Density& f, double sigma, double r_top, int decades) {
    std::vector<InfinityTrendRow> out;
    for (int k = 0; k < decades; ++k) out.push_back(detail::trend_row(f, sigma, r_top * std::pow(10.0, -k)));
    return out;
}

inline DoublingRhoReport verify_doubling_rho(const SphereView& v, const LemmaConstants& k,
                                             const DoublingRhoOptions& opt = {}) {
    if (!v.has_infinity() || !v.report) throw PrereqError("doubling sweep needs a classified, integrable density");
    const auto& m = v.base();
    const auto& f = v.density();
    const double sigma = v.sigma();
    DoublingRhoReport rep;
    const double c0 = k.c0();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    auto log_uniform = [&](double a, double b) { return std::exp(std::log(a) + U(rng) * (std::log(b) - std::log(a))); };
    auto take = [&](const RhoBall& b) {
        rep.table.push_back(b);
        ++rep.samples;
        auto& s = rep.strata[b.stratum];
        ++s.samples;
        if (!b.resolved) {
            ++rep.resolution_limited;
            return;
        }
        ++s.resolved;
        if (b.ratio > s.worst_ratio) {
            s.worst_ratio = b.ratio;
            s.witness = b;
        }
        if (b.ratio > rep.C_murho_hat) {
            rep.C_murho_hat = b.ratio;
            rep.worst = b;
        }
    };

    // node-centered balls, centers stratified over log-radius
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& n : m.nodes) {
        lo = std::min(lo, n.radial);
        hi = std::max(hi, n.radial);
    }
    for (int c = 0; c < opt.centers; ++c) {
        const double rad = std::exp(std::log(lo) + (c + U(rng)) / opt.centers * (std::log(hi) - std::log(lo)));
        const double th = U(rng) * std::numbers::pi;
        const int x = m.nearest_node({rad * std::cos(th), rad * std::sin(th)});
        const auto field = v.d_rho(x).dist;
        const double D = v.infinity[x].point;
        const double rx = m.nodes[x].radial;
        const double rho_x = f(rx);
        const double big = std::max(2.0 * D * 1.5, v.diam_rho_hat);
        for (int j = 0; j < opt.radii_per_center; ++j) {
            const int stratum = j == 0 ? 0 : (j + 1 == opt.radii_per_center ? 2 : 1);
            const double r = stratum == 0 ? log_uniform(0.1 * c0 * D, c0 * D)
                             : stratum == 1 ? log_uniform(c0 * D, 2.0 * D)
                                            : log_uniform(2.0 * D, big);
            const double small = rho_ball_mass(v, field, D, r), large = rho_ball_mass(v, field, D, 2.0 * r);
            RhoBall b{x, r, small > 0.0 ? large / small : std::numeric_limits<double>::infinity(), stratum,
                      detail::rho_ball_resolved(v, field, x, r, opt.resolution_cells)};
            take(b);

            if (r <= c0 * D) {
                // exact node-set inclusions
                const double inner = k.a1() * r / rho_x, outer = k.a2() * r / rho_x;
                auto& inc = rep.point_inclusions;
                ++inc.balls;
                bool nontrivial = false;
                for (std::size_t i = 0; i < m.size(); ++i) {
                    if (static_cast<int>(i) == x) continue;
                    const double d = dist(m.nodes[i].p, m.nodes[x].p);
                    const bool in_rho = field[i] < r;
                    if (d < inner || in_rho) nontrivial = true;
                    if ((d < inner && !in_rho) || (in_rho && !(d < outer))) ++inc.violations;
                }
                if (nontrivial) ++inc.nontrivial;
            }
            if (b.resolved && r >= c0 * D && r <= 4.0 * D && m.euclidean) {
                const double ref = std::exp(sigma * f.log_value(rx)) * halfplane_disk_area(m.nodes[x].p, rx + 1.0);
                const double q = small / ref;
                rep.intermediate_lo = std::min(rep.intermediate_lo, q);
                rep.intermediate_hi = std::max(rep.intermediate_hi, q);
                if (r >= 0.25 * D) {
                    rep.comparable_lo = std::min(rep.comparable_lo, q);
                    rep.comparable_hi = std::max(rep.comparable_hi, q);
                }
            }
        }
    }

    // balls centered at infinity in the small-radius regime r <= tau1 / C_A
    const double tau1 = f(1.0) / k.C_A;
    const double r_top = tau1 / k.C_A;
    const HTable H(f, RadialGrid{});
    for (int j = 0; j < opt.infinity_radii; ++j) {
        const double r = r_top * std::pow(10.0, -3.0 * (j + U(rng)) / opt.infinity_radii);
        const double small = infinity_ball_mass(v, r), large = infinity_ball_mass(v, 2.0 * r);
        take(RhoBall{-1, r, large / small, 3, true});
        auto& inc = rep.infinity_inclusions;
        ++inc.balls;
        const double outer_cut = 2.0 * H.inverse(r / (2.0 * k.C1() * k.C_A * k.C_B)).value;
        const double inner_cut = H.inverse(k.C_A * r).value;
        bool nontrivial = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const bool in_ball = v.infinity[i].point < r;
            const double t = m.nodes[i].radial;
            if (in_ball) nontrivial = true;
            if ((t >= outer_cut && !in_ball) || (in_ball && t < inner_cut)) ++inc.violations;
        }
        if (nontrivial) ++inc.nontrivial;
    }

    // exact trend at infinity
    if (m.euclidean && m.layout) {
        rep.trend = infinity_trend(f, sigma, r_top, opt.trend_decades);
        const std::size_t n = rep.trend.size();
        if (n >= 3) {
            const auto& a = rep.trend[n - 3];
            const auto& b = rep.trend[n - 2];
            const auto& c = rep.trend[n - 1];
            const double g = 1.01;  // per-decade growth counted as an increase
            rep.trend_increasing = b.witness > g * a.witness && c.witness > g * b.witness;
            rep.trend_slope = (c.witness - a.witness) / 2.0;
        }
    }

    if (rep.point_inclusions.violations || rep.infinity_inclusions.violations) rep.verdict = Finding::violated;
    else if (rep.trend_increasing) rep.verdict = Finding::violated;
    else rep.verdict = Finding::holds;
    return rep;
}

}  // namespace sphere
