#pragma once

// Uniformity estimation, sharpness certificates and the comparison-lemma checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sphere/conditions.hpp"
#include "sphere/constants.hpp"
#include "sphere/curves.hpp"
#include "sphere/errors.hpp"
#include "sphere/sphericalize.hpp"

namespace sphere {

// ---- reports ----------------------------------------------------------------

enum class Finding { holds, violated, resolution_limited };

inline std::string to_string(Finding f) {
    switch (f) {
        case Finding::holds: return "holds";
        case Finding::violated: return "violated";
        case Finding::resolution_limited: return "resolution-limited";
    }
    return "?";
}

// Discretization allowance: worst graph/continuum anisotropy of the 8-neighbour
// log-polar mesh (1/cos(pi/8)) inflated by the mesh scale.
inline double discretization_tolerance(double mesh_rel) {
    return 1.0 / std::cos(std::numbers::pi / 8.0) * (1.0 + 5.0 * mesh_rel);
}

struct VerifierReport {
    std::string lemma;
    int samples = 0;
    double worst_ratio = 0.0;  // measured / allowed; the statement holds at <= 1
    std::string witness;
    Finding verdict = Finding::holds;
    double tolerance = 1.0;
    std::string note;

    void record(double ratio, const std::string& where) {
        if (++samples == 1 || ratio > worst_ratio) {
            worst_ratio = ratio;
            witness = where;
        }
    }
    void settle() {
        if (worst_ratio <= 1.0) verdict = Finding::holds;
        else if (worst_ratio <= tolerance) verdict = Finding::resolution_limited;
        else verdict = Finding::violated;
    }
};

inline std::string point_label(Point p) {
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

// ---- pair sampling ----------------------------------------------------------

// Stratified pairs: |x| log-uniform over strata of [r_lo, r_hi], |y|/|x| log-uniform
// in [1/64, 64], angles uniform; continuous positions are mapped to nearest nodes.
inline std::vector<std::pair<int, int>> sample_pairs(const SpaceModel& m, int n, std::uint64_t seed,
                                                     double r_lo = 0.1, double r_hi = -1.0) {
    if (r_hi <= 0.0) r_hi = m.R_max / 4.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto pick = [&](double r) {
        const double th = U(rng) * std::numbers::pi;
        return m.nearest_node({r * std::cos(th), r * std::sin(th)});
    };
    std::vector<std::pair<int, int>> out;
    const double l0 = std::log(r_lo), l1 = std::log(r_hi);
    for (int k = 0; static_cast<int>(out.size()) < n && k < 20 * n; ++k) {
        const double u = (static_cast<double>(out.size()) + U(rng)) / n;
        const double rx = std::exp(l0 + u * (l1 - l0));
        const double ry = std::clamp(rx * std::exp((2.0 * U(rng) - 1.0) * std::log(64.0)), r_lo, m.R_max / 2.0);
        const int x = pick(rx), y = pick(ry);
        if (x != y) out.emplace_back(x, y);
    }
    return out;
}

// ---- uniformity estimator ---------------------------------------------------

struct UniformityRow {
    int x = -1, y = -1;
    double best_functional = std::numeric_limits<double>::infinity();
    std::string family;
    double certificate_lb = 1.0;  // any curve is at least as long as the distance
    double pair_distance = 0.0;
    double rho_geodesic = std::numeric_limits<double>::infinity();
    double d_geodesic = std::numeric_limits<double>::infinity();
    double detour = std::numeric_limits<double>::infinity();
    bool family_limited = false;
};

struct UniformityEstimate {
    Metric metric = Metric::rho;
    double C_hat = 0.0;
    int worst_row = -1;
    int family_limited = 0;
    std::vector<UniformityRow> rows;
    std::optional<CurveSample> witness;
};

struct UniformityOptions {
    bool rho_geodesic = true;
    bool d_geodesic = true;
    bool detour = true;
    bool orthogonal_arc = true;
    double detour_factor = 2.0;
    double detour_reach = 1.0;  // outermost detour radius as a fraction of R_max
};

namespace detail {

inline std::vector<CurveSample> candidate_curves(const SphereView& v, int x, int y, const UniformityOptions& opt,
                                                 const DistanceField* rho_field) {
    const auto& m = v.base();
    std::vector<CurveSample> out;
    const bool polar = m.euclidean && m.layout.has_value();
    if (opt.rho_geodesic && rho_field) out.push_back(curve_from_path(v, rho_field->path_to(m, y), "rho_geodesic"));
    if (opt.d_geodesic) {
        if (polar) {
            out.push_back(curve_from_polyline(v, {m.nodes[x].p, m.nodes[y].p}, "d_geodesic"));
        } else {
            const auto f = dijkstra(m, m.lengths(), x);
            out.push_back(curve_from_path(v, f.path_to(m, y), "d_geodesic"));
        }
    }
    if (!polar) return out;
    if (opt.orthogonal_arc) out.push_back(boundary_orthogonal_arc(v, m.nodes[x].p, m.nodes[y].p));
    if (opt.detour) {
        const double reach = opt.detour_reach * m.R_max;
        for (double r = std::max(m.nodes[x].radial, m.nodes[y].radial); r <= reach * (1.0 + 1e-12);
             r *= opt.detour_factor)
            out.push_back(detour_curve(v, m.nodes[x].p, m.nodes[y].p, r));
    }
    return out;
}

}  // namespace detail

inline UniformityRow estimate_pair(const SphereView& v, int x, int y, Metric metric,
                                   const UniformityOptions& opt = {}, CurveSample* winner = nullptr) {
    if (x == y) throw DegenerateError("uniformity pair with coinciding endpoints");
    const auto& m = v.base();
    UniformityRow row;
    row.x = x;
    row.y = y;
    std::optional<DistanceField> field;
    if (metric == Metric::rho || opt.rho_geodesic) field = v.d_rho(x);
    const auto curves = detail::candidate_curves(v, x, y, opt, field ? &*field : nullptr);
    // best available estimate of the distance: graph distance or any shorter candidate
    double d = metric == Metric::rho ? field->dist[y]
                                     : (m.euclidean ? dist(m.nodes[x].p, m.nodes[y].p)
                                                    : dijkstra(m, m.lengths(), x).dist[y]);
    for (const auto& c : curves) d = std::min(d, c.length(metric));
    row.pair_distance = d;
    for (const auto& c : curves) {
        const double u = uniformity_functional(c, metric, d);
        if (c.family == "rho_geodesic") row.rho_geodesic = u;
        else if (c.family == "d_geodesic") row.d_geodesic = u;
        else if (c.family == "detour") row.detour = std::min(row.detour, u);
        if (u < row.best_functional) {
            row.best_functional = u;
            row.family = c.family;
            if (winner) *winner = c;
        }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    int present = 0;
    for (double u : {row.rho_geodesic, row.d_geodesic, row.detour})
        if (std::isfinite(u)) {
            lo = std::min(lo, u);
            hi = std::max(hi, u);
            ++present;
        }
    row.family_limited = present >= 2 && hi > 2.0 * lo;
    return row;
}

inline UniformityEstimate estimate_uniformity(const SphereView& v, const std::vector<std::pair<int, int>>& pairs,
                                              Metric metric, const UniformityOptions& opt = {}) {
    UniformityEstimate out;
    out.metric = metric;
    for (const auto& [x, y] : pairs) {
        CurveSample c;
        auto row = estimate_pair(v, x, y, metric, opt, &c);
        if (row.family_limited) ++out.family_limited;
        if (row.best_functional > out.C_hat || out.worst_row < 0) {
            out.C_hat = std::max(out.C_hat, row.best_functional);
            out.worst_row = static_cast<int>(out.rows.size());
            out.witness = std::move(c);
        }
        out.rows.push_back(row);
    }
    return out;
}

// ---- sharpness certificates ---------------------------------------------------

struct FailsBCertificate {
    double R1 = 0.0, r = 0.0, R2 = 0.0;
    double value = 0.0;  // lower bound on the cone term of any curve through |z| = r
    bool informative = true;
};

// min(int_{R1}^r rho, int_r^{R2} rho) / ((pi/2) r rho(r)).
inline double certificate_fails_B(const Density& f, double R1, double r, double R2) {
    if (!(R1 <= r && r <= R2)) throw DomainError("certificate radii must satisfy R1 <= r <= R2");
    const double a = f.integral(R1, r), b = f.integral(r, R2);
    return std::min(a, b) / (0.5 * std::numbers::pi * r * f(r));
}

// Radii from the tail-quartering rule T(R1) = 2 T(r) = 4 T(R2).
inline FailsBCertificate fails_B_quartering(const Density& f, double r) {
    f.require_integrable();
    FailsBCertificate c;
    c.r = r;
    const double lt = f.log_tail(r);
    if (lt + std::log(2.0) >= f.log_tail(f.domain_floor()))
        throw DomainError("radius too small for the quartering rule");
    c.R1 = f.tail_inverse_log(lt + std::log(2.0));
    c.R2 = f.tail_inverse_log(lt - std::log(2.0));
    // the pieces are T(r) and T(r)/2 by construction; log space reaches large radii
    c.value = std::exp(lt - std::log(std::numbers::pi * r) - f.log_value(r));
    return c;
}

// Pushes r up geometrically until the certificate exceeds C.
inline FailsBCertificate fails_B_refute(const Density& f, double C, bool b_passes, double r0 = 4.0,
                                        double r_cap = 1e300) {
    for (double r = r0; r < r_cap; r *= 2.0) {
        try {
            auto c = fails_B_quartering(f, r);
            c.informative = !b_passes;
            if (c.value > C) return c;
        } catch (const DomainError&) {
        }
    }
    throw PrereqError("certificate does not exceed " + std::to_string(C) + " below r = " + std::to_string(r_cap));
}

struct FailsACertificate {
    double C = 0.0;
    double r = 0.0, R_prime = 0.0, R = 0.0;
    double cone_margin = 0.0;  // > 1: a curve reaching |z| >= R' breaks the cone condition
    double qc_margin = 0.0;    // > 1: a curve confined to |z| <= R' breaks quasiconvexity
    bool threshold_met = true; // false when the radius search fell back to the best candidate
    bool informative = true;
    bool refutes() const { return cone_margin > 1.0 && qc_margin > 1.0; }
};

// Test pair |x| = |y| = r with d(x, y) = r + 1. Radii follow
// T(r) = (3C/2 + 1) T(R') = (2C + 1) T(R).
inline FailsACertificate certificate_fails_A(const Density& f, double C, double C_qd, bool a_passes = false,
                                             int max_doublings = 1100) {
    if (!(C > 0.0) || !(C_qd >= 1.0) || !std::isfinite(C_qd))
        throw DomainError("certificate needs C > 0 and finite C_qd >= 1");
    f.require_integrable();
    FailsACertificate out;
    out.C = C;
    out.informative = !a_passes;
    const double l2c = std::log(2.0 * C + 1.0), l15c = std::log(1.5 * C + 1.0);
    // r >= 1 requires T(R) <= T(1) / (2C + 1)
    const double M = f.tail_inverse_log(f.log_tail(1.0) - l2c);
    const double need = std::log(8.0 * C * C_qd * (C + 1.0));
    auto slack = [&](double R) { return std::log(R + 1.0) + f.log_value(R) - need - f.log_tail(R); };
    double R = std::max(M, f.domain_floor()) * 1.5 + 1e-9, best_R = R, best = -std::numeric_limits<double>::infinity();
    bool met = false;
    for (int k = 0; k < max_doublings && std::isfinite(R); ++k, R *= 2.0) {
        const double s = slack(R);
        if (s > best) {
            best = s;
            best_R = R;
        }
        if (s >= 0.0) {
            met = true;
            best_R = R;
            break;
        }
    }
    out.threshold_met = met;
    out.R = best_R;
    const double ltR = f.log_tail(out.R);
    out.r = f.tail_inverse_log(ltR + l2c);
    out.R_prime = f.tail_inverse_log(ltR + l2c - l15c);
    const double ltr = f.log_tail(out.r), ltRp = f.log_tail(out.R_prime);
    out.cone_margin = std::exp(ltr - std::log(C + 1.0) - ltRp);
    out.qc_margin = std::exp(std::log(out.r + 1.0) + f.log_value(out.R) - std::log(2.0 * C * C_qd) - ltr);
    return out;
}

// The antipodal test pair: |x| = |y| = r, d(x, y) = r + 1.
inline std::pair<Point, Point> antipodal_pair(double r) {
    const double a = 0.5 * (r + 1.0);
    if (a >= r) throw DomainError("antipodal pair needs r > 1");
    const double h = std::sqrt(r * r - a * a);
    return {{-a, h}, {a, h}};
}

// ---- comparison lemmas ------------------------------------------------------

struct BracketLemmaOptions {
    int curve_pairs = 60;
    std::uint64_t seed = 7;
};

namespace detail {

inline bool annulus_pair(double rx, double ry) {
    return 0.5 * (rx + 1.0) <= ry + 1.0 && ry + 1.0 <= 2.0 * (rx + 1.0);
}

// Vertex indices where the curve first reaches |z| = 2^i |x|.
inline std::vector<std::size_t> dyadic_cuts(const CurveSample& c) {
    std::vector<std::size_t> cuts{0};
    const double r0 = norm(c.pts.front());
    double next = 2.0 * r0;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
        if (norm(c.pts[i]) >= next) {
            cuts.push_back(i);
            while (norm(c.pts[i]) >= next) next *= 2.0;
        }
    cuts.push_back(c.size() - 1);
    return cuts;
}

inline CurveSample subcurve(const CurveSample& c, std::size_t a, std::size_t b) {
    CurveSample s;
    s.family = c.family;
    s.pts.assign(c.pts.begin() + a, c.pts.begin() + b + 1);
    s.nodes.assign(c.nodes.begin() + a, c.nodes.begin() + b + 1);
    s.dX.assign(c.dX.begin() + a, c.dX.begin() + b + 1);
    s.dX_rho.assign(c.dX_rho.begin() + a, c.dX_rho.begin() + b + 1);
    s.leg_d.assign(c.leg_d.begin() + a, c.leg_d.begin() + b);
    s.leg_rho.assign(c.leg_rho.begin() + a, c.leg_rho.begin() + b);
    s.accumulate();
    return s;
}

}  // namespace detail

// Checks the radius bounds along uniform curves, the density swing along them,
// the two-sided distance comparison for comparable radii, subcurve uniformity,
// quasi-monotonicity of rho along uniform curves, and the infinity bracket.
// Uniform curves are boundary-orthogonal arcs with their measured constant.
inline std::vector<VerifierReport> verify_bracket_lemmas(const SphereView& v,
                                                         const std::vector<std::pair<int, int>>& pairs,
                                                         const LemmaConstants& k,
                                                         const BracketLemmaOptions& opt = {}) {
    const auto& m = v.base();
    const auto& f = v.density();
    const double tol = discretization_tolerance(m.mesh_rel);
    auto make = [tol](const char* name) {
        VerifierReport r;
        r.lemma = name;
        r.tolerance = tol;
        return r;
    };
    auto radius = make("uniform_curve_radius_bounds"), swing = make("uniform_curve_density_swing"),
         lower = make("distance_lower_comparison"), upper = make("distance_upper_comparison"),
         sub = make("subcurve_uniformity"), mono = make("density_quasi_monotone"), inf = make("infinity_bracket");
    mono.note = "reports max rho(|z'|)/rho(|z|) for z before z' along the curve; no explicit constant";

    // distance comparison on comparable radii; one Dijkstra per distinct source
    for (const auto& [x0, y0] : pairs) {
        int x = x0, y = y0;
        if (m.nodes[x].radial > m.nodes[y].radial) std::swap(x, y);
        const double rx = m.nodes[x].radial, ry = m.nodes[y].radial;
        if (!detail::annulus_pair(rx, ry)) continue;
        const double d = m.euclidean ? dist(m.nodes[x].p, m.nodes[y].p) : dijkstra(m, m.lengths(), x).dist[y];
        const double drho = v.d_rho(x).dist[y];
        const std::string w = point_label(m.nodes[x].p) + "-" + point_label(m.nodes[y].p);
        lower.record(k.lower_factor() * f(rx) * d / drho, w);
        upper.record(drho / (k.C2() * f(rx) * d), w);
    }

    // uniform-curve lemmas on boundary-orthogonal arcs
    if (m.euclidean && m.layout) {
        const auto cp = sample_pairs(m, opt.curve_pairs, opt.seed + 1);
        for (auto [x, y] : cp) {
            if (m.nodes[x].radial > m.nodes[y].radial) std::swap(x, y);
            const Point px = m.nodes[x].p, py = m.nodes[y].p;
            const auto c = boundary_orthogonal_arc(v, px, py);
            const double CU = uniformity_functional(c, Metric::base, dist(px, py));
            const LemmaConstants kc{k.C_A, k.C_B, std::max(CU, 1.0)};
            const double rx = norm(px), ry = norm(py);
            const std::string w = point_label(px) + "-" + point_label(py);
            double rho_min_prefix = std::numeric_limits<double>::infinity(), mono_worst = 0.0;
            for (const auto& z : c.pts) {
                const double rz = norm(z);
                radius.record(std::max(rx / ((1.0 + kc.C_U) * rz), rz / ((1.0 + kc.C_U) * rx + kc.C_U * ry)), w);
                if (detail::annulus_pair(rx, ry)) swing.record(f(rz) / (kc.density_swing() * f(rx)), w);
                rho_min_prefix = std::min(rho_min_prefix, f(rz));
                mono_worst = std::max(mono_worst, f(rz) / rho_min_prefix);
            }
            mono.record(mono_worst, w);
            if (ry >= 2.0 * rx) {
                const auto cuts = detail::dyadic_cuts(c);
                for (std::size_t i = 1; i < cuts.size(); ++i) {
                    if (cuts[i] <= cuts[i - 1]) continue;
                    const auto s = detail::subcurve(c, cuts[i - 1], cuts[i]);
                    const double span = dist(s.pts.front(), s.pts.back());
                    if (!(span > 0.0)) continue;
                    sub.record(uniformity_functional(s, Metric::base, span) / (kc.C_U * (2.0 * kc.C_U + 3.0)), w);
                }
            }
        }
    }

    if (v.has_infinity()) {
        std::mt19937_64 rng(opt.seed + 2);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(m.size()) - 1);
        for (int s = 0; s < 200; ++s) {
            const int x = pick(rng);
            const double t = m.nodes[x].radial;
            const double h = (t + 1.0) * f(t);
            const double p = v.infinity[x].point;
            inf.record(std::max(h / (k.C_A * p), p / (k.C1() * h)), point_label(m.nodes[x].p));
        }
    }
    std::vector<VerifierReport> out{radius, swing, lower, upper, sub, mono, inf};
    for (auto& r : out) r.settle();
    out[5].verdict = Finding::holds;
    return out;
}

// Lower bound on d_rho from radial monotonicity: |T(|x|) - T(|y|)| <= d_rho(x, y).
struct LowerBoundCheck {
    int samples = 0;
    int violations = 0;
    double worst_ratio = 0.0;  // max bound / d_rho
    std::pair<int, int> witness{-1, -1};
};

inline LowerBoundCheck check_radial_lower_bound(const SphereView& v, int sources, int targets_per_source,
                                                std::uint64_t seed, double tolerance = 1e-6) {
    const auto& m = v.base();
    const auto& f = v.density();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(m.size()) - 1);
    LowerBoundCheck out;
    for (int s = 0; s < sources; ++s) {
        const int x = pick(rng);
        const auto field = v.d_rho(x);
        for (int t = 0; t < targets_per_source; ++t) {
            const int y = pick(rng);
            if (y == x) continue;
            const double a = m.nodes[x].radial, b = m.nodes[y].radial;
            const double bound = f.integral(std::min(a, b), std::max(a, b));
            const double ratio = bound / field.dist[y];
            ++out.samples;
            if (ratio > out.worst_ratio) {
                out.worst_ratio = ratio;
                out.witness = {x, y};
            }
            if (bound > field.dist[y] * (1.0 + tolerance)) ++out.violations;
        }
    }
    return out;
}

}  // namespace sphere
