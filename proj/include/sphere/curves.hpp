#pragma once

// Sampled curves with cumulative lengths in both metrics and distances to the
// boundary at every vertex, the uniformity functional, and the candidate curve
// families used by the uniformity estimator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sphere/errors.hpp"
#include "sphere/space.hpp"
#include "sphere/sphericalize.hpp"

namespace sphere {

enum class Metric { base, rho };

inline std::string to_string(Metric m) { return m == Metric::base ? "d" : "d_rho"; }

struct CurveSample {
    std::string family;
    std::vector<Point> pts;
    std::vector<int> nodes;  // graph node per vertex, -1 for free points
    std::vector<double> leg_d, leg_rho;
    std::vector<double> cum_d, cum_rho;  // cumulative from the first vertex
    std::vector<double> dX, dX_rho;      // distance to the boundary at each vertex

    std::size_t size() const { return pts.size(); }
    double length(Metric m) const { return m == Metric::base ? cum_d.back() : cum_rho.back(); }
    const std::vector<double>& cum(Metric m) const { return m == Metric::base ? cum_d : cum_rho; }
    const std::vector<double>& boundary(Metric m) const { return m == Metric::base ? dX : dX_rho; }

    void accumulate() {
        cum_d.assign(1, 0.0);
        cum_rho.assign(1, 0.0);
        for (std::size_t i = 0; i < leg_d.size(); ++i) {
            cum_d.push_back(cum_d.back() + leg_d[i]);
            cum_rho.push_back(cum_rho.back() + leg_rho[i]);
        }
    }
};

// Curve along a graph path; boundary distances come from the node fields.
inline CurveSample curve_from_path(const SphereView& v, const std::vector<int>& path,
                                   std::string family = "path") {
    if (path.empty()) throw DegenerateError("empty path");
    const auto& m = v.base();
    CurveSample c;
    c.family = std::move(family);
    for (std::size_t i = 0; i < path.size(); ++i) {
        const int n = path[i];
        c.pts.push_back(m.nodes[n].p);
        c.nodes.push_back(n);
        c.dX.push_back(m.nodes[n].boundary_distance);
        c.dX_rho.push_back(v.boundary_rho[n]);
        if (i == 0) continue;
        int edge = -1;
        for (int e : m.incident(path[i - 1]))
            if (m.other(e, path[i - 1]) == n) edge = e;
        if (edge < 0) throw DegenerateError("path uses a missing edge");
        c.leg_d.push_back(m.edges[edge].length);
        c.leg_rho.push_back(v.edge_rho[edge]);
    }
    c.accumulate();
    return c;
}

namespace detail {

inline void require_polar(const SphereView& v) {
    if (!v.base().euclidean || !v.base().layout)
        throw PrereqError("free polylines need a built half-plane model");
}

// Local step for free curves: half the angular cell at the current radius.
inline double curve_step(const SphereView& v, Point p) {
    const auto& L = *v.base().layout;
    return 0.5 * L.dtheta * std::max(norm(p), 4.0 * L.r_inner);
}

inline void push_free(const SphereView& v, CurveSample& c, Point p) {
    if (!c.pts.empty()) {
        c.leg_d.push_back(dist(c.pts.back(), p));
        c.leg_rho.push_back(segment_rho(v.density(), c.pts.back(), p, v.rule));
    }
    const int n = v.base().nearest_node(p);
    c.pts.push_back(p);
    c.nodes.push_back(-1);
    c.dX.push_back(p.y);
    // graph route through the nearest node, or the analytic escapes
    double b = v.escape_rho(p);
    if (std::isfinite(v.boundary_rho[n]))
        b = std::min(b, v.boundary_rho[n] + segment_rho(v.density(), p, v.base().nodes[n].p, v.rule));
    c.dX_rho.push_back(b);
}

inline void push_segment(const SphereView& v, CurveSample& c, Point a, Point b) {
    if (c.pts.empty()) push_free(v, c, a);
    const double len = dist(a, b);
    double t = 0.0;
    int guard = 0;
    while (t < len && ++guard < 1'000'000) {
        t = std::min(len, t + curve_step(v, lerp(a, b, t / len)));
        push_free(v, c, lerp(a, b, t / len));
    }
}

inline void push_arc(const SphereView& v, CurveSample& c, Point center, double R, double phi0, double phi1) {
    auto at = [&](double phi) { return Point{center.x + R * std::cos(phi), center.y + R * std::sin(phi)}; };
    if (c.pts.empty()) push_free(v, c, at(phi0));
    const double dir = phi1 >= phi0 ? 1.0 : -1.0;
    double phi = phi0;
    int guard = 0;
    while (dir * (phi1 - phi) > 0.0 && ++guard < 1'000'000) {
        phi += dir * curve_step(v, at(phi)) / R;
        if (dir * (phi1 - phi) < 0.0) phi = phi1;
        push_free(v, c, at(phi));
    }
}

}  // namespace detail

// Free polyline through the given corners, subdivided to the local mesh scale.
inline CurveSample curve_from_polyline(const SphereView& v, const std::vector<Point>& corners,
                                       std::string family = "polyline") {
    detail::require_polar(v);
    if (corners.empty()) throw DegenerateError("empty polyline");
    CurveSample c;
    c.family = std::move(family);
    detail::push_free(v, c, corners.front());
    for (std::size_t i = 1; i < corners.size(); ++i) detail::push_segment(v, c, corners[i - 1], corners[i]);
    c.accumulate();
    return c;
}

// Radial out to radius r_out, along the circle |z| = r_out, radial in.
inline CurveSample detour_curve(const SphereView& v, Point x, Point y, double r_out) {
    detail::require_polar(v);
    CurveSample c;
    c.family = "detour";
    const double tx = std::atan2(x.y, x.x), ty = std::atan2(y.y, y.x);
    const Point xo{r_out * std::cos(tx), r_out * std::sin(tx)};
    const Point yo{r_out * std::cos(ty), r_out * std::sin(ty)};
    detail::push_free(v, c, x);
    detail::push_segment(v, c, x, xo);
    detail::push_arc(v, c, {0.0, 0.0}, r_out, tx, ty);
    detail::push_segment(v, c, yo, y);
    c.accumulate();
    return c;
}

// Circular arc orthogonal to the boundary line (a hyperbolic geodesic), or the
// vertical segment when the points are stacked.
inline CurveSample boundary_orthogonal_arc(const SphereView& v, Point x, Point y) {
    detail::require_polar(v);
    const double dx = x.x - y.x;
    const double scale = std::max({norm(x), norm(y), 1e-300});
    if (std::abs(dx) < 1e-12 * scale) {
        auto c = curve_from_polyline(v, {x, y}, "orthogonal_arc");
        return c;
    }
    const double cx = (x.x * x.x + x.y * x.y - y.x * y.x - y.y * y.y) / (2.0 * dx);
    const double R = std::hypot(x.x - cx, x.y);
    CurveSample c;
    c.family = "orthogonal_arc";
    detail::push_arc(v, c, {cx, 0.0}, R, std::atan2(x.y, x.x - cx), std::atan2(y.y, y.x - cx));
    c.accumulate();
    return c;
}

// max( l(gamma) / dist(x, y), max over interior vertices z of
// min(l(gamma_xz), l(gamma_zy)) / d_X(z) ) in the chosen metric.
inline double uniformity_functional(const CurveSample& c, Metric metric, double pair_distance) {
    if (c.size() < 2 || !(pair_distance > 0.0))
        throw DegenerateError("uniformity functional needs distinct endpoints");
    const auto& cum = c.cum(metric);
    const auto& bd = c.boundary(metric);
    const double total = cum.back();
    double worst = total / pair_distance;
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
        const double near = std::min(cum[i], total - cum[i]);
        if (near <= 0.0) continue;
        worst = std::max(worst, bd[i] > 0.0 ? near / bd[i] : std::numeric_limits<double>::infinity());
    }
    return worst;
}

}  // namespace sphere
