#pragma once

// Discrete upper gradients, the curve-integral transform identity, the
// upper-gradient and L^p transforms, and empirical p-Poincare constants on
// balls of (X, d, mu) and (X, d_rho, mu_rho).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sphere/curves.hpp"
#include "sphere/errors.hpp"
#include "sphere/space.hpp"
#include "sphere/sphericalize.hpp"

namespace sphere {

struct ScalarField {
    std::string tag;
    std::vector<double> values;
};

struct GradientField {
    Metric metric = Metric::base;
    std::vector<double> values;
};

// ---- test-function suite ------------------------------------------------------

inline constexpr const char* suite_version = "suite_v1";

inline ScalarField constant_field(const SpaceModel& m, double c = 1.0) {
    return {"constant", std::vector<double>(m.size(), c)};
}

// Low-frequency modes in (log(1+|p|), angle), then three neighbour-averaging passes.
inline ScalarField smooth_random_field(const SpaceModel& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    struct Mode { double a, k, l, phase; };
    std::vector<Mode> modes;
    for (int j = 0; j < 4; ++j)
        modes.push_back({2.0 * U(rng) - 1.0, 0.5 + 2.5 * U(rng), std::floor(4.0 * U(rng)), 2.0 * std::numbers::pi * U(rng)});
    std::vector<double> u(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Point p = m.nodes[i].p;
        const double s = std::log1p(norm(p)), th = std::atan2(p.y, p.x);
        double val = 0.0;
        for (const auto& md : modes) val += md.a * std::cos(md.k * s + md.l * th + md.phase);
        u[i] = val;
    }
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> next(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            double s = u[i];
            int n = 1;
            for (int e : m.incident(static_cast<int>(i))) {
                s += u[m.other(e, static_cast<int>(i))];
                ++n;
            }
            next[i] = s / n;
        }
        u.swap(next);
    }
    return {"random_smooth_" + std::to_string(seed), std::move(u)};
}

// Distance functions from 5 anchors, both coordinates, log-radial, and 8 seeded
// random smooth fields.
inline std::vector<ScalarField> test_suite(const SpaceModel& m, std::uint64_t seed = 1) {
    std::vector<ScalarField> out;
    const double R = m.R_max;
    const std::vector<Point> anchors{{0.0, 1.0}, {-R / 8, R / 8}, {R / 8, R / 16}, {0.0, R / 2}, {1.0, 0.5}};
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const int src = m.nearest_node(anchors[a]);
        out.push_back({"distance_" + std::to_string(a), base_distance_field(m, src)});
    }
    ScalarField cx{"coordinate_x", {}}, cy{"coordinate_y", {}}, lr{"log_radial", {}};
    for (const auto& n : m.nodes) {
        cx.values.push_back(n.p.x);
        cy.values.push_back(n.p.y);
        lr.values.push_back(std::log(n.radial + 1.0));
    }
    out.push_back(std::move(cx));
    out.push_back(std::move(cy));
    out.push_back(std::move(lr));
    for (int k = 0; k < 8; ++k) out.push_back(smooth_random_field(m, seed * 1000 + k));
    return out;
}

// ---- upper gradients -----------------------------------------------------------

// g(x) = max over incident edges of |u(x) - u(y)| / w(e).
inline GradientField local_upper_gradient(const SpaceModel& m, std::span<const double> weights,
                                          const ScalarField& u, Metric metric) {
    if (u.values.size() != m.size()) throw DegenerateError("field size does not match the model");
    GradientField g{metric, std::vector<double>(m.size(), 0.0)};
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        const auto& ed = m.edges[e];
        const double slope = std::abs(u.values[ed.a] - u.values[ed.b]) / weights[e];
        g.values[ed.a] = std::max(g.values[ed.a], slope);
        g.values[ed.b] = std::max(g.values[ed.b], slope);
    }
    return g;
}

inline GradientField local_upper_gradient(const SphereView& v, const ScalarField& u, Metric metric) {
    return metric == Metric::base ? local_upper_gradient(v.base(), v.base().lengths(), u, metric)
                                  : local_upper_gradient(v.base(), v.edge_rho, u, metric);
}

// Largest |u(a) - u(b)| / (max(g(a), g(b)) w(e)); at most 1 for an upper gradient.
inline double upper_gradient_excess(const SpaceModel& m, std::span<const double> weights, const ScalarField& u,
                                    std::span<const double> g) {
    double worst = 0.0;
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        const auto& ed = m.edges[e];
        const double du = std::abs(u.values[ed.a] - u.values[ed.b]);
        if (du == 0.0) continue;
        const double bound = std::max(g[ed.a], g[ed.b]) * weights[e];
        worst = std::max(worst, bound > 0.0 ? du / bound : std::numeric_limits<double>::infinity());
    }
    return worst;
}

// ---- transform identities ---------------------------------------------------

struct TransformIdentityResult {
    int curves = 0;
    double worst_relative_error = 0.0;
    int witness = -1;
};

// Per curve: sum over legs of g * (d_rho leg length) against sum of
// rho(|midpoint|) * g * (d leg length). g on a leg is the node gradient nearest
// to the leg midpoint; g = 1 everywhere checks the length identity itself.
inline TransformIdentityResult transform_identity_check(const SphereView& v, const std::vector<CurveSample>& curves,
                                                        const GradientField* g = nullptr) {
    TransformIdentityResult out;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& cv = curves[c];
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i + 1 < cv.size(); ++i) {
            const Point mid = lerp(cv.pts[i], cv.pts[i + 1], 0.5);
            const double gl = g ? g->values[v.base().nearest_node(mid)] : 1.0;
            lhs += gl * cv.leg_rho[i];
            rhs += v.density()(norm(mid)) * gl * cv.leg_d[i];
        }
        ++out.curves;
        const double err = lhs == rhs ? 0.0 : std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
        if (err > out.worst_relative_error || out.witness < 0) {
            out.worst_relative_error = std::max(out.worst_relative_error, err);
            out.witness = static_cast<int>(c);
        }
    }
    return out;
}

// Random polylines with 2 to 5 legs at radii log-uniform in [r_lo, r_hi].
inline std::vector<CurveSample> random_curves(const SphereView& v, int count, std::uint64_t seed, double r_lo = 0.1,
                                              double r_hi = -1.0) {
    if (r_hi <= 0.0) r_hi = v.base().R_max / 2.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<CurveSample> out;
    for (int c = 0; c < count; ++c) {
        const int corners = 3 + static_cast<int>(U(rng) * 4.0);
        std::vector<Point> pts;
        for (int k = 0; k < corners; ++k) {
            const double r = std::exp(std::log(r_lo) + U(rng) * (std::log(r_hi) - std::log(r_lo)));
            const double th = (0.02 + 0.96 * U(rng)) * std::numbers::pi;
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        out.push_back(curve_from_polyline(v, pts, "random_polyline"));
    }
    return out;
}

struct UpperGradientTransform {
    double edge_excess = 0.0;      // upper_gradient_excess of rho * g_rho in d; 1 + per-edge bias
    double lp_relative_error = 0.0;  // | ||g||_{L^p(mu)} - ||rho^(-sigma/p) g||_{L^p(mu_rho)} | / ||g||
    double norm_mu = 0.0;
    double norm_mu_rho = 0.0;
};

inline UpperGradientTransform ug_transform_check(const SphereView& v, const ScalarField& u, double p) {
    if (!(p >= 1.0)) throw DomainError("p must be at least 1");
    const auto& m = v.base();
    UpperGradientTransform out;
    const auto g_rho = local_upper_gradient(v, u, Metric::rho);
    std::vector<double> scaled(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) scaled[i] = v.density()(m.nodes[i].radial) * g_rho.values[i];
    out.edge_excess = upper_gradient_excess(m, m.lengths(), u, scaled);

    const auto g = local_upper_gradient(v, u, Metric::base);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        a += std::pow(g.values[i], p) * m.nodes[i].mu;
        const double w = std::exp(-v.sigma() / p * v.density().log_value(m.nodes[i].radial)) * g.values[i];
        b += std::pow(w, p) * v.node_mu_rho[i];
    }
    out.norm_mu = std::pow(a, 1.0 / p);
    out.norm_mu_rho = std::pow(b, 1.0 / p);
    out.lp_relative_error = out.norm_mu > 0.0 ? std::abs(out.norm_mu - out.norm_mu_rho) / out.norm_mu
                                              : std::abs(out.norm_mu_rho);
    return out;
}

// ---- Poincare sweep ----------------------------------------------------------

struct PoincareBall {
    int center = -1;
    double radius = 0.0;
};

struct PoincareSample {
    int center = -1;
    double radius = 0.0;
    Metric metric = Metric::base;
    std::string field;
    double p = 1.0, lambda = 1.0;
    double lhs = 0.0;  // mean of |u - u_B| over B
    double rhs = 0.0;  // r * (mean of g^p over lambda B)^(1/p)
    double ratio = 0.0;
};

struct PoincareSweep {
    Metric metric = Metric::base;
    double C_P_hat = 0.0;
    int witness = -1;
    int skipped = 0;  // dilated ball leaves the model or the ball holds too few nodes
    std::vector<PoincareSample> samples;
};

struct PoincareOptions {
    double p = 1.0;
    double lambda = 2.0;
    int min_nodes = 7;
};

// Metric-specific distance field from a node.
inline std::vector<double> metric_field(const SphereView& v, int x, Metric metric) {
    return metric == Metric::base ? base_distance_field(v.base(), x) : v.d_rho(x).dist;
}

// Balls with centers stratified over log-radius and radii log-uniform between
// three local cells and a metric-specific cap.
inline std::vector<PoincareBall> sample_poincare_balls(const SphereView& v, Metric metric, int count,
                                                       std::uint64_t seed, double lambda) {
    const auto& m = v.base();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<PoincareBall> out;
    const double lo = std::log(0.05), hi = std::log(m.R_max / 4.0);
    for (int k = 0; k < count; ++k) {
        const double rad = std::exp(lo + (k + U(rng)) / count * (hi - lo));
        const double th = (0.05 + 0.9 * U(rng)) * std::numbers::pi;
        const int x = m.nearest_node({rad * std::cos(th), rad * std::sin(th)});
        const double rx = m.nodes[x].radial;
        double r_min, r_max;
        if (metric == Metric::base) {
            r_min = 3.0 * cell_size(m, rx);
            r_max = std::max(r_min, (m.R_max - rx) / (1.5 * lambda));
            r_max = std::min(r_max, 2.0 * (rx + 1.0));
        } else {
            double widest = 0.0;
            for (int e : m.incident(x)) widest = std::max(widest, v.edge_rho[e]);
            r_min = 3.0 * widest;
            r_max = std::max(r_min, v.has_infinity() ? v.infinity[x].point / lambda : v.diam_rho_hat / lambda);
        }
        out.push_back({x, std::exp(std::log(r_min) + U(rng) * (std::log(r_max) - std::log(r_min)))});
    }
    return out;
}

inline PoincareSweep poincare_sweep(const SphereView& v, Metric metric, const std::vector<PoincareBall>& balls,
                                    const std::vector<ScalarField>& fields, const PoincareOptions& opt = {}) {
    if (!(opt.p >= 1.0) || !(opt.lambda >= 1.0)) throw DomainError("need p >= 1 and lambda >= 1");
    const auto& m = v.base();
    PoincareSweep out;
    out.metric = metric;
    std::vector<GradientField> grads;
    for (const auto& u : fields) grads.push_back(local_upper_gradient(v, u, metric));
    auto mass = [&](std::size_t i) { return metric == Metric::base ? m.nodes[i].mu : v.node_mu_rho[i]; };

    for (const auto& b : balls) {
        const auto field = metric_field(v, b.center, metric);
        std::vector<int> inner, outer;
        bool exits = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (field[i] < opt.lambda * b.radius) {
                outer.push_back(static_cast<int>(i));
                if (m.nodes[i].outer_ring) exits = true;
                if (field[i] < b.radius) inner.push_back(static_cast<int>(i));
            }
        }
        if (exits || static_cast<int>(inner.size()) < opt.min_nodes) {
            ++out.skipped;
            continue;
        }
        double mu_in = 0.0, mu_out = 0.0;
        for (int i : inner) mu_in += mass(i);
        for (int i : outer) mu_out += mass(i);
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const auto& u = fields[f].values;
            double mean = 0.0;
            for (int i : inner) mean += u[i] * mass(i);
            mean /= mu_in;
            double osc = 0.0;
            for (int i : inner) osc += std::abs(u[i] - mean) * mass(i);
            double gp = 0.0;
            for (int i : outer) gp += std::pow(grads[f].values[i], opt.p) * mass(i);
            PoincareSample s{b.center, b.radius, metric, fields[f].tag, opt.p, opt.lambda, osc / mu_in,
                             b.radius * std::pow(gp / mu_out, 1.0 / opt.p), 0.0};
            s.ratio = s.rhs > 0.0 ? s.lhs / s.rhs : (s.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (s.ratio > out.C_P_hat || out.witness < 0) {
                out.C_P_hat = std::max(out.C_P_hat, s.ratio);
                out.witness = static_cast<int>(out.samples.size());
            }
            out.samples.push_back(std::move(s));
        }
    }
    return out;
}

// Sum of g^p over lambda B, which can only grow with lambda.
inline double dilated_energy(const SphereView& v, Metric metric, const PoincareBall& b, const GradientField& g,
                             double p, double lambda) {
    const auto field = metric_field(v, b.center, metric);
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i)
        if (field[i] < lambda * b.radius)
            s += std::pow(g.values[i], p) * (metric == Metric::base ? v.base().nodes[i].mu : v.node_mu_rho[i]);
    return s;
}

// ---- interior points of balls ----------------------------------------------

struct GoInCheck {
    int balls = 0;
    int violations = 0;
    double worst_ratio = 0.0;  // (r / (16 C)) / max over the ball of d_{X,rho}
};

// Every ball B_rho(z, r) with r <= 2 diam should contain a node whose
// d_{X,rho} is at least r / (16 C).
inline GoInCheck check_interior_points(const SphereView& v, double C_uniform, int balls, std::uint64_t seed) {
    const auto& m = v.base();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(m.size()) - 1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GoInCheck out;
    const double r_hi = 2.0 * v.diam_rho_hat;
    for (int k = 0; k < balls; ++k) {
        const int z = pick(rng);
        const auto field = v.d_rho(z).dist;
        double widest = 0.0;
        for (int e : m.incident(z)) widest = std::max(widest, v.edge_rho[e]);
        const double r_lo = std::min(r_hi, 3.0 * widest);
        const double r = std::exp(std::log(r_lo) + U(rng) * (std::log(r_hi) - std::log(r_lo)));
        double best = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (field[i] < r) best = std::max(best, v.boundary_rho[i]);
        const double ratio = r / (16.0 * C_uniform) / best;
        ++out.balls;
        out.worst_ratio = std::max(out.worst_ratio, ratio);
        if (ratio > 1.0) ++out.violations;
    }
    return out;
}

}  // namespace sphere
