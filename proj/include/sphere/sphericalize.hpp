#pragma once

// The sphericalized overlay of a space model: edge weights int_e rho(|.|) ds,
// node weights mu * rho(|x|)^sigma, and the added point at infinity with
// bracketed distances to every node.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "sphere/conditions.hpp"
#include "sphere/constants.hpp"
#include "sphere/density.hpp"
#include "sphere/errors.hpp"
#include "sphere/space.hpp"

namespace sphere {

enum class EdgeRule { gauss2, midpoint };

// int over the segment [a, b] of rho(|.|) ds.
inline double segment_rho(const Density& f, Point a, Point b, EdgeRule rule = EdgeRule::gauss2) {
    const double len = dist(a, b);
    if (len == 0.0) return 0.0;
    if (rule == EdgeRule::midpoint) return len * f(norm(lerp(a, b, 0.5)));
    constexpr double g = 0.21132486540518713;  // (1 - 1/sqrt(3)) / 2
    return 0.5 * len * (f(norm(lerp(a, b, g))) + f(norm(lerp(a, b, 1.0 - g))));
}

// int_s^inf t rho(t)^sigma dt; the half-plane exterior mass is pi times this.
inline double radial_moment_tail(const Density& f, double sigma, double s) {
    if (!(s > 0.0)) throw DomainError("moment tail needs s > 0");
    bool finite = false;
    if (const auto* p = std::get_if<PowLog>(&f.family())) {
        const double q = p->alpha * sigma, qb = p->beta * sigma;
        finite = q < -2.0 || (q == -2.0 && qb < -1.0);
        if (finite && p->beta == 0.0) {
            const double l = std::log(s + 2.0);
            return std::exp((q + 2.0) * l) / (-q - 2.0) - 2.0 * std::exp((q + 1.0) * l) / (-q - 1.0);
        }
    } else if (const auto* e = std::get_if<Exponential>(&f.family())) {
        const double k = e->rate * sigma;
        return std::exp(-k * s) * (s / k + 1.0 / (k * k));
    } else {
        const auto& knots = std::get<Tabulated>(f.family()).knots;
        if (knots.size() >= 2) {
            const auto& [t0, r0] = knots[knots.size() - 2];
            const auto& [t1, r1] = knots.back();
            finite = (std::log(r1) - std::log(r0)) / (std::log(t1) - std::log(t0)) * sigma < -2.0;
        }
    }
    if (!finite) throw DivergenceError("exterior mass of rho^sigma diverges for " + f.describe());
    // u = log t - log s on (0, inf)
    const double ls = std::log(s);
    auto g = [&](double v) {
        const double u = ls + v;
        return std::exp(2.0 * u + sigma * f.log_value(std::exp(u)) - 2.0 * ls);
    };
    static boost::math::quadrature::exp_sinh<double> integrator;
    return s * s * integrator.integrate(g, 1e-12);
}

struct InfinityBracket {
    double lower = 0.0;
    double point = 0.0;
    double upper = 0.0;
};

struct SphericalizeOptions {
    double sigma = 2.0;
    bool force = false;
    EdgeRule rule = EdgeRule::gauss2;
    int diameter_sources = 16;
    // relative per-edge quadrature bias allowed when comparing against T(|x|)
    double quadrature_slack = 1e-6;
};

class SphereView {
public:
    SphereView(const SpaceModel& base, Density f, double sigma)
        : base_(&base), density_(std::move(f)), sigma_(sigma) {}

    const SpaceModel& base() const { return *base_; }
    const Density& density() const { return density_; }
    double sigma() const { return sigma_; }

    std::vector<double> edge_rho;
    std::vector<double> node_mu_rho;
    std::vector<InfinityBracket> infinity;  // empty when rho has no finite tail
    std::vector<double> boundary_rho;        // d_{X,rho} estimate per node
    std::vector<double> ring_distance;       // d_rho to the nearest outer-ring node
    double diam_rho_hat = 0.0;
    int bracket_inversions = 0;              // nodes where T(|x|) exceeded the point estimate
    std::optional<DensityReport> report;
    EdgeRule rule = EdgeRule::gauss2;

    bool has_infinity() const { return !infinity.empty(); }
    bool has_polar_oracle() const { return base_->euclidean && base_->layout.has_value(); }

    DistanceField d_rho(int source, double cutoff = std::numeric_limits<double>::infinity()) const {
        return dijkstra(*base_, edge_rho, source, cutoff);
    }

    std::vector<double> d_rho(int source, std::span<const int> targets) const {
        const auto f = d_rho(source);
        std::vector<double> out;
        for (int t : targets) {
            if (!std::isfinite(f.dist[t])) throw UnreachableError("node not reachable in d_rho");
            out.push_back(f.dist[t]);
        }
        return out;
    }

    const InfinityBracket& d_rho_infinity(int x) const {
        if (!has_infinity()) throw PrereqError("point at infinity unavailable: rho has no finite tail");
        return infinity[x];
    }

    double mu_rho_nodes() const {
        double s = 0.0;
        for (double w : node_mu_rho) s += w;
        return s;
    }

    // mu_rho of {|y| > s} beyond the model, from the polar formula.
    double exterior_mass(double s) const {
        if (!has_polar_oracle()) throw PrereqError("no analytic exterior for imported graphs");
        return std::numbers::pi * radial_moment_tail(density_, sigma_, std::max(s, base_->R_max));
    }

    double mu_rho_total() const {
        return mu_rho_nodes() + (has_polar_oracle() ? exterior_mass(base_->R_max) : 0.0);
    }

    // Analytic upper bound for d_{X,rho} at an arbitrary point of the half-plane:
    // the cheaper of dropping vertically, following the circle |.| = |z| to the
    // boundary, and escaping radially to infinity.
    double escape_rho(Point z) const {
        const double r = norm(z);
        const double th = std::atan2(z.y, z.x);
        double best = segment_rho(density_, z, {z.x, 0.0}, rule);
        best = std::min(best, r * std::min(th, std::numbers::pi - th) * density_(r));
        if (density_.integrable()) best = std::min(best, density_.tail(r));
        return best;
    }

private:
    const SpaceModel* base_;
    Density density_;
    double sigma_;
};

namespace detail {

inline void fill_infinity(SphereView& v, const SphericalizeOptions& opt) {
    const auto& m = v.base();
    const auto& f = v.density();
    std::vector<Seed> ring0, ring_tail;
    for (int y : m.outer_ring_nodes()) {
        ring0.push_back({y, 0.0});
        ring_tail.push_back({y, f.tail(m.nodes[y].radial)});
    }
    const auto near = dijkstra(m, v.edge_rho, ring0);
    const auto via = dijkstra(m, v.edge_rho, ring_tail);
    v.ring_distance = near.dist;
    const double allowance = f.tail(m.R_max);
    v.infinity.resize(m.size());
    v.bracket_inversions = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double t = f.tail(m.nodes[i].radial);
        auto& b = v.infinity[i];
        b.point = via.dist[i];
        b.lower = std::max(t * (1.0 - opt.quadrature_slack), near.dist[i]);
        if (b.lower > b.point) {
            ++v.bracket_inversions;
            b.lower = b.point;
        }
        b.upper = b.point + allowance;
    }
}

inline void fill_boundary_rho(SphereView& v) {
    const auto& m = v.base();
    std::vector<Seed> seeds;
    for (int w : m.boundary_nodes()) {
        const auto& n = m.nodes[w];
        const double drop = m.euclidean ? segment_rho(v.density(), n.p, {n.p.x, 0.0}, v.rule)
                                        : v.density()(n.radial) * n.boundary_distance;
        seeds.push_back({w, drop});
    }
    if (v.has_infinity())
        for (int y : m.outer_ring_nodes()) seeds.push_back({y, v.infinity[y].point});
    if (seeds.empty()) {
        v.boundary_rho.assign(m.size(), std::numeric_limits<double>::infinity());
        return;
    }
    v.boundary_rho = dijkstra(m, v.edge_rho, seeds).dist;
}

inline void fill_diameter(SphereView& v, int sources) {
    const auto& m = v.base();
    double diam = 0.0;
    if (v.has_infinity())
        for (const auto& b : v.infinity) diam = std::max(diam, b.point);
    // innermost ring endpoints, outer ring endpoints, and evenly spaced others
    std::vector<int> src;
    if (m.layout) {
        const auto& L = *m.layout;
        src = {L.index(0, 0), L.index(0, L.n_theta - 1), L.index(L.n_rings - 1, 0),
               L.index(L.n_rings - 1, L.n_theta - 1)};
    }
    for (int k = 0; k < sources; ++k)
        src.push_back(static_cast<int>((static_cast<std::size_t>(k) * m.size()) / sources));
    for (int s : src) {
        const auto f = v.d_rho(s);
        for (double d : f.dist)
            if (std::isfinite(d)) diam = std::max(diam, d);
    }
    v.diam_rho_hat = diam;
}

}  // namespace detail

// Builds the overlay. Conditions A and B must pass unless opt.force is set.
inline SphereView sphericalize(const SpaceModel& m, const Density& f,
                               const std::optional<DensityReport>& report,
                               const SphericalizeOptions& opt = {}) {
    if (!(opt.sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!opt.force) {
        if (!report) throw PrereqError("density has not been classified; pass force to override");
        if (!report->passes_AB())
            throw PrereqError("density " + report->density + " does not satisfy conditions A and B (A: " +
                              to_string(report->verdict_A) + ", B: " + to_string(report->verdict_B) +
                              "); pass force to override");
    }
    SphereView v(m, f, opt.sigma);
    v.report = report;
    v.rule = opt.rule;
    v.edge_rho.resize(m.edges.size());
    for (std::size_t i = 0; i < m.edges.size(); ++i)
        v.edge_rho[i] = segment_rho(f, m.nodes[m.edges[i].a].p, m.nodes[m.edges[i].b].p, opt.rule);
    v.node_mu_rho.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        v.node_mu_rho[i] = m.nodes[i].mu * std::exp(opt.sigma * f.log_value(m.nodes[i].radial));
    if (f.integrable() && !m.outer_ring_nodes().empty()) detail::fill_infinity(v, opt);
    detail::fill_boundary_rho(v);
    detail::fill_diameter(v, opt.diameter_sources);
    return v;
}

// Convenience overload: classify first.
inline SphereView sphericalize(const SpaceModel& m, const Density& f,
                               const SphericalizeOptions& opt = {}) {
    std::optional<DensityReport> rep;
    try {
        rep = classify(f);
    } catch (const DivergenceError&) {
        if (!opt.force) throw;
    }
    return sphericalize(m, f, rep, opt);
}

// ---- infinity bracket against the comparison constants ----------------------

struct BracketCheck {
    int samples = 0;
    int violations = 0;
    double worst_low = std::numeric_limits<double>::infinity();  // min point / (h/C_A)
    double worst_high = 0.0;                                      // max point / (C1 h)
    int witness = -1;
};

inline BracketCheck check_infinity_bracket(const SphereView& v, std::span<const int> nodes,
                                           const LemmaConstants& k) {
    BracketCheck out;
    const auto& m = v.base();
    for (int x : nodes) {
        const double t = m.nodes[x].radial;
        const double h = (t + 1.0) * v.density()(t);
        const double p = v.d_rho_infinity(x).point;
        const double lo = p / (h / k.C_A), hi = p / (k.C1() * h);
        ++out.samples;
        if (lo < 1.0 || hi > 1.0) {
            ++out.violations;
            out.witness = x;
        }
        out.worst_low = std::min(out.worst_low, lo);
        out.worst_high = std::max(out.worst_high, hi);
    }
    return out;
}

// ---- condition C ------------------------------------------------------------

struct ConditionCRow {
    double r = 0.0;
    double lhs = 0.0;  // mu_rho(X \ B(b, r))
    double rhs = 0.0;  // rho(r)^sigma mu(B(b, r+1))
};

struct ConditionCResult {
    Verdict verdict = Verdict::inconclusive;
    double C_C_hat = std::numeric_limits<double>::infinity();
    double lower_ratio = 0.0;  // inf lhs/rhs, the other side of the two-sided form
    double witness_r = 0.0;
    std::vector<ConditionCRow> table;
    std::string note;
};

namespace detail {

// Per-ring cumulative masses of a log-polar model. Mass below a radius inside a
// ring's cell is interpolated by area.
struct RadialPrefix {
    std::vector<double> lo, hi, mu_cum, murho_cum;

    explicit RadialPrefix(const SphereView& v) {
        const auto& m = v.base();
        const auto& L = *m.layout;
        const double half = std::pow(3.0, 0.5 / L.m);
        mu_cum.push_back(0.0);
        murho_cum.push_back(0.0);
        for (int ring = 0; ring < L.n_rings; ++ring) {
            const double r = L.ring_radius(ring);
            lo.push_back(ring == 0 ? L.r_inner : r / half);
            hi.push_back(ring == L.n_rings - 1 ? m.R_max : r * half);
            double a = 0.0, b = 0.0;
            for (int ray = 0; ray < L.n_theta; ++ray) {
                a += m.nodes[L.index(ring, ray)].mu;
                b += v.node_mu_rho[L.index(ring, ray)];
            }
            mu_cum.push_back(mu_cum.back() + a);
            murho_cum.push_back(murho_cum.back() + b);
        }
    }

    double below(const std::vector<double>& cum, double s) const {
        const auto k = static_cast<std::size_t>(std::upper_bound(lo.begin(), lo.end(), s) - lo.begin());
        if (k == 0) return 0.0;
        const std::size_t i = k - 1;
        const double frac = std::clamp((s * s - lo[i] * lo[i]) / (hi[i] * hi[i] - lo[i] * lo[i]), 0.0, 1.0);
        return cum[i] + frac * (cum[i + 1] - cum[i]);
    }
};

inline ConditionCRow condition_c_row(const SphereView& v, const RadialPrefix& pre, double r) {
    const auto& m = v.base();
    ConditionCRow row{r, 0.0, 0.0};
    if (r < m.R_max) {
        row.lhs = pre.murho_cum.back() - pre.below(pre.murho_cum, r) + v.exterior_mass(m.R_max);
    } else {
        row.lhs = std::numbers::pi * radial_moment_tail(v.density(), v.sigma(), r);
    }
    const double ball = r + 1.0 <= m.R_max ? pre.below(pre.mu_cum, r + 1.0)
                                           : 0.5 * std::numbers::pi * (r + 1.0) * (r + 1.0);
    row.rhs = std::exp(v.sigma() * v.density().log_value(r)) * ball;
    return row;
}

}  // namespace detail

// Default radius grid: from the mesh core out three decades past the model,
// where the polar formula carries the sweep.
inline RadialGrid condition_c_grid(const SphereView& v) {
    const auto& m = v.base();
    const double inner = m.layout ? 4.0 * m.layout->r_inner : 1e-2;
    return RadialGrid{std::pow(10.0, std::ceil(std::log10(inner))), 1e6, 8};
}

inline ConditionCResult check_condition_C(const SphereView& v, std::optional<RadialGrid> grid = {},
                                          const VerdictRule& rule = {}) {
    ConditionCResult out;
    if (!v.has_polar_oracle()) {
        out.note = "imported graph: no analytic exterior, verdict withheld";
        return out;
    }
    const RadialGrid g = grid.value_or(condition_c_grid(v));
    const detail::RadialPrefix pre(v);
    auto sweep = [&](const RadialGrid& gr, std::vector<ConditionCRow>* rows) {
        SupEstimate est;
        for (double r : gr.points()) {
            const auto row = detail::condition_c_row(v, pre, r);
            est.add(std::log(row.lhs) - std::log(row.rhs), r, r, r, gr.lo, gr.hi);
            if (rows) rows->push_back(row);
        }
        return est;
    };
    SupEstimate coarse, fine;
    try {
        coarse = sweep(g, nullptr);
        fine = sweep(g.refined(), &out.table);
    } catch (const DivergenceError& e) {
        out.verdict = Verdict::fail;
        out.table.clear();
        out.note = e.what();
        return out;
    }
    out.verdict = stabilization_verdict(coarse, fine, rule);
    out.C_C_hat = out.verdict == Verdict::fail ? std::numeric_limits<double>::infinity() : fine.value();
    out.witness_r = fine.witness_r;
    out.lower_ratio = std::numeric_limits<double>::infinity();
    for (const auto& row : out.table) out.lower_ratio = std::min(out.lower_ratio, row.lhs / row.rhs);
    return out;
}

}  // namespace sphere
