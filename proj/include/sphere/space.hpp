#pragma once

// Discretized metric measure spaces: nodes with cell measures, straight edges,
// a base point on the boundary and a truncation radius.
//
// The half-plane builder uses a log-polar grid: rings r_k = 3^(k/m) and rays at
// angles (j + 1/2) * pi / n_theta. Since (log r, theta) is a conformal chart the
// cells are close to squares of side r * dtheta at every scale, and every
// integer power of 3 (in particular 1 and 3) is a ring radius.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sphere/errors.hpp"

namespace sphere {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Point lerp(Point a, Point b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

struct Node {
    Point p;
    double radial = 0.0;             // d(b, x)
    double mu = 0.0;                 // cell measure
    double boundary_distance = 0.0;  // d_X(x)
    bool boundary_adjacent = false;
    bool outer_ring = false;
};

struct Edge {
    int a = 0;
    int b = 0;
    double length = 0.0;
};

// Ring/ray structure of a built half-plane, used for O(1) node lookup.
struct PolarLayout {
    int n_theta = 0;
    int m = 0;        // rings per factor 3
    int k_lo = 0;     // ring exponent of the innermost ring
    int n_rings = 0;
    double dtheta = 0.0;
    double r_inner = 0.0;  // inner edge of the innermost cell

    double ring_radius(int ring) const {
        return std::pow(3.0, static_cast<double>(k_lo + ring) / m);
    }
    int index(int ring, int ray) const { return ring * n_theta + ray; }
};

class SpaceModel {
public:
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    Point base{0.0, 0.0};
    double R_max = 0.0;
    double C_U = 1.0;
    double mesh_rel = 0.0;
    // Straight-line distance is the metric (convex domain); enables exact ball queries.
    bool euclidean = false;
    std::optional<PolarLayout> layout;

    std::size_t size() const { return nodes.size(); }

    // Builds adjacency lists and checks connectivity.
    void finalize() {
        if (nodes.empty()) throw DegenerateError("space model has no nodes");
        offset_.assign(nodes.size() + 1, 0);
        for (const auto& e : edges) {
            if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(nodes.size()) ||
                e.b >= static_cast<int>(nodes.size()) || e.a == e.b)
                throw ConfigError("edge with invalid endpoints");
            if (!(e.length > 0.0)) throw ConfigError("edge length must be positive");
            ++offset_[e.a + 1];
            ++offset_[e.b + 1];
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) offset_[i + 1] += offset_[i];
        incident_.assign(offset_.back(), 0);
        std::vector<int> fill(offset_.begin(), offset_.end() - 1);
        for (int id = 0; id < static_cast<int>(edges.size()); ++id) {
            incident_[fill[edges[id].a]++] = id;
            incident_[fill[edges[id].b]++] = id;
        }
        lengths_.resize(edges.size());
        for (std::size_t i = 0; i < edges.size(); ++i) lengths_[i] = edges[i].length;
        // connectivity
        std::vector<char> seen(nodes.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int k = offset_[v]; k < offset_[v + 1]; ++k) {
                const int w = other(incident_[k], v);
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        connected_ = count == nodes.size();
    }

    bool connected() const { return connected_; }

    std::span<const int> incident(int v) const {
        return {incident_.data() + offset_[v], static_cast<std::size_t>(offset_[v + 1] - offset_[v])};
    }
    int other(int edge, int v) const { return edges[edge].a == v ? edges[edge].b : edges[edge].a; }
    const std::vector<double>& lengths() const { return lengths_; }

    double total_mu() const {
        double s = 0.0;
        for (const auto& n : nodes) s += n.mu;
        return s;
    }

    // Nearest node to a point (exact search for imported graphs, ring/ray rounding otherwise).
    int nearest_node(Point p) const {
        if (layout) {
            const auto& L = *layout;
            const double r = std::max(norm(p), 1e-300);
            const double th = std::atan2(p.y, p.x);
            const int ring = std::clamp(
                static_cast<int>(std::lround(std::log(r) / std::log(3.0) * L.m)) - L.k_lo, 0,
                L.n_rings - 1);
            const int ray = std::clamp(static_cast<int>(std::floor(th / L.dtheta)), 0, L.n_theta - 1);
            return L.index(ring, ray);
        }
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
            const double d = dist(nodes[i].p, p);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }

    std::vector<int> outer_ring_nodes() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (nodes[i].outer_ring) out.push_back(i);
        return out;
    }

    std::vector<int> boundary_nodes() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
            if (nodes[i].boundary_adjacent) out.push_back(i);
        return out;
    }

private:
    std::vector<int> offset_, incident_;
    std::vector<double> lengths_;
    bool connected_ = false;
};

struct HalfPlaneOptions {
    double mesh_rel = 0.05;
    double R_max = 1e3;
    double r_min = 1e-2;
    std::size_t node_budget = 1'000'000;
};

// Graded log-polar mesh of the upper half-plane truncated to |x| <= R_max.
inline SpaceModel build_halfplane(const HalfPlaneOptions& opt) {
    if (!(opt.mesh_rel > 0.0) || opt.mesh_rel > 0.5)
        throw ResourceError("mesh_rel must lie in (0, 0.5]");
    if (!(opt.R_max > opt.mesh_rel) || !(opt.R_max > opt.r_min) || !(opt.r_min > 0.0))
        throw ResourceError("truncation radius too small for the requested mesh");
    PolarLayout L;
    L.n_theta = static_cast<int>(std::ceil(std::numbers::pi / opt.mesh_rel));
    if (L.n_theta % 2 == 0) ++L.n_theta;  // keeps a ray on the symmetry axis
    L.dtheta = std::numbers::pi / L.n_theta;
    L.m = std::max(1, static_cast<int>(std::lround(std::log(3.0) / L.dtheta)));
    const double l3 = std::log(3.0);
    L.k_lo = static_cast<int>(std::ceil(std::log(opt.r_min) / l3 * L.m - 1e-9));
    const int k_hi = static_cast<int>(std::floor(std::log(opt.R_max) / l3 * L.m + 1e-9));
    L.n_rings = k_hi - L.k_lo + 1;
    if (L.n_rings < 2) throw ResourceError("truncation radius too small for the requested mesh");
    const std::size_t count = static_cast<std::size_t>(L.n_rings) * L.n_theta;
    if (count > opt.node_budget)
        throw ResourceError("half-plane mesh needs " + std::to_string(count) + " nodes, budget " +
                            std::to_string(opt.node_budget));
    const double half_step = 0.5 / L.m;
    L.r_inner = L.ring_radius(0) * std::pow(3.0, -half_step);

    SpaceModel m;
    m.R_max = opt.R_max;
    m.C_U = std::numbers::pi / 2.0;
    m.mesh_rel = opt.mesh_rel;
    m.euclidean = true;
    m.nodes.resize(count);
    for (int ring = 0; ring < L.n_rings; ++ring) {
        const double r = L.ring_radius(ring);
        const double r_lo = ring == 0 ? L.r_inner : r * std::pow(3.0, -half_step);
        const double r_hi = ring == L.n_rings - 1 ? opt.R_max : r * std::pow(3.0, half_step);
        const double cell = 0.5 * (r_hi * r_hi - r_lo * r_lo) * L.dtheta;
        for (int ray = 0; ray < L.n_theta; ++ray) {
            const double th = (ray + 0.5) * L.dtheta;
            Node& n = m.nodes[L.index(ring, ray)];
            n.p = {r * std::cos(th), r * std::sin(th)};
            n.radial = r;
            n.mu = cell;
            n.boundary_distance = n.p.y;
            n.boundary_adjacent = ray == 0 || ray == L.n_theta - 1;
            n.outer_ring = ring == L.n_rings - 1;
        }
    }
    auto link = [&m](int a, int b) { m.edges.push_back({a, b, dist(m.nodes[a].p, m.nodes[b].p)}); };
    m.edges.reserve(count * 4);
    for (int ring = 0; ring < L.n_rings; ++ring) {
        for (int ray = 0; ray < L.n_theta; ++ray) {
            const int v = L.index(ring, ray);
            if (ray + 1 < L.n_theta) link(v, L.index(ring, ray + 1));
            if (ring + 1 < L.n_rings) {
                link(v, L.index(ring + 1, ray));
                if (ray + 1 < L.n_theta) link(v, L.index(ring + 1, ray + 1));
                if (ray > 0) link(v, L.index(ring + 1, ray - 1));
            }
        }
    }
    m.layout = L;
    m.finalize();
    return m;
}

// ---- shortest paths ---------------------------------------------------------

struct DistanceField {
    std::vector<double> dist;
    std::vector<int> pred_edge;  // -1 at sources and unreached nodes

    // Node path from a source to `target` (source first).
    std::vector<int> path_to(const SpaceModel& m, int target) const {
        if (!std::isfinite(dist[target])) throw UnreachableError("target not reached");
        std::vector<int> path{target};
        int v = target;
        while (pred_edge[v] >= 0) {
            v = m.other(pred_edge[v], v);
            path.push_back(v);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

struct Seed {
    int node;
    double dist;
};

// Multi-source Dijkstra over per-edge weights. Nodes farther than `cutoff` stay at +inf.
inline DistanceField dijkstra(const SpaceModel& m, std::span<const double> weights,
                              std::span<const Seed> seeds,
                              double cutoff = std::numeric_limits<double>::infinity()) {
    const std::size_t n = m.size();
    DistanceField f{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                    std::vector<int>(n, -1)};
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (const auto& s : seeds) {
        if (s.dist < f.dist[s.node]) {
            f.dist[s.node] = s.dist;
            pq.push({s.dist, s.node});
        }
    }
    while (!pq.empty()) {
        const auto [d, v] = pq.top();
        pq.pop();
        if (d > f.dist[v]) continue;
        if (d > cutoff) break;
        for (int e : m.incident(v)) {
            const int w = m.other(e, v);
            const double nd = d + weights[e];
            if (nd < f.dist[w]) {
                f.dist[w] = nd;
                f.pred_edge[w] = e;
                pq.push({nd, w});
            }
        }
    }
    if (std::isfinite(cutoff))
        for (auto& x : f.dist)
            if (x > cutoff) x = std::numeric_limits<double>::infinity();
    return f;
}

inline DistanceField dijkstra(const SpaceModel& m, std::span<const double> weights, int source,
                              double cutoff = std::numeric_limits<double>::infinity()) {
    const Seed s{source, 0.0};
    return dijkstra(m, weights, std::span<const Seed>(&s, 1), cutoff);
}

// Graph distance in the base metric from `source` to each target.
inline std::vector<double> graph_distance(const SpaceModel& m, int source,
                                          std::span<const int> targets) {
    const auto f = dijkstra(m, m.lengths(), source);
    std::vector<double> out;
    out.reserve(targets.size());
    for (int t : targets) {
        if (!std::isfinite(f.dist[t]))
            throw UnreachableError("node " + std::to_string(t) + " unreachable from " +
                                   std::to_string(source));
        out.push_back(f.dist[t]);
    }
    return out;
}

// Distance field of the base metric: exact straight-line distance on convex
// models, graph distance otherwise.
inline std::vector<double> base_distance_field(const SpaceModel& m, int source) {
    if (m.euclidean) {
        std::vector<double> d(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) d[i] = dist(m.nodes[source].p, m.nodes[i].p);
        return d;
    }
    return dijkstra(m, m.lengths(), source).dist;
}

// ---- doubling of mu ---------------------------------------------------------

struct BallRatio {
    int center = -1;
    double radius = 0.0;
    double ratio = 0.0;  // mu(B(x,2r)) / mu(B(x,r))
    bool resolved = true;
};

struct DoublingMuResult {
    double C_mu_hat = 0.0;
    BallRatio worst;
    int resolved = 0;
    int resolution_limited = 0;
    std::vector<BallRatio> table;
};

// Local cell diameter at radius t for a graded model.
inline double cell_size(const SpaceModel& m, double t) {
    const double h = m.layout ? m.layout->dtheta : m.mesh_rel;
    return h * std::max(t, 1e-300);
}

// Ball B(x, r) is resolved when r spans several cells of the far side of B(x, 2r).
inline bool ball_resolved(const SpaceModel& m, int x, double r, double cells = 3.0) {
    const double far = m.nodes[x].radial + 2.0 * r;
    const double inner = m.layout ? m.layout->r_inner : 0.0;
    return r >= cells * cell_size(m, far) && r >= 4.0 * inner;
}

// Centers stratified over radial decades of the model, radii log-uniform.
inline std::vector<std::pair<int, double>> sample_balls(const SpaceModel& m, int samples,
                                                        std::uint64_t seed, double r_cap) {
    std::mt19937_64 rng(seed);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& n : m.nodes) {
        lo = std::min(lo, n.radial);
        hi = std::max(hi, n.radial);
    }
    const double l0 = std::log(lo), l1 = std::log(hi);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::pair<int, double>> out;
    out.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        // stratum by index keeps decades evenly represented
        const double u = (s + U(rng)) / samples;
        const double rad = std::exp(l0 + u * (l1 - l0));
        const double th = U(rng) * std::numbers::pi;
        const int x = m.nearest_node({rad * std::cos(th), rad * std::sin(th)});
        const double rx = m.nodes[x].radial;
        const double rmax = std::min(r_cap, 0.5 * (m.R_max - rx));
        if (!(rmax > 0.0)) continue;
        const double rmin = std::min(rmax, std::max(1e-3 * rmax, 0.02 * std::max(rx, 1e-2)));
        const double r = std::exp(std::log(rmin) + U(rng) * (std::log(rmax) - std::log(rmin)));
        out.emplace_back(x, r);
    }
    return out;
}

inline double ball_mass(const SpaceModel& m, std::span<const double> field, double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (field[i] < r) s += m.nodes[i].mu;
    return s;
}

inline DoublingMuResult doubling_constant_mu(const SpaceModel& m, int samples, std::uint64_t seed = 1) {
    DoublingMuResult out;
    for (const auto& [x, r] : sample_balls(m, samples, seed, m.R_max / 4.0)) {
        const auto field = base_distance_field(m, x);
        const double small = ball_mass(m, field, r), big = ball_mass(m, field, 2.0 * r);
        BallRatio b{x, r, small > 0.0 ? big / small : std::numeric_limits<double>::infinity(),
                    ball_resolved(m, x, r)};
        out.table.push_back(b);
        if (b.resolved) {
            ++out.resolved;
            if (b.ratio > out.C_mu_hat) {
                out.C_mu_hat = b.ratio;
                out.worst = b;
            }
        } else {
            ++out.resolution_limited;
        }
    }
    return out;
}

}  // namespace sphere
