#pragma once

// Line-oriented graph format:
//
//   # comment
//   model <R_max> <C_U> <mesh_rel>
//   base <x> <y>
//   node <id> <x> <y> <radial> <mu> [flags] [boundary_distance]
//   edge <id> <id> <length>
//
// flags is a string over {b, o, -}: b = boundary-adjacent, o = outer ring.
// Node ids are arbitrary integers; they are renumbered densely in file order.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "sphere/errors.hpp"
#include "sphere/space.hpp"

namespace sphere {

inline void write_graph(std::ostream& os, const SpaceModel& m) {
    os << "# sphere graph v1\n";
    os << std::setprecision(17);
    os << "model " << m.R_max << ' ' << m.C_U << ' ' << m.mesh_rel << '\n';
    os << "base " << m.base.x << ' ' << m.base.y << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& n = m.nodes[i];
        std::string flags;
        if (n.boundary_adjacent) flags += 'b';
        if (n.outer_ring) flags += 'o';
        if (flags.empty()) flags = "-";
        os << "node " << i << ' ' << n.p.x << ' ' << n.p.y << ' ' << n.radial << ' ' << n.mu << ' '
           << flags << ' ' << n.boundary_distance << '\n';
    }
    for (const auto& e : m.edges) os << "edge " << e.a << ' ' << e.b << ' ' << e.length << '\n';
}

// Distance to the boundary for imported graphs without explicit values: graph
// distance to the nearest boundary-adjacent node plus half its shortest edge.
inline void estimate_boundary_distances(SpaceModel& m) {
    std::vector<Seed> seeds;
    for (int v = 0; v < static_cast<int>(m.size()); ++v) {
        if (!m.nodes[v].boundary_adjacent) continue;
        double shortest = std::numeric_limits<double>::infinity();
        for (int e : m.incident(v)) shortest = std::min(shortest, m.edges[e].length);
        seeds.push_back({v, std::isfinite(shortest) ? 0.5 * shortest : 0.0});
    }
    if (seeds.empty()) {
        for (auto& n : m.nodes) n.boundary_distance = std::numeric_limits<double>::infinity();
        return;
    }
    const auto f = dijkstra(m, m.lengths(), seeds);
    for (std::size_t i = 0; i < m.size(); ++i) m.nodes[i].boundary_distance = f.dist[i];
}

inline SpaceModel read_graph(std::istream& is) {
    SpaceModel m;
    std::unordered_map<long long, int> index;
    std::string line;
    int lineno = 0;
    bool all_bd = true;
    auto fail = [&lineno](const std::string& msg) {
        throw ConfigError("graph line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "model") {
            if (!(ls >> m.R_max >> m.C_U >> m.mesh_rel)) fail("model needs R_max C_U mesh_rel");
        } else if (tag == "base") {
            if (!(ls >> m.base.x >> m.base.y)) fail("base needs x y");
        } else if (tag == "node") {
            long long id;
            Node n;
            if (!(ls >> id >> n.p.x >> n.p.y >> n.radial >> n.mu)) fail("node needs id x y radial mu");
            if (n.mu < 0.0) fail("negative node measure");
            std::string flags;
            if (ls >> flags) {
                n.boundary_adjacent = flags.find('b') != std::string::npos;
                n.outer_ring = flags.find('o') != std::string::npos;
                if (!(ls >> n.boundary_distance)) all_bd = false;
            } else {
                all_bd = false;
            }
            if (!index.emplace(id, static_cast<int>(m.nodes.size())).second) fail("duplicate node id");
            m.nodes.push_back(n);
        } else if (tag == "edge") {
            long long a, b;
            double len;
            if (!(ls >> a >> b >> len)) fail("edge needs id id length");
            const auto ia = index.find(a), ib = index.find(b);
            if (ia == index.end() || ib == index.end()) fail("edge references unknown node");
            m.edges.push_back({ia->second, ib->second, len});
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    m.finalize();
    if (!m.connected()) throw UnreachableError("imported graph is not connected");
    if (!all_bd) estimate_boundary_distances(m);
    return m;
}

inline void save_graph(const std::string& path, const SpaceModel& m) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    write_graph(os, m);
}

inline SpaceModel load_graph(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    return read_graph(is);
}

}  // namespace sphere
