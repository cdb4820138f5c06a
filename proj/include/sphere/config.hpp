#pragma once

// Run configuration read from an INI file:
//
//   [density]       family = powlog | exp | tabulated; alpha, beta, rate,
//                   knots = "t:rho, t:rho, ...", floor
//   [space]         builder = halfplane | import; path, mesh_rel, r_max, r_min, node_budget
//   [sphericalize]  sigma, force, edge_rule = gauss2 | midpoint
//   [classify]      grid_lo, grid_hi, per_decade, safety
//   [samples]       seed, pairs, centers, curves, poincare_balls, bracket_nodes,
//                   lower_bound_sources, lower_bound_targets
//   [poincare]      p, lambdas = "1, 2, 4", suite, fields = suite | constant
//
// Every key is optional; missing keys keep the defaults below.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sphere/conditions.hpp"
#include "sphere/density.hpp"
#include "sphere/errors.hpp"
#include "sphere/graph_io.hpp"
#include "sphere/space.hpp"
#include "sphere/sphericalize.hpp"

namespace sphere {

struct RunConfig {
    // density
    std::string family = "powlog";
    double alpha = -2.0, beta = 0.0, rate = 1.0;
    std::vector<std::pair<double, double>> knots;
    double floor = Density::default_floor;
    // space
    std::string builder = "halfplane";
    std::string import_path;
    HalfPlaneOptions halfplane;
    // sphericalization
    double sigma = 2.0;
    bool force = false;
    EdgeRule edge_rule = EdgeRule::gauss2;
    // classification
    ClassifyOptions classify;
    // samples
    std::uint64_t seed = 1;
    int pairs = 500;
    int centers = 250;
    int curves = 1000;
    int poincare_balls = 60;
    int bracket_nodes = 100;
    int lower_bound_sources = 100;
    int lower_bound_targets = 100;
    // poincare
    double p = 1.0;
    std::vector<double> lambdas{1.0, 2.0, 4.0};
    std::string suite = "suite_v1";
    std::string fields = "suite";

    std::string source_text;  // the file as read, copied into the output directory
    std::filesystem::path base_dir;

    Density density() const {
        if (family == "powlog") return Density::powlog(alpha, beta, floor);
        if (family == "exp" || family == "exponential") return Density::exponential(rate, floor);
        if (family == "tabulated") return Density::tabulated(knots, floor);
        throw ConfigError("unknown density family '" + family + "'");
    }

    SpaceModel space() const {
        if (builder == "halfplane") return build_halfplane(halfplane);
        if (builder == "import") {
            std::filesystem::path p(import_path);
            if (p.is_relative()) p = base_dir / p;
            return load_graph(p.string());
        }
        throw ConfigError("unknown space builder '" + builder + "'");
    }

    SphericalizeOptions sphericalize_options() const {
        SphericalizeOptions o;
        o.sigma = sigma;
        o.force = force;
        o.rule = edge_rule;
        return o;
    }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        std::istringstream one(item);
        double x;
        if (!(one >> x)) throw ConfigError("bad number in list '" + s + "'");
        out.push_back(x);
    }
    return out;
}

inline std::vector<std::pair<double, double>> parse_knots(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("knot '" + item + "' is not t:rho");
        try {
            out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("knot '" + item + "' is not numeric");
        }
    }
    return out;
}

// Like ptree::get(path, fallback), but a present value that does not convert throws.
template <class T>
T read(const boost::property_tree::ptree& tree, const std::string& path, const T& fallback) {
    const auto node = tree.get_child_optional(path);
    if (!node) return fallback;
    try {
        return node->get_value<T>();
    } catch (const boost::property_tree::ptree_bad_data&) {
        throw ConfigError("config: bad value '" + node->data() + "' for " + path);
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    c.source_text = text;
    try {
        c.family = detail::read(tree, "density.family", c.family);
        c.alpha = detail::read(tree, "density.alpha", c.alpha);
        c.beta = detail::read(tree, "density.beta", c.beta);
        c.rate = detail::read(tree, "density.rate", c.rate);
        c.floor = detail::read(tree, "density.floor", c.floor);
        if (auto k = tree.get_optional<std::string>("density.knots")) c.knots = detail::parse_knots(*k);

        c.builder = detail::read(tree, "space.builder", c.builder);
        c.import_path = detail::read(tree, "space.path", c.import_path);
        c.halfplane.mesh_rel = detail::read(tree, "space.mesh_rel", c.halfplane.mesh_rel);
        c.halfplane.R_max = detail::read(tree, "space.r_max", c.halfplane.R_max);
        c.halfplane.r_min = detail::read(tree, "space.r_min", c.halfplane.r_min);
        c.halfplane.node_budget = detail::read(tree, "space.node_budget", c.halfplane.node_budget);

        c.sigma = detail::read(tree, "sphericalize.sigma", c.sigma);
        c.force = detail::read(tree, "sphericalize.force", c.force);
        const auto rule = detail::read(tree, "sphericalize.edge_rule", std::string("gauss2"));
        if (rule == "gauss2") c.edge_rule = EdgeRule::gauss2;
        else if (rule == "midpoint") c.edge_rule = EdgeRule::midpoint;
        else throw ConfigError("unknown edge_rule '" + rule + "'");

        c.classify.grid.lo = detail::read(tree, "classify.grid_lo", c.classify.grid.lo);
        c.classify.grid.hi = detail::read(tree, "classify.grid_hi", c.classify.grid.hi);
        c.classify.grid.per_decade = detail::read(tree, "classify.per_decade", c.classify.grid.per_decade);
        c.classify.safety = detail::read(tree, "classify.safety", c.classify.safety);

        c.seed = detail::read(tree, "samples.seed", c.seed);
        c.pairs = detail::read(tree, "samples.pairs", c.pairs);
        c.centers = detail::read(tree, "samples.centers", c.centers);
        c.curves = detail::read(tree, "samples.curves", c.curves);
        c.poincare_balls = detail::read(tree, "samples.poincare_balls", c.poincare_balls);
        c.bracket_nodes = detail::read(tree, "samples.bracket_nodes", c.bracket_nodes);
        c.lower_bound_sources = detail::read(tree, "samples.lower_bound_sources", c.lower_bound_sources);
        c.lower_bound_targets = detail::read(tree, "samples.lower_bound_targets", c.lower_bound_targets);

        c.p = detail::read(tree, "poincare.p", c.p);
        if (auto l = tree.get_optional<std::string>("poincare.lambdas")) c.lambdas = detail::parse_list(*l);
        c.suite = detail::read(tree, "poincare.suite", c.suite);
        c.fields = detail::read(tree, "poincare.fields", c.fields);
    } catch (const pt::ptree_bad_data& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.suite != "suite_v1") throw ConfigError("unknown test-function suite '" + c.suite + "'");
    if (c.fields != "suite" && c.fields != "constant") throw ConfigError("poincare.fields must be suite or constant");
    if (!(c.sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (c.lambdas.empty()) throw ConfigError("poincare.lambdas is empty");
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    auto c = parse_config(ss.str());
    c.base_dir = path.parent_path();
    return c;
}

}  // namespace sphere
