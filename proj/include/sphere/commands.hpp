#pragma once

// Subcommands behind the command-line tool. Each writes its reports into an
// output directory and returns the process exit code.

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sphere/conditions.hpp"
#include "sphere/config.hpp"
#include "sphere/constants.hpp"
#include "sphere/doubling_rho.hpp"
#include "sphere/errors.hpp"
#include "sphere/poincare.hpp"
#include "sphere/report.hpp"
#include "sphere/sphericalize.hpp"
#include "sphere/verify.hpp"

namespace sphere {

namespace fs = std::filesystem;

enum ExitCode { exit_ok = 0, exit_error = 1, exit_inconclusive = 2 };

inline void prepare_output(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    std::ofstream os(out / "config.ini");
    if (!os) throw ConfigError("cannot write into " + out.string());
    os << cfg.source_text;
}

inline int cmd_check_density(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto f = cfg.density();
    const auto rep = classify(f, cfg.classify);
    json j = to_json(rep);
    if (rep.passes_AB()) {
        const HTable H(f, cfg.classify.grid);
        const auto hd = check_h_inverse_doubling(H, rep.tau1_hat, rep.C_A_hat, rep.C_B_hat);
        j["h_inverse_doubling"] = {{"k", num(hd.K)},
                                   {"worst_ratio", num(hd.worst_ratio)},
                                   {"monotonicity_violations", hd.monotonicity_violations},
                                   {"samples", hd.samples},
                                   {"truncated", hd.truncated}};
    }
    write_json(out / "density_report.json", j);
    log << rep.density << ": A " << to_string(rep.verdict_A) << " (C_A " << rep.C_A_hat << "), B "
        << to_string(rep.verdict_B) << " (C_B " << rep.C_B_hat << ")\n";
    const bool undecided = rep.verdict_A == Verdict::inconclusive || rep.verdict_B == Verdict::inconclusive;
    return undecided ? exit_inconclusive : exit_ok;
}

namespace detail {

struct Prepared {
    SpaceModel model;
    std::optional<SphereView> view;
};

inline std::optional<DensityReport> try_classify(const Density& f, const RunConfig& cfg) {
    try {
        return classify(f, cfg.classify);
    } catch (const DivergenceError&) {
        if (!cfg.force) throw;
        return std::nullopt;
    }
}

// Pick the node nearest (0, 1), or node 0 on imported graphs.
inline int reference_node(const SpaceModel& m) { return m.layout ? m.nearest_node({0.0, 1.0}) : 0; }

inline LemmaConstants constants_for(const SphereView& v) {
    if (!v.report || !std::isfinite(v.report->C_A_hat) || !std::isfinite(v.report->C_B_hat))
        throw PrereqError("comparison constants need conditions A and B to pass");
    return {v.report->C_A_hat, v.report->C_B_hat, v.base().C_U};
}

}  // namespace detail

inline int cmd_sphericalize(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto m = cfg.space();
    const auto f = cfg.density();
    const auto rep = detail::try_classify(f, cfg);
    const auto v = sphericalize(m, f, rep, cfg.sphericalize_options());
    json j = sphere_summary(v);
    j["condition_c"] = to_json(check_condition_C(v));
    if (rep && rep->passes_AB()) {
        const auto k = detail::constants_for(v);
        std::vector<int> nodes;
        for (int i = 0; i < cfg.bracket_nodes; ++i)
            nodes.push_back(static_cast<int>((static_cast<std::size_t>(i) * m.size()) / cfg.bracket_nodes));
        j["constants"] = to_json(k);
        j["infinity_bracket_check"] = to_json(check_infinity_bracket(v, nodes, k));
        j["diameter_bound"] = num(k.diameter_bound(rep->C_qd_hat, rep->integral_total));
    }
    const auto lb = check_radial_lower_bound(v, cfg.lower_bound_sources, cfg.lower_bound_targets, cfg.seed);
    j["radial_lower_bound"] = {{"samples", lb.samples}, {"violations", lb.violations}, {"worst_ratio", num(lb.worst_ratio)}};
    // d_rho / d over sampled pairs: a constant density c gives exactly c
    {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(m.size()) - 1);
        double lo = INFINITY, hi = 0.0;
        for (int s = 0; s < 10; ++s) {
            const int x = pick(rng);
            const auto drho = v.d_rho(x).dist;
            const auto d = dijkstra(m, m.lengths(), x).dist;
            for (int t = 0; t < 10; ++t) {
                const int y = pick(rng);
                if (y == x) continue;
                lo = std::min(lo, drho[y] / d[y]);
                hi = std::max(hi, drho[y] / d[y]);
            }
        }
        j["rho_over_d_range"] = {num(lo), num(hi)};
    }
    write_json(out / "sphere_summary.json", j);

    const int src = detail::reference_node(m);
    const auto field = v.d_rho(src).dist;
    CsvWriter w(out / "distance_field.csv",
                {"node", "x", "y", "radial", "d_rho", "inf_lower", "inf_point", "inf_upper", "d_x_rho"});
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& n = m.nodes[i];
        w << static_cast<int>(i) << n.p.x << n.p.y << n.radial << field[i];
        if (v.has_infinity()) w << v.infinity[i].lower << v.infinity[i].point << v.infinity[i].upper;
        else w << NAN << NAN << NAN;
        w << v.boundary_rho[i];
        w.end();
    }
    const auto cc = check_condition_C(v);
    CsvWriter c(out / "condition_c.csv", {"r", "lhs", "rhs", "ratio"});
    for (const auto& row : cc.table) {
        c << row.r << row.lhs << row.rhs << row.lhs / row.rhs;
        c.end();
    }
    log << "sphericalized " << v.density().describe() << ": diam_rho " << v.diam_rho_hat << ", condition C "
        << to_string(cc.verdict) << "\n";
    return exit_ok;
}

// ---- verify -----------------------------------------------------------------

inline json run_uniformity(const SphereView& v, const RunConfig& cfg, const fs::path& out) {
    const auto& m = v.base();
    const auto pairs = sample_pairs(m, cfg.pairs, cfg.seed);
    const auto U = estimate_uniformity(v, pairs, Metric::rho);
    const auto Ub = estimate_uniformity(v, pairs, Metric::base);
    CsvWriter w(out / "uniformity_pairs.csv", {"x", "y", "metric", "best_functional", "family", "certificate_lb",
                                               "pair_distance", "rho_geodesic", "d_geodesic", "detour", "family_limited"});
    for (const auto* est : {&U, &Ub})
        for (const auto& r : est->rows) {
            w << r.x << r.y << to_string(est->metric) << r.best_functional << r.family << r.certificate_lb
              << r.pair_distance << r.rho_geodesic << r.d_geodesic << r.detour << (r.family_limited ? 1 : 0);
            w.end();
        }
    if (U.witness) write_curve_csv(out / "uniformity_witness_curve.csv", *U.witness);
    return {{"rho", to_json(U)}, {"base", to_json(Ub)}, {"verdict", std::isfinite(U.C_hat) ? "holds" : "violated"}};
}

inline json run_brackets(const SphereView& v, const RunConfig& cfg) {
    const auto k = detail::constants_for(v);
    const auto& m = v.base();
    const auto pairs = sample_pairs(m, cfg.pairs, cfg.seed + 17);
    json reports = json::array();
    for (const auto& r : verify_bracket_lemmas(v, pairs, k)) reports.push_back(to_json(r));
    std::vector<int> nodes;
    for (int i = 0; i < cfg.bracket_nodes; ++i)
        nodes.push_back(static_cast<int>((static_cast<std::size_t>(i) * m.size()) / cfg.bracket_nodes));
    const auto lb = check_radial_lower_bound(v, cfg.lower_bound_sources, cfg.lower_bound_targets, cfg.seed);
    const double bound = k.diameter_bound(v.report->C_qd_hat, v.report->integral_total);
    return {{"constants", to_json(k)},
            {"lemmas", reports},
            {"infinity_bracket", to_json(check_infinity_bracket(v, nodes, k))},
            {"radial_lower_bound",
             {{"samples", lb.samples}, {"violations", lb.violations}, {"worst_ratio", num(lb.worst_ratio)}}},
            {"diameter", {{"diam_rho_hat", num(v.diam_rho_hat)}, {"bound", num(bound)}, {"holds", v.diam_rho_hat <= bound}}}};
}

inline json run_doubling(const SphereView& v, const RunConfig& cfg, const fs::path& out) {
    const auto k = detail::constants_for(v);
    DoublingRhoOptions o;
    o.centers = cfg.centers;
    o.seed = cfg.seed;
    const auto rep = verify_doubling_rho(v, k, o);
    CsvWriter w(out / "doubling_balls.csv", {"center", "radius", "stratum", "ratio", "resolved"});
    for (const auto& b : rep.table) {
        w << b.center << b.radius << b.stratum << b.ratio << (b.resolved ? 1 : 0);
        w.end();
    }
    CsvWriter t(out / "infinity_trend.csv", {"r", "mass_r", "mass_2r", "ratio", "witness"});
    for (const auto& row : rep.trend) {
        t << row.r << row.mass_r << row.mass_2r << row.ratio << row.witness;
        t.end();
    }
    const auto base = doubling_constant_mu(v.base(), 200, cfg.seed);
    json j = to_json(rep);
    j["c_mu_hat_base"] = num(base.C_mu_hat);
    return j;
}

inline json run_poincare(const SphereView& v, const RunConfig& cfg, const fs::path& out) {
    const auto& m = v.base();
    const auto fields = cfg.fields == "constant" ? std::vector<ScalarField>{constant_field(m)} : test_suite(m, cfg.seed);
    json sweeps = json::array();
    CsvWriter w(out / "poincare_samples.csv",
                {"center", "radius", "metric", "field", "p", "lambda", "lhs", "rhs", "ratio"});
    for (double lambda : cfg.lambdas) {
        PoincareOptions o;
        o.p = cfg.p;
        o.lambda = lambda;
        json entry{{"lambda", lambda}};
        double c_base = 0.0, c_rho = 0.0;
        for (Metric metric : {Metric::base, Metric::rho}) {
            const auto balls = sample_poincare_balls(v, metric, cfg.poincare_balls, cfg.seed + 3, lambda);
            const auto s = poincare_sweep(v, metric, balls, fields, o);
            for (const auto& x : s.samples) {
                w << x.center << x.radius << to_string(x.metric) << x.field << x.p << x.lambda << x.lhs << x.rhs << x.ratio;
                w.end();
            }
            entry[metric == Metric::base ? "base" : "rho"] = to_json(s);
            (metric == Metric::base ? c_base : c_rho) = s.C_P_hat;
        }
        entry["preservation_factor"] = c_base > 0.0 ? num(c_rho / c_base) : json(nullptr);
        sweeps.push_back(entry);
    }
    json j{{"suite", cfg.fields == "constant" ? "constant" : cfg.suite}, {"p", cfg.p}, {"sweeps", sweeps}};
    if (m.euclidean && m.layout) {
        const auto curves = random_curves(v, cfg.curves, cfg.seed + 5);
        const auto ti = transform_identity_check(v, curves);
        const auto g = local_upper_gradient(v, fields.back(), Metric::base);
        const auto tig = transform_identity_check(v, curves, &g);
        j["transform_identity"] = {{"curves", ti.curves},
                                   {"worst_relative_error_unit", num(ti.worst_relative_error)},
                                   {"worst_relative_error_gradient", num(tig.worst_relative_error)},
                                   {"bound", 10.0 * m.mesh_rel}};
    }
    double worst_excess = 0.0, worst_lp = 0.0;
    for (const auto& u : fields) {
        const auto t = ug_transform_check(v, u, cfg.p);
        worst_excess = std::max(worst_excess, t.edge_excess);
        worst_lp = std::max(worst_lp, t.lp_relative_error);
    }
    j["upper_gradient_transform"] = {{"worst_edge_excess", num(worst_excess)}, {"worst_lp_relative_error", num(worst_lp)}};
    if (v.has_infinity()) {
        const auto pairs = sample_pairs(m, 40, cfg.seed + 9);
        const double C = estimate_uniformity(v, pairs, Metric::rho).C_hat;
        const auto gi = check_interior_points(v, C, 60, cfg.seed + 11);
        j["interior_points"] = {{"c_uniform", num(C)}, {"balls", gi.balls}, {"violations", gi.violations},
                                {"worst_ratio", num(gi.worst_ratio)}};
    }
    return j;
}

// Scripted refutations: a density failing A, one failing B, and one failing C.
inline json run_counterexamples(const RunConfig& cfg, const fs::path& out) {
    const std::vector<double> ladder{1.0, 2.0, 4.0, 8.0, 16.0};
    json j;

    {  // fails A: exponential
        const auto f = Density::exponential(1.0);
        const auto rep = classify(f, cfg.classify);
        json certs = json::array();
        bool all = true;
        for (double C : ladder) {
            const auto c = certificate_fails_A(f, C, std::max(1.0, rep.C_qd_hat), rep.verdict_A == Verdict::pass);
            all = all && c.refutes();
            certs.push_back(to_json(c));
        }
        // estimator on antipodal pairs |x| = |y| = r, d(x, y) = r + 1
        const auto m = build_halfplane(cfg.halfplane);
        SphericalizeOptions so = cfg.sphericalize_options();
        so.force = true;
        const auto v = sphericalize(m, f, rep, so);
        CsvWriter w(out / "fails_a_trend.csv", {"r", "best_functional", "family"});
        json trend = json::array();
        for (double r = 2.0; r <= std::min(64.0, m.R_max / 4.0); r *= 2.0) {
            const auto [px, py] = antipodal_pair(r);
            const int x = m.nearest_node(px), y = m.nearest_node(py);
            const auto row = estimate_pair(v, x, y, Metric::rho);
            w << r << row.best_functional << row.family;
            w.end();
            trend.push_back({{"r", r}, {"best_functional", num(row.best_functional)}, {"family", row.family}});
        }
        j["fails_a"] = {{"density", f.describe()},
                        {"verdict_a", to_string(rep.verdict_A)},
                        {"verdict_b", to_string(rep.verdict_B)},
                        {"certificates", certs},
                        {"estimator_trend", trend},
                        {"verdict", all ? "refuted" : "not refuted"}};
    }
    {  // fails B: logarithmic power
        const auto f = Density::powlog(-1.0, -2.0);
        const auto b = check_condition_B(f, cfg.classify.grid, cfg.classify.safety, cfg.classify.rule);
        json certs = json::array();
        bool all = true;
        CsvWriter w(out / "fails_b_trend.csv", {"c", "r1", "r", "r2", "certificate"});
        for (double C : ladder) {
            const auto c = fails_B_refute(f, C, b.verdict == Verdict::pass);
            all = all && c.value > C;
            w << C << c.R1 << c.r << c.R2 << c.value;
            w.end();
            json e = to_json(c);
            e["c"] = C;
            certs.push_back(e);
        }
        j["fails_b"] = {{"density", f.describe()}, {"verdict_b", to_string(b.verdict)}, {"certificates", certs},
                        {"verdict", all ? "refuted" : "not refuted"}};
    }
    {  // fails C: critical exponent with sigma = 1
        const auto f = Density::powlog(-2.0, -2.0);
        const auto m = build_halfplane(cfg.halfplane);
        SphericalizeOptions so = cfg.sphericalize_options();
        so.sigma = 1.0;
        so.force = true;
        const auto rep = classify(f, cfg.classify);
        const auto v = sphericalize(m, f, rep, so);
        const auto cc = check_condition_C(v);
        const double r_top = f(1.0) / (rep.C_A_hat * rep.C_A_hat);
        const auto trend = infinity_trend(f, 1.0, r_top, 12);
        CsvWriter w(out / "fails_c_trend.csv", {"r", "ratio", "witness"});
        json t = json::array();
        for (const auto& row : trend) {
            w << row.r << row.ratio << row.witness;
            w.end();
            t.push_back({{"r", row.r}, {"ratio", row.ratio}, {"witness", row.witness}});
        }
        const std::size_t n = trend.size();
        const bool rising = n >= 3 && trend[n - 2].witness > 1.01 * trend[n - 3].witness &&
                            trend[n - 1].witness > 1.01 * trend[n - 2].witness;
        j["fails_c"] = {{"density", f.describe()},
                        {"sigma", 1.0},
                        {"condition_c", to_json(cc)},
                        {"infinity_trend", t},
                        {"verdict", rising && cc.verdict == Verdict::fail ? "violated" : "not violated"}};
    }
    return j;
}

inline const std::set<std::string>& verify_targets() {
    static const std::set<std::string> t{"uniformity", "doubling", "brackets", "poincare", "counterexamples", "all"};
    return t;
}

inline int cmd_verify(const RunConfig& cfg, const std::string& which, const fs::path& out, std::ostream& log) {
    if (!verify_targets().count(which)) throw ConfigError("unknown verify target '" + which + "'");
    const bool all = which == "all";
    json j;
    if (which != "counterexamples") {
        const auto m = cfg.space();
        const auto f = cfg.density();
        const auto rep = detail::try_classify(f, cfg);
        const auto v = sphericalize(m, f, rep, cfg.sphericalize_options());
        // under "all", a section whose prerequisites fail is skipped with the reason
        auto section = [&](const char* name, auto&& run) {
            if (!all && which != name) return;
            try {
                j[name] = run();
            } catch (const PrereqError& e) {
                if (!all) throw;
                j[name] = {{"skipped", e.what()}};
                log << name << " skipped: " << e.what() << "\n";
            }
        };
        section("uniformity", [&] { return run_uniformity(v, cfg, out); });
        section("brackets", [&] { return run_brackets(v, cfg); });
        section("doubling", [&] { return run_doubling(v, cfg, out); });
        section("poincare", [&] { return run_poincare(v, cfg, out); });
    }
    if (all || which == "counterexamples") j["counterexamples"] = run_counterexamples(cfg, out);
    write_json(out / ("verify_" + which + ".json"), j);
    log << "verify " << which << " written to " << (out / ("verify_" + which + ".json")).string() << "\n";
    return exit_ok;
}

}  // namespace sphere
