#pragma once

// JSON and CSV serialization of results. Non-finite numbers are written as
// JSON null and as "inf"/"nan" in CSV.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sphere/conditions.hpp"
#include "sphere/constants.hpp"
#include "sphere/curves.hpp"
#include "sphere/doubling_rho.hpp"
#include "sphere/errors.hpp"
#include "sphere/poincare.hpp"
#include "sphere/sphericalize.hpp"
#include "sphere/verify.hpp"

namespace sphere {

using json = nlohmann::ordered_json;

inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const DensityReport& r) {
    json j;
    j["density"] = r.density;
    j["verdict_a"] = to_string(r.verdict_A);
    j["verdict_b"] = to_string(r.verdict_B);
    j["verdict_equivalence"] = to_string(r.verdict_equiv);
    j["c_a_hat"] = num(r.C_A_hat);
    j["c_b_hat"] = num(r.C_B_hat);
    j["c_qd_hat"] = num(r.C_qd_hat);
    j["c_equiv_hat"] = num(r.C_equiv_hat);
    j["epsilon_hat"] = num(r.epsilon_hat);
    j["tau1_hat"] = num(r.tau1_hat);
    j["integral_total"] = num(r.integral_total);
    j["witness_a"] = {num(r.witness_A.first), num(r.witness_A.second)};
    j["witness_b"] = num(r.witness_B);
    if (r.decay) {
        j["decay"] = {{"epsilon", num(r.decay->epsilon)},
                      {"worst_ratio", num(r.decay->worst_ratio)},
                      {"holds", r.decay->holds},
                      {"witness", {num(r.decay->witness_r), num(r.decay->witness_s)}}};
    }
    return j;
}

inline json to_json(const LemmaConstants& k) {
    return {{"c_a", num(k.C_A)}, {"c_b", num(k.C_B)}, {"c_u", num(k.C_U)}, {"c1", num(k.C1())},
            {"c2", num(k.C2())}, {"c0", num(k.c0())}, {"a1", num(k.a1())}, {"a2", num(k.a2())}};
}

inline json to_json(const VerifierReport& r) {
    return {{"lemma", r.lemma},       {"samples", r.samples},          {"worst_ratio", num(r.worst_ratio)},
            {"witness", r.witness},   {"verdict", to_string(r.verdict)}, {"tolerance", num(r.tolerance)},
            {"note", r.note}};
}

inline json to_json(const ConditionCResult& c) {
    return {{"verdict", to_string(c.verdict)}, {"c_c_hat", num(c.C_C_hat)}, {"lower_ratio", num(c.lower_ratio)},
            {"witness_r", num(c.witness_r)},   {"note", c.note}};
}

inline json to_json(const BracketCheck& b) {
    return {{"samples", b.samples}, {"violations", b.violations}, {"worst_low", num(b.worst_low)},
            {"worst_high", num(b.worst_high)}, {"witness_node", b.witness}};
}

// Summary of a sphericalized model: weights, diameter, total mass, infinity brackets.
inline json sphere_summary(const SphereView& v) {
    const auto& m = v.base();
    json j;
    j["density"] = v.density().describe();
    j["sigma"] = v.sigma();
    j["nodes"] = m.size();
    j["edges"] = m.edges.size();
    j["mesh_rel"] = m.mesh_rel;
    j["r_max"] = m.R_max;
    j["diam_rho_hat"] = num(v.diam_rho_hat);
    j["mu_rho_nodes"] = num(v.mu_rho_nodes());
    j["mu_rho_total"] = v.has_polar_oracle() && v.has_infinity() ? num(v.mu_rho_total()) : json(nullptr);
    // log10 histogram of edge weights
    std::map<int, int> hist;
    double wmin = INFINITY, wmax = 0.0;
    for (double w : v.edge_rho) {
        ++hist[static_cast<int>(std::floor(std::log10(w)))];
        wmin = std::min(wmin, w);
        wmax = std::max(wmax, w);
    }
    json h = json::array();
    for (const auto& [d, c] : hist) h.push_back({{"log10_lo", d}, {"count", c}});
    j["edge_rho_histogram"] = h;
    j["edge_rho_min"] = num(wmin);
    j["edge_rho_max"] = num(wmax);
    if (v.has_infinity()) {
        double width = 0.0, lo = INFINITY, hi = 0.0;
        for (const auto& b : v.infinity) {
            width = std::max(width, b.upper - b.lower);
            lo = std::min(lo, b.point);
            hi = std::max(hi, b.point);
        }
        j["infinity"] = {{"max_bracket_width", num(width)}, {"min_point", num(lo)}, {"max_point", num(hi)},
                         {"inversions", v.bracket_inversions}};
    } else {
        j["infinity"] = nullptr;
    }
    if (v.report) j["density_report"] = to_json(*v.report);
    return j;
}

inline json to_json(const UniformityEstimate& u) {
    json j{{"metric", to_string(u.metric)}, {"c_hat", num(u.C_hat)}, {"pairs", u.rows.size()},
           {"family_limited", u.family_limited}};
    if (u.worst_row >= 0) {
        const auto& w = u.rows[u.worst_row];
        j["worst"] = {{"x", w.x}, {"y", w.y}, {"family", w.family}, {"functional", num(w.best_functional)}};
    }
    std::map<std::string, int> wins;
    for (const auto& r : u.rows) ++wins[r.family];
    j["wins_by_family"] = wins;
    return j;
}

inline json to_json(const FailsACertificate& c) {
    return {{"c", c.C},
            {"r", num(c.r)},
            {"r_prime", num(c.R_prime)},
            {"r_outer", num(c.R)},
            {"cone_margin", num(c.cone_margin)},
            {"qc_margin", num(c.qc_margin)},
            {"threshold_met", c.threshold_met},
            {"informative", c.informative},
            {"refutes", c.refutes()}};
}

inline json to_json(const FailsBCertificate& c) {
    return {{"r1", num(c.R1)}, {"r", num(c.r)}, {"r2", num(c.R2)}, {"value", num(c.value)},
            {"informative", c.informative}};
}

inline json to_json(const DoublingRhoReport& r) {
    json strata = json::array();
    for (const auto& s : r.strata)
        strata.push_back({{"name", s.name},
                          {"samples", s.samples},
                          {"resolved", s.resolved},
                          {"worst_ratio", num(s.worst_ratio)},
                          {"witness_center", s.witness.center},
                          {"witness_radius", num(s.witness.radius)}});
    auto inc = [](const InclusionCheck& c) {
        return json{{"balls", c.balls}, {"nontrivial", c.nontrivial}, {"violations", c.violations}};
    };
    return {{"c_murho_hat", num(r.C_murho_hat)},
            {"samples", r.samples},
            {"resolution_limited", r.resolution_limited},
            {"worst", {{"center", r.worst.center}, {"radius", num(r.worst.radius)}, {"stratum", r.worst.stratum}}},
            {"strata", strata},
            {"point_inclusions", inc(r.point_inclusions)},
            {"infinity_inclusions", inc(r.infinity_inclusions)},
            {"intermediate_ratio_range", {num(r.intermediate_lo), num(r.intermediate_hi)}},
            {"intermediate_factor", num(r.intermediate_factor())},
            {"comparable_ratio_range", {num(r.comparable_lo), num(r.comparable_hi)}},
            {"comparable_factor", num(r.comparable_factor())},
            {"trend_slope", num(r.trend_slope)},
            {"trend_increasing", r.trend_increasing},
            {"verdict", to_string(r.verdict)}};
}

inline json to_json(const PoincareSweep& s) {
    json j{{"metric", to_string(s.metric)}, {"c_p_hat", num(s.C_P_hat)}, {"samples", s.samples.size()},
           {"skipped", s.skipped}};
    if (s.witness >= 0) {
        const auto& w = s.samples[s.witness];
        j["witness"] = {{"center", w.center}, {"radius", num(w.radius)}, {"field", w.field}};
    }
    return j;
}

// ---- CSV ----------------------------------------------------------------------

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
        if (!os_) throw ConfigError("cannot write " + path.string());
        os_ << std::setprecision(12);
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }

    CsvWriter& operator<<(double x) {
        sep();
        if (std::isfinite(x)) os_ << x;
        else os_ << (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
        return *this;
    }
    CsvWriter& operator<<(int x) {
        sep();
        os_ << x;
        return *this;
    }
    CsvWriter& operator<<(const std::string& s) {
        sep();
        os_ << s;
        return *this;
    }
    void end() {
        os_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }
    std::ofstream os_;
    bool first_ = true;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

inline void write_curve_csv(const std::filesystem::path& path, const CurveSample& c) {
    CsvWriter w(path, {"index", "x", "y", "cum_d", "cum_rho", "d_x", "d_x_rho"});
    for (std::size_t i = 0; i < c.size(); ++i) {
        w << static_cast<int>(i) << c.pts[i].x << c.pts[i].y << c.cum_d[i] << c.cum_rho[i] << c.dX[i] << c.dX_rho[i];
        w.end();
    }
}

}  // namespace sphere
