#pragma once

// Grid-based estimation of the density constants and the pass/fail/inconclusive
// verdicts for the oscillation condition (A), the tail condition (B) and their
// two-sided combination.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphere/density.hpp"
#include "sphere/errors.hpp"

namespace sphere {

enum class Verdict { pass, fail, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

// Geometric grid with a fixed number of points per decade; decade endpoints are exact.
struct RadialGrid {
    double lo = 1e-3;
    double hi = 1e6;
    int per_decade = 16;

    std::vector<double> points() const {
        const double a = std::log10(lo), b = std::log10(hi);
        const int n = static_cast<int>(std::ceil((b - a) * per_decade - 1e-9));
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            const double e = a + static_cast<double>(k) / per_decade;
            out.push_back(std::pow(10.0, std::min(e, b)));
        }
        return out;
    }

    RadialGrid refined() const { return RadialGrid{lo, hi, per_decade * 2}; }
};

// Supremum of a log-ratio over a grid sweep, with per-decade maxima for the growth test.
struct SupEstimate {
    double log_sup = -std::numeric_limits<double>::infinity();
    double witness_r = 0.0;
    double witness_s = 0.0;
    std::vector<double> decade_log_max;

    double value() const { return std::exp(log_sup); }

    // decade_anchor is binned into [lo*10^k, lo*10^(k+1)); the grid end joins the last decade.
    void add(double log_ratio, double r, double s, double decade_anchor, double grid_lo,
             double grid_hi) {
        if (log_ratio > log_sup) {
            log_sup = log_ratio;
            witness_r = r;
            witness_s = s;
        }
        const double last = std::max(0.0, std::round(std::log10(grid_hi / grid_lo)) - 1.0);
        const auto d = static_cast<std::size_t>(std::clamp(
            std::floor(std::log10(decade_anchor / grid_lo) + 1e-9), 0.0, last));
        if (decade_log_max.size() <= d)
            decade_log_max.resize(d + 1, -std::numeric_limits<double>::infinity());
        decade_log_max[d] = std::max(decade_log_max[d], log_ratio);
    }
};

struct VerdictRule {
    double stable_rel = 0.01;      // relative change allowed on grid doubling
    double growth_factor = 1.01;   // per-decade growth that counts as "growing"
    double min_acceleration = 0.9; // last increment / previous increment needed for "unbounded"
    int growth_decades = 3;
};

// True when the per-decade maxima grow over the top decades without slowing down.
// A ratio creeping toward a finite limit grows with shrinking increments and is
// not counted; logarithmic growth has constant increments and is.
inline bool unbounded_growth(const std::vector<double>& decade_log_max, const VerdictRule& rule) {
    const int k = rule.growth_decades;
    if (static_cast<int>(decade_log_max.size()) < k) return false;
    const std::vector<double> x(decade_log_max.end() - k, decade_log_max.end());
    for (int i = 1; i < k; ++i)
        if (!(x[i] - x[i - 1] > std::log(rule.growth_factor))) return false;
    if (x.back() > 600.0) return true;  // beyond any constant worth reporting
    for (int i = 2; i < k; ++i) {
        const double d1 = std::exp(x[i - 1]) - std::exp(x[i - 2]);
        const double d2 = std::exp(x[i]) - std::exp(x[i - 1]);
        if (d2 < rule.min_acceleration * d1) return false;
    }
    return true;
}

// Stabilization rule: fail on sustained growth over the top decades, pass when
// doubling the grid moves the supremum by less than stable_rel.
inline Verdict stabilization_verdict(const SupEstimate& coarse, const SupEstimate& fine,
                                     const VerdictRule& rule = {}) {
    if (unbounded_growth(fine.decade_log_max, rule)) return Verdict::fail;
    if (!std::isfinite(fine.log_sup) || !std::isfinite(coarse.log_sup)) return Verdict::inconclusive;
    const double rel = std::abs(std::expm1(coarse.log_sup - fine.log_sup));
    return rel < rule.stable_rel ? Verdict::pass : Verdict::inconclusive;
}

struct ConditionResult {
    Verdict verdict = Verdict::inconclusive;
    double constant = std::numeric_limits<double>::infinity();
    double witness_r = 0.0;
    double witness_s = 0.0;
    SupEstimate coarse, fine;
};

namespace detail {

inline SupEstimate sweep_A(const Density& f, const RadialGrid& grid) {
    SupEstimate est;
    const auto pts = grid.points();
    const double floor = f.domain_floor();
    for (double g : pts) {
        // admissible partners of g: max((g-1)/2, floor) <= s <= 2g+1
        const double lo = std::max((g - 1.0) / 2.0, floor), hi = 2.0 * g + 1.0;
        std::vector<double> partners{lo, hi};
        for (double p : pts)
            if (p >= lo && p <= hi) partners.push_back(p);
        const double lg = f.log_value(g);
        for (double p : partners) {
            const double lp = f.log_value(p);
            est.add(lg - lp, g, p, g, grid.lo, grid.hi);
            est.add(lp - lg, p, g, g, grid.lo, grid.hi);
        }
    }
    return est;
}

// log of T(r)/((r+1) rho(r))
inline double log_tail_ratio(const Density& f, double r) {
    return f.log_tail(r) - std::log1p(r) - f.log_value(r);
}

inline SupEstimate sweep_B(const Density& f, const RadialGrid& grid) {
    SupEstimate est;
    for (double r : grid.points()) est.add(log_tail_ratio(f, r), r, r, r, grid.lo, grid.hi);
    return est;
}

inline SupEstimate sweep_equiv(const Density& f, const RadialGrid& grid) {
    SupEstimate est;
    for (double r : grid.points()) est.add(std::abs(log_tail_ratio(f, r)), r, r, r, grid.lo, grid.hi);
    return est;
}

inline ConditionResult finish(SupEstimate coarse, SupEstimate fine, double safety,
                              const VerdictRule& rule) {
    ConditionResult out;
    out.verdict = stabilization_verdict(coarse, fine, rule);
    out.constant = safety * fine.value();
    if (out.verdict == Verdict::fail && !std::isfinite(out.constant))
        out.constant = std::numeric_limits<double>::infinity();
    out.witness_r = fine.witness_r;
    out.witness_s = fine.witness_s;
    out.coarse = std::move(coarse);
    out.fine = std::move(fine);
    return out;
}

}  // namespace detail

inline void require_grid_span(const RadialGrid& grid) {
    if (grid.lo > 1e-3 || grid.hi < 1e6)
        throw DomainError("density grid must span at least [1e-3, 1e6]");
}

// sup of rho(r)/rho(s) over r <= 2s+1, s <= 2r+1.
inline ConditionResult check_condition_A(const Density& f, const RadialGrid& grid = {},
                                         double safety = 1.0, const VerdictRule& rule = {}) {
    require_grid_span(grid);
    return detail::finish(detail::sweep_A(f, grid), detail::sweep_A(f, grid.refined()), safety, rule);
}

// sup of T(r)/((r+1) rho(r)).
inline ConditionResult check_condition_B(const Density& f, const RadialGrid& grid = {},
                                         double safety = 1.0, const VerdictRule& rule = {}) {
    require_grid_span(grid);
    f.require_integrable();
    return detail::finish(detail::sweep_B(f, grid), detail::sweep_B(f, grid.refined()), safety, rule);
}

// Smallest C with (r+1)rho(r)/C <= T(r) <= C (r+1)rho(r) on the grid.
inline ConditionResult check_equivalence(const Density& f, const RadialGrid& grid = {},
                                         const VerdictRule& rule = {}) {
    require_grid_span(grid);
    f.require_integrable();
    return detail::finish(detail::sweep_equiv(f, grid), detail::sweep_equiv(f, grid.refined()), 1.0,
                          rule);
}

// sup over r <= s of rho(s)/rho(r): the quasidecreasing constant.
inline std::pair<double, std::pair<double, double>> quasidecreasing_constant(
    const Density& f, const RadialGrid& grid = {}) {
    double best = 0.0, wr = 0.0, ws = 0.0;
    double min_log = std::numeric_limits<double>::infinity(), arg_min = 0.0;
    for (double t : grid.refined().points()) {
        const double l = f.log_value(t);
        if (l < min_log) {
            min_log = l;
            arg_min = t;
        }
        if (l - min_log > best) {
            best = l - min_log;
            wr = arg_min;
            ws = t;
        }
    }
    return {std::exp(best), {wr, ws}};
}

struct DecayCheck {
    double epsilon = 0.0;
    double worst_ratio = 0.0;  // max of lhs/rhs over sampled r <= s; holds when <= 1
    double witness_r = 0.0;
    double witness_s = 0.0;
    bool holds = false;
};

// (s+1)^(eps+1) rho(s) <= C_A C_B (r+1)^(eps+1) rho(r) for r <= s, eps = 1/(C_A C_B).
inline DecayCheck decay_exponent(const Density& f, double C_A, double C_B,
                                 const RadialGrid& grid = {}) {
    if (!std::isfinite(C_A) || !std::isfinite(C_B))
        throw PrereqError("decay exponent needs finite constants for conditions A and B");
    DecayCheck out;
    out.epsilon = 1.0 / (C_A * C_B);
    const double log_c = std::log(C_A * C_B);
    double worst = -std::numeric_limits<double>::infinity();
    double min_phi = std::numeric_limits<double>::infinity(), arg_min = 0.0;
    for (double t : grid.refined().points()) {
        const double phi = (out.epsilon + 1.0) * std::log1p(t) + f.log_value(t);
        if (phi < min_phi) {
            min_phi = phi;
            arg_min = t;
        }
        if (phi - min_phi > worst) {
            worst = phi - min_phi;
            out.witness_r = arg_min;
            out.witness_s = t;
        }
    }
    out.worst_ratio = std::exp(worst - log_c);
    out.holds = out.worst_ratio <= 1.0 + 1e-12;
    return out;
}

// h(t) = (t+1) rho(t) tabulated from the domain floor, with the generalized inverse
// h^{-1}(tau) = inf{t : h(t) <= tau}.
class HTable {
public:
    struct Inverse {
        double value = 0.0;       // refined crossing inside the bracketing grid cell
        double grid_upper = 0.0;  // smallest grid t with h(t) <= tau (conservative)
        double grid_lower = 0.0;  // its left grid neighbour
        bool saturated = false;   // tau >= h(domain_floor)
    };

    HTable(Density f, const RadialGrid& grid) : f_(std::move(f)) {
        t_.push_back(f_.domain_floor());
        for (double p : grid.refined().points())
            if (p > t_.back()) t_.push_back(p);
        for (double t : t_) h_.push_back(h(t));
    }

    double h(double t) const { return (t + 1.0) * f_(t); }
    const std::vector<double>& t() const { return t_; }
    const std::vector<double>& values() const { return h_; }

    Inverse inverse(double tau) const {
        if (!(tau > 0.0)) throw DomainError("h inverse needs tau > 0");
        Inverse out;
        if (h_.front() <= tau) {
            out.value = out.grid_upper = out.grid_lower = t_.front();
            out.saturated = true;
            return out;
        }
        std::size_t k = 1;
        while (k < h_.size() && h_[k] > tau) ++k;
        double lo, hi;
        if (k < h_.size()) {
            lo = t_[k - 1];
            hi = t_[k];
        } else {
            lo = t_.back();
            hi = 2.0 * lo;
            while (h(hi) > tau) {
                lo = hi;
                hi *= 2.0;
                if (hi > 1e300) throw DomainError("h inverse: tau below the range of h");
            }
        }
        out.grid_lower = lo;
        out.grid_upper = hi;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (h(mid) <= tau ? hi : lo) = mid;
        }
        out.value = hi;
        return out;
    }

private:
    Density f_;
    std::vector<double> t_, h_;
};

struct HInverseDoublingCheck {
    double K = 0.0;
    double worst_ratio = 0.0;   // max h^{-1}(tau/2) / (K h^{-1}(tau))
    int monotonicity_violations = 0;
    double min_inverse_at_tau1 = 0.0;
    int samples = 0;
    bool truncated = false;  // tau fell below what h reaches in double range
};

// h^{-1}(tau) <= h^{-1}(tau/2) <= K h^{-1}(tau) for tau = tau1 2^{-k}.
inline HInverseDoublingCheck check_h_inverse_doubling(const HTable& table, double tau1, double C_A,
                                                      double C_B, int samples = 40) {
    HInverseDoublingCheck out;
    const double eps = 1.0 / (C_A * C_B);
    out.K = 2.0 * std::pow(2.0 * C_A * C_B, 1.0 / eps);
    try {
        out.min_inverse_at_tau1 = table.inverse(tau1).value;
    } catch (const DomainError&) {
        out.truncated = true;
        return out;
    }
    double tau = tau1;
    for (int k = 0; k < samples; ++k, tau *= 0.5) {
        double a, b;
        try {
            a = table.inverse(tau).value;
            b = table.inverse(tau / 2).value;
        } catch (const DomainError&) {
            out.truncated = true;
            break;
        }
        if (a > b) ++out.monotonicity_violations;
        out.worst_ratio = std::max(out.worst_ratio, b / (out.K * a));
        ++out.samples;
    }
    return out;
}

struct ClassifyOptions {
    RadialGrid grid{};
    double safety = 1.0;
    VerdictRule rule{};
};

struct DensityReport {
    std::string density;
    double C_A_hat = std::numeric_limits<double>::infinity();
    double C_B_hat = std::numeric_limits<double>::infinity();
    double C_qd_hat = std::numeric_limits<double>::infinity();
    double C_equiv_hat = std::numeric_limits<double>::infinity();
    double epsilon_hat = 0.0;
    double tau1_hat = 0.0;
    double integral_total = 0.0;
    Verdict verdict_A = Verdict::inconclusive;
    Verdict verdict_B = Verdict::inconclusive;
    Verdict verdict_equiv = Verdict::inconclusive;
    std::pair<double, double> witness_A{0.0, 0.0};
    double witness_B = 0.0;
    std::optional<DecayCheck> decay;

    bool passes_AB() const { return verdict_A == Verdict::pass && verdict_B == Verdict::pass; }
};

// Full classification. Throws DivergenceError for non-integrable densities.
inline DensityReport classify(const Density& f, const ClassifyOptions& opt = {}) {
    f.require_integrable();
    DensityReport rep;
    rep.density = f.describe();
    const auto a = check_condition_A(f, opt.grid, opt.safety, opt.rule);
    const auto b = check_condition_B(f, opt.grid, opt.safety, opt.rule);
    const auto e = check_equivalence(f, opt.grid, opt.rule);
    rep.verdict_A = a.verdict;
    rep.verdict_B = b.verdict;
    rep.verdict_equiv = e.verdict;
    rep.C_A_hat = a.verdict == Verdict::fail ? std::numeric_limits<double>::infinity() : a.constant;
    rep.C_B_hat = b.verdict == Verdict::fail ? std::numeric_limits<double>::infinity() : b.constant;
    rep.C_equiv_hat = e.verdict == Verdict::fail ? std::numeric_limits<double>::infinity() : e.constant;
    rep.witness_A = {a.witness_r, a.witness_s};
    rep.witness_B = b.witness_r;
    rep.C_qd_hat = quasidecreasing_constant(f, opt.grid).first;
    rep.integral_total = f.tail(0.0);
    if (a.verdict == Verdict::pass) rep.tau1_hat = f(1.0) / rep.C_A_hat;
    if (rep.passes_AB()) {
        rep.epsilon_hat = 1.0 / (rep.C_A_hat * rep.C_B_hat);
        rep.decay = decay_exponent(f, rep.C_A_hat, rep.C_B_hat, opt.grid);
    }
    return rep;
}

}  // namespace sphere
