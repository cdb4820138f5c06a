#pragma once

// Radial densities rho : (0, inf) -> (0, inf) and the integrals built on them.
//
// Three families are supported:
//   powlog(a, b)     rho(t) = (t+2)^a * log(t+2)^b
//   exponential(k)   rho(t) = exp(-k t)
//   tabulated        piecewise power law through (t_i, rho_i) knots; flat to
//                    the left of the first knot, last slope continued to the right.
//
// Everything that can underflow (tails of exponential, ratios across many
// decades) is also available in log form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "sphere/errors.hpp"

namespace sphere {

struct PowLog {
    double alpha;
    double beta;
};

struct Exponential {
    double rate;
};

struct Tabulated {
    std::vector<std::pair<double, double>> knots;  // (t, rho(t)), t strictly increasing
};

class Density {
public:
    using Family = std::variant<PowLog, Exponential, Tabulated>;

    static constexpr double default_floor = 1e-6;

    static Density powlog(double alpha, double beta, double floor = default_floor) {
        return Density(PowLog{alpha, beta}, floor);
    }
    static Density exponential(double rate, double floor = default_floor) {
        if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
        return Density(Exponential{rate}, floor);
    }
    static Density tabulated(std::vector<std::pair<double, double>> knots,
                             double floor = default_floor) {
        if (knots.empty()) throw DomainError("tabulated density needs at least one knot");
        for (std::size_t i = 0; i < knots.size(); ++i) {
            if (!(knots[i].first > 0.0) || !(knots[i].second > 0.0))
                throw DomainError("tabulated knots must have t > 0 and rho > 0");
            if (i > 0 && !(knots[i].first > knots[i - 1].first))
                throw DomainError("tabulated knots must be strictly increasing in t");
        }
        return Density(Tabulated{std::move(knots)}, floor);
    }

    const Family& family() const { return family_; }
    double domain_floor() const { return floor_; }

    bool is_tabulated() const { return std::holds_alternative<Tabulated>(family_); }

    // Default absolute quadrature tolerance for this family.
    double default_tol() const { return is_tabulated() ? 1e-8 : 1e-10; }

    double log_value(double t) const {
        check_arg(t);
        return log_value_unchecked(t);
    }

    // rho(t); saturates at the smallest positive normal double instead of underflowing to 0.
    double operator()(double t) const {
        const double v = std::exp(log_value(t));
        return std::max(v, std::numeric_limits<double>::min());
    }

    // Whether int_0^inf rho converges, decided from the family parameters.
    bool integrable() const {
        return std::visit(
            [this](const auto& f) -> bool {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PowLog>) {
                    return f.alpha < -1.0 || (f.alpha == -1.0 && f.beta < -1.0);
                } else if constexpr (std::is_same_v<F, Exponential>) {
                    return true;
                } else {
                    return tab_slopes_.empty() ? false : tab_slopes_.back() < -1.0;
                }
            },
            family_);
    }

    void require_integrable() const {
        if (!integrable()) throw DivergenceError(describe() + " is not integrable on (0, inf)");
    }

    std::string describe() const {
        std::ostringstream os;
        std::visit(
            [&os](const auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PowLog>) {
                    os << "powlog(alpha=" << f.alpha << ", beta=" << f.beta << ")";
                } else if constexpr (std::is_same_v<F, Exponential>) {
                    os << "exponential(rate=" << f.rate << ")";
                } else {
                    os << "tabulated(" << f.knots.size() << " knots)";
                }
            },
            family_);
        return os.str();
    }

    // int_a^b rho(t) dt for 0 <= a <= b < inf.
    double integral(double a, double b, double tol = -1.0) const {
        if (a < 0.0 || b < a) throw DomainError("integral bounds must satisfy 0 <= a <= b");
        if (a == b) return 0.0;
        if (std::isinf(b)) return tail(a, tol);
        if (tol <= 0.0) tol = default_tol();
        return std::visit(
            [&](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PowLog>) {
                    return powlog_integral(f, a, b, tol);
                } else if constexpr (std::is_same_v<F, Exponential>) {
                    return (std::exp(-f.rate * a) - std::exp(-f.rate * b)) / f.rate;
                } else {
                    return tab_integral(a, b);
                }
            },
            family_);
    }

    // T(r) = int_r^inf rho(t) dt, r >= 0.
    double tail(double r, double tol = -1.0) const {
        if (r < 0.0) throw DomainError("tail radius must be >= 0");
        require_integrable();
        if (tol <= 0.0) tol = default_tol();
        return std::visit(
            [&](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PowLog>) {
                    return powlog_tail(f, r, tol);
                } else if constexpr (std::is_same_v<F, Exponential>) {
                    return std::exp(-f.rate * r) / f.rate;
                } else {
                    return tab_tail(r);
                }
            },
            family_);
    }

    // log T(r), exact for the exponential family where T underflows early.
    double log_tail(double r) const {
        if (const auto* e = std::get_if<Exponential>(&family_)) {
            require_integrable();
            if (r < 0.0) throw DomainError("tail radius must be >= 0");
            return -e->rate * r - std::log(e->rate);
        }
        return std::log(tail(r));
    }

    // Smallest r >= 0 with T(r) <= target (T is strictly decreasing).
    double tail_inverse(double target) const {
        return tail_inverse_log(std::log(target));
    }

    double tail_inverse_log(double log_target) const {
        require_integrable();
        if (log_tail(0.0) <= log_target) return 0.0;
        // Exact inverses where available.
        if (const auto* e = std::get_if<Exponential>(&family_))
            return (-log_target - std::log(e->rate)) / e->rate;
        if (const auto* p = std::get_if<PowLog>(&family_)) {
            if (p->beta == 0.0) {
                // (r+2)^(a+1)/(-a-1) = target
                const double lr2 = (log_target + std::log(-p->alpha - 1.0)) / (p->alpha + 1.0);
                return std::exp(lr2) - 2.0;
            }
            if (p->alpha == -1.0) {
                // log(r+2)^(b+1)/(-b-1) = target
                const double ll = (log_target + std::log(-p->beta - 1.0)) / (p->beta + 1.0);
                return std::exp(std::exp(ll)) - 2.0;
            }
        }
        // Bracket in s = log(r + 1) and solve with TOMS 748.
        auto g = [&](double s) { return log_tail(std::expm1(s)) - log_target; };
        double lo = 0.0;
        double hi = 1.0;
        while (g(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 700.0) throw DomainError("tail_inverse: target below representable tail");
        }
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(50);
        auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
        return std::expm1(0.5 * (a + b));
    }

private:
    Density(Family fam, double floor) : family_(std::move(fam)), floor_(floor) {
        if (!(floor_ > 0.0)) throw DomainError("domain_floor must be positive");
        if (const auto* t = std::get_if<Tabulated>(&family_)) prepare_tabulated(*t);
    }

    void check_arg(double t) const {
        if (!(t > 0.0) || t < floor_) {
            std::ostringstream os;
            os << "density evaluated at t=" << t << " below domain floor " << floor_;
            throw DomainError(os.str());
        }
    }

    double log_value_unchecked(double t) const {
        return std::visit(
            [&](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PowLog>) {
                    const double l = std::log(t + 2.0);
                    return f.alpha * l + (f.beta == 0.0 ? 0.0 : f.beta * std::log(l));
                } else if constexpr (std::is_same_v<F, Exponential>) {
                    return -f.rate * t;
                } else {
                    return tab_log_value(t);
                }
            },
            family_);
    }

    // ---- powlog ------------------------------------------------------------

    static double powlog_integral(const PowLog& f, double a, double b, double tol) {
        const double la = std::log(a + 2.0), lb = std::log(b + 2.0);
        if (f.beta == 0.0) {
            if (f.alpha == -1.0) return lb - la;
            const double e = f.alpha + 1.0;
            return (std::exp(e * lb) - std::exp(e * la)) / e;
        }
        if (f.alpha == -1.0) {
            if (f.beta == -1.0) return std::log(lb / la);
            const double e = f.beta + 1.0;
            return (std::pow(lb, e) - std::pow(la, e)) / e;
        }
        // u = log(t+2): int e^{(a+1)u} u^b du.
        auto g = [&](double u) { return std::exp((f.alpha + 1.0) * u + f.beta * std::log(u)); };
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            g, la, lb, 20, tol, &err);
        return v;
    }

    static double powlog_tail(const PowLog& f, double r, double tol) {
        const double lr = std::log(r + 2.0);
        if (f.beta == 0.0) return std::exp((f.alpha + 1.0) * lr) / (-f.alpha - 1.0);
        if (f.alpha == -1.0) return std::pow(lr, f.beta + 1.0) / (-f.beta - 1.0);
        // Shift u = lr + v so the integrator sees (0, inf).
        const double s = -(f.alpha + 1.0);
        auto g = [&](double v) {
            const double u = lr + v;
            return std::exp(-s * v + f.beta * std::log(u / lr));
        };
        static boost::math::quadrature::exp_sinh<double> integrator;
        double err = 0.0;
        const double v = integrator.integrate(g, tol * 1e-2, &err);
        return v * std::exp(-s * lr + f.beta * std::log(lr));
    }

    // ---- tabulated ---------------------------------------------------------

    void prepare_tabulated(const Tabulated& t) {
        tab_logt_.clear();
        tab_logr_.clear();
        tab_slopes_.clear();
        for (const auto& [x, y] : t.knots) {
            tab_logt_.push_back(std::log(x));
            tab_logr_.push_back(std::log(y));
        }
        for (std::size_t i = 0; i + 1 < t.knots.size(); ++i)
            tab_slopes_.push_back((tab_logr_[i + 1] - tab_logr_[i]) / (tab_logt_[i + 1] - tab_logt_[i]));
        if (tab_slopes_.empty()) tab_slopes_.push_back(0.0);
    }

    double tab_log_value(double t) const {
        const double lt = std::log(t);
        if (lt <= tab_logt_.front()) return tab_logr_.front();
        if (lt >= tab_logt_.back()) return tab_logr_.back() + tab_slopes_.back() * (lt - tab_logt_.back());
        const auto it = std::upper_bound(tab_logt_.begin(), tab_logt_.end(), lt);
        const std::size_t i = static_cast<std::size_t>(it - tab_logt_.begin()) - 1;
        return tab_logr_[i] + tab_slopes_[i] * (lt - tab_logt_[i]);
    }

    // int over [a, b] of rho restricted to a power-law piece c * t^s.
    static double power_piece(double log_c, double s, double a, double b) {
        if (b <= a) return 0.0;
        if (s == -1.0) return std::exp(log_c) * std::log(b / a);
        const double e = s + 1.0;
        return std::exp(log_c) * (std::pow(b, e) - std::pow(a, e)) / e;
    }

    double tab_integral(double a, double b) const {
        const auto& knots = std::get<Tabulated>(family_).knots;
        const std::size_t n = knots.size();
        double total = 0.0;
        // flat piece on (0, t_0]
        const double t0 = knots.front().first;
        if (a < t0) total += knots.front().second * (std::min(b, t0) - a);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double lo = std::max(a, knots[i].first), hi = std::min(b, knots[i + 1].first);
            if (hi > lo) {
                const double s = tab_slopes_[i];
                total += power_piece(tab_logr_[i] - s * tab_logt_[i], s, lo, hi);
            }
        }
        const double tl = knots.back().first;
        if (b > tl) {
            const double s = tab_slopes_.back();
            total += power_piece(tab_logr_.back() - s * tab_logt_.back(), s, std::max(a, tl), b);
        }
        return total;
    }

    double tab_tail(double r) const {
        const auto& knots = std::get<Tabulated>(family_).knots;
        const double tl = knots.back().first;
        const double s = tab_slopes_.back();
        const double start = std::max(r, tl);
        // int_start^inf rho_l (t/t_l)^s dt
        const double far = knots.back().second * tl / (-s - 1.0) * std::pow(start / tl, s + 1.0);
        return (r < tl ? tab_integral(r, tl) : 0.0) + far;
    }

    Family family_;
    double floor_;
    std::vector<double> tab_logt_, tab_logr_, tab_slopes_;
};

}  // namespace sphere
