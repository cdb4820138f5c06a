#pragma once

// Constants of the comparison estimates, as functions of the oscillation
// constant C_A, the tail constant C_B and the uniformity constant C_U of the
// base space.

#include <cmath>

namespace sphere {

struct LemmaConstants {
    double C_A = 1.0;
    double C_B = 1.0;
    double C_U = 1.0;

    double log2_CU() const { return std::log2(C_U); }

    // |x| / (1 + C_U) <= |z| <= (1 + C_U)|x| + C_U |y| along a uniform curve
    double radius_factor() const { return 1.0 + C_U; }

    // rho(|z|) / rho(|x|) along a uniform curve between comparable radii
    double density_swing() const { return std::pow(C_A, 3.0 + log2_CU()); }

    // d_rho(x, y) <= C2 rho(|x|) d(x, y) for comparable radii
    double C2() const { return C_U * density_swing(); }

    // d_rho(x, y) >= rho(|x|) d(x, y) / (C_A^3 C_B) for comparable radii
    double lower_factor() const { return 1.0 / (C_A * C_A * C_A * C_B); }

    // h(|x|)/C_A <= d_rho(x, inf) <= C1 h(|x|)
    double C1() const { return 3.0 * C_U * std::pow(C_A, 4.0 + log2_CU()) * C_B; }

    double c0() const { return 1.0 / (2.0 * C1() * C_A * C_A * C_B); }
    double a1() const { return 1.0 / C2(); }
    double a2() const { return C_A * C_A * C_A * C_B; }

    // diam_rho <= 6 C_qd C_U (1 + C_U) int_0^inf rho
    double diameter_bound(double C_qd, double integral) const {
        return 6.0 * C_qd * C_U * (1.0 + C_U) * integral;
    }
};

}  // namespace sphere
