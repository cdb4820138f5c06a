#pragma once

// Models shared by several test binaries, built once per process.

#include "sphere/constants.hpp"
#include "sphere/sphericalize.hpp"

namespace fixtures {

inline const sphere::SpaceModel& halfplane() {
    static const sphere::SpaceModel m = sphere::build_halfplane(sphere::HalfPlaneOptions{});
    return m;
}

inline const sphere::SpaceModel& halfplane_fine() {
    static const sphere::SpaceModel m = sphere::build_halfplane({0.025, 1e3, 1e-2, 1'000'000});
    return m;
}

// rho(t) = (t + 2)^-2 with sigma = 2 on the default half-plane.
inline const sphere::SphereView& inverse_square() {
    static const sphere::SphereView v = sphere::sphericalize(halfplane(), sphere::Density::powlog(-2.0, 0.0));
    return v;
}

inline const sphere::SphereView& inverse_square_fine() {
    static const sphere::SphereView v =
        sphere::sphericalize(halfplane_fine(), sphere::Density::powlog(-2.0, 0.0));
    return v;
}

inline sphere::LemmaConstants constants(const sphere::SphereView& v) {
    return {v.report->C_A_hat, v.report->C_B_hat, v.base().C_U};
}

}  // namespace fixtures
