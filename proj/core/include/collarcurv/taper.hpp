#pragma once

#include <optional>

#include "collarcurv/profile.hpp"

namespace collarcurv {

/// Blend profile for deformations that modify the second t-derivative of a
/// collar metric near the boundary: q(t) = t^2 exactly on [0, quad_zone],
/// q == 0 for t >= support, and the second derivative stays within
/// [-eta, 2] throughout. Keeping q'' bounded one-sidedly is what lets a
/// verified scalar-curvature margin survive the blend; a plain bump
/// multiplying t^2 would inject second-derivative noise of size O(1)
/// independent of the support width.
struct JetTaper {
    ProfileFunction q;
    double support = 0.0;    // q vanishes from here on
    double eta = 0.0;        // one-sided curvature bound actually used
    double quad_zone = 0.0;  // q(t) == t^2 exactly on [0, quad_zone]
};

/// Builds the taper for a given support width and curvature bound.
/// Construction solves a small moment problem for a piecewise-linear q'';
/// returns nullopt when the requested eta is too large to balance (the
/// caller halves and retries).
std::optional<JetTaper> make_jet_taper(double support, double eta);

/// Bump equal to 1 on [0, support/2], easing to 0 at `support` through a
/// degree-7 smoothstep. Used to cut off Taylor remainders, whose blend
/// error vanishes with the support width.
ProfileFunction remainder_bump(double support);

} // namespace collarcurv
