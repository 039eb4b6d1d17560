#pragma once

#include "collarcurv/profile.hpp"

namespace collarcurv {

/// C^2 piecewise-polynomial ramp: t - 1/2 up to t = 1/10, a fixed quartic
/// bridge on [1/10, 9/10], zero beyond. Concave, with values in [-1/2, 0]
/// and second derivative in [-15/8, 0].
ProfileFunction cutoff_base_ramp();

/// Smooth concave replacement for the base ramp: equal to it near 0 and on
/// [19/20, inf), within 1/8 of it in C^2 on [0,1], concave, with
/// -2 <= second derivative <= 0 and slope in [0, 1]. The correction is a
/// polynomial reshaping of the second derivative supported in
/// [7/8, 19/20], solved at construction from two exact moment conditions
/// and re-verified on a grid.
ProfileFunction smooth_concave_ramp();

/// Plateau at 1/2 on [0, 19/20] stepping smoothly down to 0 at t = 1;
/// a degree-7 smoothstep on the transition.
ProfileFunction plateau_step();

/// Cutoff family for one deformation scale delta in (0, 1/2]:
///   cutoff(t) = t near 0, 0 for t >= sqrt(delta), values in [0, delta/2];
///   |cutoff'| <= slope_bound everywhere;
///   -2/delta <= cutoff'' <= 0 on [0, delta], |cutoff''| <= slope_bound on
///   [delta, sqrt(delta)].
/// slope_bound is computed once from the two generator ramps and does not
/// depend on delta.
struct CutoffFamily {
    double delta = 0.0;
    ProfileFunction concave_part;   // delta * ramp(t / delta)
    ProfileFunction plateau_part;   // delta * step(t / sqrt(delta))
    ProfileFunction cutoff;         // sum of the two
    double slope_bound = 0.0;
    /// width of the exact-linear zone where cutoff(t) == t
    double linear_zone = 0.0;
};

CutoffFamily make_cutoff_family(double delta);

/// Reparameterizations used to concatenate two deformation stages over one
/// s in [0,1]: stage one runs while stage_one_weight stays 1, stage two
/// while stage_two_weight stays 0.
double stage_one_weight(double s);   // 1 on [0,1/2], 2(1-s) on [1/2,1]
double stage_two_weight(double s);   // 1-2s on [0,1/2], 0 on [1/2,1]

} // namespace collarcurv
