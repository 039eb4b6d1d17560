#pragma once

#include <optional>
#include <utility>

#include "collarcurv/conditions.hpp"
#include "collarcurv/schedule.hpp"

namespace collarcurv {

/// Least admissible normalization constant for a family:
/// (1 / (2(n-1))) max over the family of sup_nodes |tr_{g0}(g''_0)|.
/// Normalizing with C at or above it cannot decrease boundary scalar
/// curvature.
double normalization_constant(const MetricFamily& family);

/// Threshold C0 = C0(g0, h, sigma) such that the normal-form collar built
/// from (g0, h) has scal > sigma along the boundary iff C > C0.
double normal_form_threshold(const BoundaryGeometry& geometry, const SymTensorField& g0,
                             const SymTensorField& h, const SigmaBound& sigma);

/// Collar dt^2 + g0 - 2 t h - C t^2 g0. Fails with a suggested smaller
/// t_max when a slice stops being positive definite.
CollarMetric make_normal_collar(const BoundaryGeometry& geometry, const SymTensorField& g0,
                                const SymTensorField& h, double C, double t_max);

/// Residual of the metric against the normal form with the given boundary
/// data on [0, window] (window 0: 4-jet at t = 0 only).
double normal_form_residual(const CollarMetric& cm, const SymTensorField& h, double C,
                            double window);

/// Largest dyadic window on which the metric follows the normal form
/// exactly (residual <= 1e-12); 0 when even the jet fails.
double exact_normal_zone(const CollarMetric& cm, double C);

/// Constant C of a normal-form metric read off from the second derivative
/// g''_0 = -2C g0; nullopt when g''_0 is not a multiple of g0.
std::optional<double> detect_normal_constant(const CollarMetric& cm);

struct NormalizeOptions {
    double support = 0.25;   // blend support t1, clamped into the collar
    double eps_slack = 0.0;  // allowed global decrease below sigma
    double eta0 = 0.125;     // taper curvature bound, halved on failure
    int max_halvings = 12;   // per parameter (support and eta)
    SweepOptions sweep;
};

/// Deforms each family member to a normal-form metric with constant C near
/// the boundary, keeping the 1-jet at t = 0 fixed and the metric unchanged
/// beyond the support. Requires C >= normalization_constant(family) unless
/// the correction vanishes identically (input already in normal form with
/// this C).
DeformationSchedule c_normalize(const MetricFamily& family, SigmaBound sigma, double C,
                                const NormalizeOptions& opts = {});

struct BendOptions {
    int max_delta_halvings = 40;
    int max_c_doublings = 8;       // re-entry budget via renormalization
    double zone_hint = 0.0;        // exact normal-form zone, 0 = detect
    NormalizeOptions renormalize;  // used when C has to be raised
    SweepOptions sweep;
};

/// Rotates the second fundamental form of a normal-form family from its
/// current value h to the target k while fixing the boundary metric,
/// through a cutoff supported in [0, sqrt(delta)]. Requires
/// tr_{g0}(h) >= tr_{g0}(k) pointwise (strict precondition, tolerance 0).
/// delta halves from min{1/2, zone^2, C^-2}; if no delta verifies, the
/// family is renormalized at 2C and the bend retried.
DeformationSchedule bend_second_form(const MetricFamily& family, const TensorFamily& k,
                                     SigmaBound sigma, const BendOptions& opts = {});

struct MasterOptions {
    std::optional<double> C;  // default: thresholds + 1, doubled on failure
    int max_c_doublings = 12;
    NormalizeOptions normalize;
    BendOptions bend;
};

/// Two-stage deformation: normalization on s in [0,1/2], bending of the
/// second fundamental form to k on s in [1/2,1]. Requires
/// tr_{g0}(k)/(n-1) <= H_g pointwise. The endpoint is a normal-form metric
/// with second fundamental form k; the boundary metric never moves.
DeformationSchedule master_deform(const MetricFamily& family, const TensorFamily& k,
                                  SigmaBound sigma, const MasterOptions& opts = {});

struct PushOptions {
    double support = 0.25;  // profile vanishes beyond this
    int max_halvings = 40;
    SweepOptions sweep;
};

/// Linear push of the boundary data: f(u) = g - u * s_target * delta *
/// psi(t) g0 with psi(t) = t near 0. Exactly increments the second
/// fundamental form by (u s_target delta / 2) g0 and the mean curvature by
/// u s_target delta / 2 at t = 0. delta halves until the margin verifies.
DeformationSchedule strict_push(const MetricFamily& family, double s_target, double delta,
                                SigmaBound sigma, const PushOptions& opts = {});

struct ConeOptions {
    double support = 0.25;
    double eta0 = 0.125;
    int max_halvings = 12;
    SweepOptions sweep;
};

/// Deforms a normal-form family with totally umbilic boundary
/// (II = h0 g0) to cone type dt^2 + (1 - t h0)^2 g0 near the boundary.
/// Hypotheses: sigma0 >= sigma|boundary + (n-1)(n-2) h0^2 and
/// scal_{g0} > sigma0 pointwise.
DeformationSchedule cone_deform(const MetricFamily& family, double h0, SigmaBound sigma,
                                double sigma0, const ConeOptions& opts = {});

/// Smooths a two-sided corner: both sides share the boundary metric and
/// satisfy H_1 + H_2 >= 0. Runs the two-stage deformation on each side with
/// targets -II_{g2} and +II_{g2} under one shared constant C, so the
/// endpoints glue smoothly: (g1)^(l)_0 = (-1)^l (g2)^(l)_0 for l <= 3.
std::pair<DeformationSchedule, DeformationSchedule> desingularize(
    const MetricFamily& side1, const MetricFamily& side2, SigmaBound sigma,
    const MasterOptions& opts = {});

} // namespace collarcurv
