#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "collarcurv/profile.hpp"

namespace collarcurv {

/// Rotationally symmetric background dr^2 + a(r)^2 g_round on [r_lo, r_hi].
/// A vanishing profile at r_lo marks a smooth center (ball-like); positive
/// profiles at both ends give an annulus with two boundary spheres.
struct RadialProfile {
    ProfileFunction a;
    double r_lo = 0.0;
    double r_hi = 1.0;
    std::string name = "custom";

    bool has_center() const;  // a(r_lo) == 0

    static RadialProfile flat_ball();             // a(r) = r on [0, 1]
    static RadialProfile cap(double radius);      // a(r) = sin r on [0, radius]
    static RadialProfile annulus(double r0, double r1);  // a(r) = r on [r0, r1]
    static RadialProfile product(double scale);   // a == scale on [0, 1]
    static RadialProfile parse(const std::string& spec);  // "flatball", "cap:r", ...
};

/// Discretized conformal-Laplacian eigenvalue problem with natural Robin
/// boundary data fixed by the background's mean curvature:
///   (4 (n-1)/(n-2) Lap + scal) phi = lambda phi,
///   d phi/d nu = ((n-2)/2) H phi on the boundary,
/// reduced to the radial line. The operator is assembled in variational
/// form K phi = lambda M phi with positive diagonal mass M; K is
/// symmetric tridiagonal, so the discrete Rayleigh quotient of an
/// eigenvector reproduces its eigenvalue exactly.
class RobinProblem {
public:
    int n = 3;                    // ambient dimension, >= 3
    RadialProfile profile;
    int N = 0;                    // grid intervals; N+1 nodes
    std::vector<double> r;        // nodes, r[0] = r_lo, r[N] = r_hi
    std::vector<double> mass;     // positive volume weights per node
    std::vector<double> scal;     // background scalar curvature per node
    double H_outer = 0.0;         // mean curvature at r_hi (interior normal)
    double H_inner = 0.0;         // at r_lo, annulus only

    std::vector<double> K_diag;   // stiffness tridiagonal
    std::vector<double> K_off;    // K_off[i] couples nodes i, i+1

    double dr() const { return (profile.r_hi - profile.r_lo) / N; }
    /// Worst asymmetry of M^-1 K in the mass inner product (exact zero by
    /// construction up to rounding).
    double symmetry_residual() const;
    /// y = K x
    std::vector<double> apply_K(const std::vector<double>& x) const;
};

RobinProblem assemble(int n, const RadialProfile& profile, int N);

struct Eigenpair {
    double lambda = 0.0;
    std::vector<double> phi;      // positive, mass-normalized sum w phi^2 = 1
    double residual = 0.0;        // relative eigen-residual
};

/// Principal eigenpair by shifted inverse iteration (tridiagonal solves,
/// all-ones start, deterministic). Positivity of the eigenvector is
/// asserted, not assumed; a sign-indefinite result signals a
/// discretization bug and throws.
Eigenpair first_eigenpair(const RobinProblem& p);

/// Discrete Rayleigh quotient with the same quadrature as the assembly.
double rayleigh(const RobinProblem& p, const std::vector<double>& phi);

/// Conformal rescale by phi^{4/(n-2)} and its verification data.
struct ConformalResult {
    std::vector<double> scal_hat;      // recomputed from the deformed profile
    std::vector<double> identity_rhs;  // lambda phi^{4/(2-n)}
    double identity_rel_err = 0.0;     // between the two routes, interior nodes
    double H_hat_outer = 0.0;
    double H_hat_inner = 0.0;
    double min_scal_hat = 0.0;
    std::size_t skipped_center_nodes = 0;

    nlohmann::ordered_json to_json() const;
};

/// Applies the conformal change for a positive function phi with eigenvalue
/// lambda and cross-checks scal_hat = lambda phi^{4/(2-n)} (finite
/// differences on the deformed warped profile) plus the vanishing of the
/// boundary mean curvature.
ConformalResult conformal_change(const RobinProblem& p, const std::vector<double>& phi,
                                 double lambda);

} // namespace collarcurv
