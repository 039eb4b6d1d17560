#pragma once

#include <vector>

#include <json.hpp>

#include "collarcurv/geometry.hpp"
#include "collarcurv/profile.hpp"
#include "collarcurv/tensor.hpp"

namespace collarcurv {

/// One summand p_j(t) * A_j of a collar slice family.
struct CollarTerm {
    ProfileFunction profile;
    SymTensorField tensor;
};

/// Metric dt^2 + g_t on the collar [0, t_max) x boundary, with
/// g_t = sum_j p_j(t) A_j. Slices and their first four t-derivatives are
/// exact (per-term profile derivatives); the interior unit normal at the
/// boundary is the +t direction.
class CollarMetric {
public:
    CollarMetric(BoundaryGeometry geometry, double t_max, std::vector<CollarTerm> terms);

    const BoundaryGeometry& geometry() const { return geometry_; }
    double t_max() const { return t_max_; }
    int n() const { return geometry_.ambient_dim(); }
    const std::vector<CollarTerm>& terms() const { return terms_; }

    /// d^deriv/dt^deriv g_t, combined over terms. deriv <= 4.
    SymTensorField slice(double t, int deriv = 0, Side side = Side::Right) const;

    /// Metric induced on the boundary (t = 0 slice).
    SymTensorField boundary_metric() const { return slice(0.0); }

    nlohmann::json to_json() const;
    static CollarMetric from_json(const nlohmann::json& j);

private:
    BoundaryGeometry geometry_;
    double t_max_;
    std::vector<CollarTerm> terms_;
};

/// Weingarten map W_t as an endomorphism field; isotropic slices give a
/// multiple of the identity.
struct EndoField {
    bool iso = true;
    double scale = 0.0;                    // W = scale * Id when iso
    int dim = 1;
    std::vector<Eigen::MatrixXd> mats;     // per-node otherwise

    std::size_t nodes() const { return iso ? 1 : mats.size(); }
    double trace(std::size_t node) const;
    double trace_sq(std::size_t node) const;  // tr(W^2)
};

/// II_t = -(1/2) d/dt g_t, exactly.
SymTensorField second_fundamental_form(const CollarMetric& cm, double t);

/// W_t with <W_t X, Y>_{g_t} = II_t(X, Y).
EndoField weingarten(const CollarMetric& cm, double t);

/// H_t = tr(W_t) / (n-1), one value per node.
std::vector<double> mean_curvature(const CollarMetric& cm, double t);

/// Ambient scalar curvature on the level set at distance t:
/// scal_{g_t} + 3 tr(W_t^2) - tr(W_t)^2 - tr_{g_t}(g''_t).
std::vector<double> collar_scalar(const CollarMetric& cm, double t);

/// Certified lower bound scal_{g_t} - tr_{g_t}(II_t)^2 - tr_{g_t}(g''_t);
/// always <= collar_scalar pointwise.
std::vector<double> scal_lower_bound(const CollarMetric& cm, double t);

/// Max over a sample grid of ||a-b|| + ||d(a-b)|| measured in cm_a's metric;
/// t-derivatives exact, boundary derivatives via the geometry backend.
double c1_drift(const CollarMetric& cm_a, const CollarMetric& cm_b, int t_samples = 129);

} // namespace collarcurv
