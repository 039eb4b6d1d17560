#pragma once

#include <vector>

#include <json.hpp>

#include "collarcurv/tensor.hpp"

namespace collarcurv {

/// Boundary manifold backing a collar metric. Two kinds:
///  - round sphere S^{n-1} (reference radius 1): only isotropic fields,
///    closed-form intrinsic curvature scal(c g_round) = (n-1)(n-2)/c;
///  - flat torus T^{n-1} with given period lengths, sampled on a periodic
///    grid: full tensor fields, intrinsic curvature by second-order
///    centered differences of the Christoffel symbols.
class BoundaryGeometry {
public:
    enum class Kind { RoundSphere, FlatTorus };

    static BoundaryGeometry round_sphere(int dim);
    static BoundaryGeometry flat_torus(std::vector<double> periods, std::vector<int> resolution);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }          // boundary dimension n-1
    int ambient_dim() const { return dim_ + 1; }
    std::size_t node_count() const;
    const std::vector<double>& periods() const { return periods_; }
    const std::vector<int>& resolution() const { return resolution_; }

    bool compatible_field(const SymTensorField& f) const;
    /// Rejects fields the backend cannot host (wrong dim/node count;
    /// grid fields on a sphere boundary).
    void require_compatible(const SymTensorField& f) const;

    /// Intrinsic scalar curvature of a metric slice, one value per node.
    std::vector<double> intrinsic_scal(const SymTensorField& slice) const;

    /// Sup over nodes of the centered-difference gradient norm of the
    /// field's components (isotropic fields are spatially constant).
    /// Feeds the boundary-derivative part of C1 drift.
    double spatial_gradient_norm(const SymTensorField& f) const;

    bool operator==(const BoundaryGeometry& o) const;

    nlohmann::json to_json() const;
    static BoundaryGeometry from_json(const nlohmann::json& j);

    /// Grid node coordinates (torus backend), row-major over axes.
    std::vector<double> node_coords(std::size_t node) const;

private:
    Kind kind_ = Kind::RoundSphere;
    int dim_ = 2;
    std::vector<double> periods_;
    std::vector<int> resolution_;
};

} // namespace collarcurv
