#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace collarcurv {

/// Field of symmetric bilinear forms on the boundary.
///
/// Two backends:
///  - Isotropic: a scalar multiple of the reference metric (the unit round
///    metric on a sphere boundary, the flat coordinate metric on a torus).
///    One logical node; broadcasts against grid fields.
///  - Grid: one symmetric dim x dim matrix per node, components taken in
///    the reference orthonormal frame / coordinate frame.
///
/// Matrices are symmetrized on construction; asymmetry above 1e-9 is an
/// input error, below it is silently projected.
class SymTensorField {
public:
    static constexpr double kAsymmetryTolerance = 1e-9;

    static SymTensorField isotropic(int dim, double scale);
    static SymTensorField grid(std::vector<Eigen::MatrixXd> values);

    bool is_isotropic() const { return iso_; }
    int dim() const { return dim_; }
    std::size_t nodes() const { return iso_ ? 1 : values_.size(); }
    double iso_scale() const;

    /// Matrix at a node (isotropic fields broadcast to any node index).
    Eigen::MatrixXd at(std::size_t node) const;

    SymTensorField scaled(double c) const;
    SymTensorField operator+(const SymTensorField& o) const;
    SymTensorField operator-(const SymTensorField& o) const;

    /// Exact value equality (same backend not required; isotropic compares
    /// against scale * identity).
    bool same_values(const SymTensorField& o, double tol = 0.0) const;

    bool positive_definite() const;
    /// Smallest eigenvalue of the field in the frame of `g` (g-normalized),
    /// minimized over nodes. Decides bilinear-form inequalities.
    double min_eigenvalue_against(const SymTensorField& g) const;
    /// Frobenius norm in a g-orthonormal frame, maximized over nodes.
    double norm_against(const SymTensorField& g) const;
    /// Largest absolute entry in the reference frame, over all nodes.
    double max_abs() const;

    nlohmann::json to_json() const;
    static SymTensorField from_json(const nlohmann::json& j);

private:
    SymTensorField() = default;
    bool iso_ = true;
    int dim_ = 1;
    double scale_ = 0.0;                   // isotropic backend
    std::vector<Eigen::MatrixXd> values_;  // grid backend
};

/// Per-node trace of h with respect to g: sum of h over a g-orthonormal
/// basis. Result has one entry per node (one entry for isotropic pairs).
std::vector<double> trace_against(const SymTensorField& g, const SymTensorField& h);

struct TraceComparison {
    double lhs;   // |tr_{g1} h - tr_{g0} h|, worst node
    double rhs;   // 2 ||g1 - g0||_{g0} ||h||_{g0}, at the same node
    bool pass;
};

/// Checks the trace-comparison bound node by node. Requires
/// ||g1 - g0||_{g0} <= 1/2 at every node; violation is a precondition
/// error, not a failed check.
TraceComparison trace_comparison_check(const SymTensorField& g0, const SymTensorField& g1,
                                       const SymTensorField& h);

namespace tensor_ops {
/// Cholesky-based helpers shared by collar curvature code.
double norm_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);
double min_eig_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);
double trace_in_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);
} // namespace tensor_ops

} // namespace collarcurv
