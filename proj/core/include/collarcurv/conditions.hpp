#pragma once

#include <optional>
#include <string>

#include "collarcurv/collar.hpp"
#include "collarcurv/report.hpp"

namespace collarcurv {

/// Boundary condition to test against a collar metric at t = 0.
/// Inequalities of bilinear forms are decided by the smallest eigenvalue of
/// the g0-normalized difference; ties at 0 count as pass for ">=".
struct BoundaryCondition {
    enum class Kind {
        MeanAtLeast,        // H >= h0
        MeanEquals,         // H = h0
        FormAtLeastScalar,  // II >= h0 * g0
        FormEqualsScalar,   // II = h0 * g0
        FormAtLeast,        // II >= k
        FormEquals,         // II = k
        CNormal,            // slices follow the normalized quadratic form with constant C
        ConeType,           // slices follow dt^2 + (1 - t h0)^2 g0 near t = 0
        Doubling            // odd t-derivatives of the slice vanish at t = 0
    };

    Kind kind = Kind::Doubling;
    double h0 = 0.0;
    double C = 0.0;
    std::optional<SymTensorField> k;
    /// For CNormal/ConeType: also sample value residuals on [0, window].
    /// window = 0 checks the 4-jet at t = 0 only.
    double window = 0.0;

    std::string name() const;

    /// Parses CLI strings: "H>=h0", "H=h0", "II>=h0", "II=h0",
    /// "c-normal:C", "cone:h0", "doubling" (h0, C numeric literals).
    static BoundaryCondition parse(const std::string& text);
};

/// Evaluates the condition. For inequalities `residual` is the margin
/// (negative = violated); for equalities and jet conditions it is the
/// worst absolute residual. Tolerance 1e-10 decides `pass`.
CheckResult check_boundary_condition(const CollarMetric& cm, const BoundaryCondition& cond);

} // namespace collarcurv
