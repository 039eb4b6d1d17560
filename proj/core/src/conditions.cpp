#include "collarcurv/conditions.hpp"

#include <cmath>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

constexpr double kTol = 1e-10;

/// Worst C0 residual between the metric's slices and a quadratic model
/// g0 - 2 t h - C t^2 g0 on [0, window], all derivative orders <= 4.
double model_residual(const CollarMetric& cm, const SymTensorField& g0,
                      const SymTensorField& h, double C, double window) {
    // jet at t = 0: orders 0..4 of the model are g0, -2h, -2C g0, 0, 0
    const SymTensorField model_jets[5] = {g0, h.scaled(-2.0), g0.scaled(-2.0 * C),
                                          SymTensorField::isotropic(g0.dim(), 0.0),
                                          SymTensorField::isotropic(g0.dim(), 0.0)};
    double worst = 0.0;
    for (int d = 0; d <= 4; ++d) {
        SymTensorField diff = cm.slice(0.0, d) - model_jets[d];
        worst = std::max(worst, diff.norm_against(g0));
    }
    if (window > 0.0) {
        const int samples = 65;
        double w = std::min(window, cm.t_max() * 0.999999);
        for (int i = 1; i < samples; ++i) {
            double t = w * i / (samples - 1);
            SymTensorField model = g0 + h.scaled(-2.0 * t) + g0.scaled(-C * t * t);
            SymTensorField diff = cm.slice(t) - model;
            worst = std::max(worst, diff.norm_against(g0));
        }
    }
    return worst;
}

} // namespace

std::string BoundaryCondition::name() const {
    switch (kind) {
        case Kind::MeanAtLeast: return "H>=" + std::to_string(h0);
        case Kind::MeanEquals: return "H=" + std::to_string(h0);
        case Kind::FormAtLeastScalar: return "II>=" + std::to_string(h0) + "*g0";
        case Kind::FormEqualsScalar: return "II=" + std::to_string(h0) + "*g0";
        case Kind::FormAtLeast: return "II>=k";
        case Kind::FormEquals: return "II=k";
        case Kind::CNormal: return "c-normal(C=" + std::to_string(C) + ")";
        case Kind::ConeType: return "cone(h0=" + std::to_string(h0) + ")";
        case Kind::Doubling: return "doubling";
    }
    return "?";
}

BoundaryCondition BoundaryCondition::parse(const std::string& text) {
    BoundaryCondition c;
    auto starts = [&](const char* p) { return text.rfind(p, 0) == 0; };
    if (text == "doubling") {
        c.kind = Kind::Doubling;
    } else if (starts("c-normal:")) {
        c.kind = Kind::CNormal;
        c.C = std::stod(text.substr(9));
    } else if (starts("cone:")) {
        c.kind = Kind::ConeType;
        c.h0 = std::stod(text.substr(5));
    } else if (starts("H>=")) {
        c.kind = Kind::MeanAtLeast;
        c.h0 = std::stod(text.substr(3));
    } else if (starts("H=")) {
        c.kind = Kind::MeanEquals;
        c.h0 = std::stod(text.substr(2));
    } else if (starts("II>=")) {
        c.kind = Kind::FormAtLeastScalar;
        c.h0 = std::stod(text.substr(4));
    } else if (starts("II=")) {
        c.kind = Kind::FormEqualsScalar;
        c.h0 = std::stod(text.substr(3));
    } else {
        throw PreconditionError("unknown boundary condition: " + text);
    }
    return c;
}

CheckResult check_boundary_condition(const CollarMetric& cm, const BoundaryCondition& cond) {
    CheckResult res;
    res.name = cond.name();
    const SymTensorField g0 = cm.boundary_metric();
    const int n1 = cm.n() - 1;

    switch (cond.kind) {
        case BoundaryCondition::Kind::MeanAtLeast:
        case BoundaryCondition::Kind::MeanEquals: {
            std::vector<double> H = mean_curvature(cm, 0.0);
            if (cond.kind == BoundaryCondition::Kind::MeanAtLeast) {
                double margin = std::numeric_limits<double>::infinity();
                for (double v : H) margin = std::min(margin, v - cond.h0);
                res.residual = margin;
                res.pass = margin >= -kTol;
            } else {
                double worst = 0.0;
                for (double v : H) worst = std::max(worst, std::abs(v - cond.h0));
                res.residual = worst;
                res.pass = worst <= kTol;
            }
            break;
        }
        case BoundaryCondition::Kind::FormAtLeastScalar:
        case BoundaryCondition::Kind::FormAtLeast: {
            SymTensorField k = cond.k ? *cond.k : g0.scaled(cond.h0);
            SymTensorField diff = second_fundamental_form(cm, 0.0) - k;
            res.residual = diff.min_eigenvalue_against(g0);
            res.pass = res.residual >= -kTol;
            break;
        }
        case BoundaryCondition::Kind::FormEqualsScalar:
        case BoundaryCondition::Kind::FormEquals: {
            SymTensorField k = cond.k ? *cond.k : g0.scaled(cond.h0);
            SymTensorField diff = second_fundamental_form(cm, 0.0) - k;
            res.residual = diff.norm_against(g0);
            res.pass = res.residual <= kTol;
            break;
        }
        case BoundaryCondition::Kind::CNormal: {
            SymTensorField h = second_fundamental_form(cm, 0.0);
            res.residual = model_residual(cm, g0, h, cond.C, cond.window);
            res.pass = res.residual <= kTol;
            break;
        }
        case BoundaryCondition::Kind::ConeType: {
            // (1 - t h0)^2 g0 = g0 - 2 t (h0 g0) + h0^2 t^2 g0, i.e. the
            // quadratic model with h = h0 g0 and C = -h0^2
            res.residual =
                model_residual(cm, g0, g0.scaled(cond.h0), -cond.h0 * cond.h0, cond.window);
            res.pass = res.residual <= kTol;
            break;
        }
        case BoundaryCondition::Kind::Doubling: {
            double worst = 0.0;
            for (int d : {1, 3}) worst = std::max(worst, cm.slice(0.0, d).norm_against(g0));
            res.residual = worst;
            res.pass = worst <= kTol;
            break;
        }
    }
    (void)n1;
    return res;
}

} // namespace collarcurv
