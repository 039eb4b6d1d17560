#include "collarcurv/collar.hpp"

#include <cmath>

#include "collarcurv/errors.hpp"

namespace collarcurv {

CollarMetric::CollarMetric(BoundaryGeometry geometry, double t_max,
                           std::vector<CollarTerm> terms)
    : geometry_(std::move(geometry)), t_max_(t_max), terms_(std::move(terms)) {
    if (t_max_ <= 0) throw PreconditionError("collar metric: t_max must be positive");
    if (terms_.empty()) throw PreconditionError("collar metric: no terms");
    for (const auto& term : terms_) geometry_.require_compatible(term.tensor);
}

SymTensorField CollarMetric::slice(double t, int deriv, Side side) const {
    if (t < 0.0 || t >= t_max_)
        throw PreconditionError("collar metric: t out of [0, t_max)");
    SymTensorField acc = terms_[0].tensor.scaled(terms_[0].profile.derivative(t, deriv, side));
    for (std::size_t j = 1; j < terms_.size(); ++j)
        acc = acc + terms_[j].tensor.scaled(terms_[j].profile.derivative(t, deriv, side));
    return acc;
}

nlohmann::json CollarMetric::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& term : terms_)
        terms.push_back({{"profile", term.profile.to_json()}, {"tensor", term.tensor.to_json()}});
    return {{"geometry", geometry_.to_json()}, {"t_max", t_max_}, {"terms", terms}};
}

CollarMetric CollarMetric::from_json(const nlohmann::json& j) {
    BoundaryGeometry g = BoundaryGeometry::from_json(j.at("geometry"));
    std::vector<CollarTerm> terms;
    for (const auto& e : j.at("terms"))
        terms.push_back({ProfileFunction::from_json(e.at("profile")),
                         SymTensorField::from_json(e.at("tensor"))});
    return CollarMetric(std::move(g), j.at("t_max").get<double>(), std::move(terms));
}

double EndoField::trace(std::size_t node) const {
    if (iso) return scale * dim;
    return mats.at(node).trace();
}

double EndoField::trace_sq(std::size_t node) const {
    if (iso) return scale * scale * dim;
    const Eigen::MatrixXd& w = mats.at(node);
    return (w * w).trace();
}

SymTensorField second_fundamental_form(const CollarMetric& cm, double t) {
    return cm.slice(t, 1).scaled(-0.5);
}

EndoField weingarten(const CollarMetric& cm, double t) {
    SymTensorField g = cm.slice(t);
    SymTensorField ii = second_fundamental_form(cm, t);
    EndoField w;
    w.dim = g.dim();
    if (g.is_isotropic() && ii.is_isotropic()) {
        if (g.iso_scale() <= 0) throw PreconditionError("weingarten: singular slice metric");
        w.iso = true;
        w.scale = ii.iso_scale() / g.iso_scale();
        return w;
    }
    w.iso = false;
    std::size_t n = std::max(g.nodes(), ii.nodes());
    w.mats.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::LLT<Eigen::MatrixXd> llt(g.at(i % g.nodes()));
        if (llt.info() != Eigen::Success)
            throw PreconditionError("weingarten: singular slice metric");
        w.mats[i] = llt.solve(ii.at(i % ii.nodes()));
    }
    return w;
}

std::vector<double> mean_curvature(const CollarMetric& cm, double t) {
    EndoField w = weingarten(cm, t);
    std::size_t n = std::max(w.nodes(), cm.geometry().node_count());
    std::vector<double> out(w.iso ? 1 : n);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w.trace(i) / static_cast<double>(cm.n() - 1);
    return out;
}

std::vector<double> collar_scalar(const CollarMetric& cm, double t) {
    SymTensorField g = cm.slice(t);
    SymTensorField gdd = cm.slice(t, 2);
    EndoField w = weingarten(cm, t);
    std::vector<double> intrinsic = cm.geometry().intrinsic_scal(g);
    std::vector<double> tr2 = trace_against(g, gdd);

    std::size_t n = std::max({intrinsic.size(), tr2.size(), w.nodes()});
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double trw = w.trace(i % w.nodes());
        double trw2 = w.trace_sq(i % w.nodes());
        out[i] = intrinsic[i % intrinsic.size()] + 3.0 * trw2 - trw * trw -
                 tr2[i % tr2.size()];
    }
    return out;
}

std::vector<double> scal_lower_bound(const CollarMetric& cm, double t) {
    SymTensorField g = cm.slice(t);
    SymTensorField gdd = cm.slice(t, 2);
    SymTensorField ii = second_fundamental_form(cm, t);
    std::vector<double> intrinsic = cm.geometry().intrinsic_scal(g);
    std::vector<double> trii = trace_against(g, ii);
    std::vector<double> tr2 = trace_against(g, gdd);

    std::size_t n = std::max({intrinsic.size(), trii.size(), tr2.size()});
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double trv = trii[i % trii.size()];
        out[i] = intrinsic[i % intrinsic.size()] - trv * trv - tr2[i % tr2.size()];
    }
    return out;
}

double c1_drift(const CollarMetric& cm_a, const CollarMetric& cm_b, int t_samples) {
    if (!(cm_a.geometry() == cm_b.geometry()) || cm_a.t_max() != cm_b.t_max())
        throw PreconditionError("c1_drift: geometry or collar size mismatch");
    double worst = 0.0;
    for (int i = 0; i < t_samples; ++i) {
        double t = cm_a.t_max() * 0.999999 * i / (t_samples - 1);
        SymTensorField g = cm_a.slice(t);
        SymTensorField d0 = cm_a.slice(t) - cm_b.slice(t);
        SymTensorField d1 = cm_a.slice(t, 1) - cm_b.slice(t, 1);
        double v = d0.norm_against(g) + d1.norm_against(g) +
                   cm_a.geometry().spatial_gradient_norm(d0);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace collarcurv
