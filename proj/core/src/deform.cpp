#include "collarcurv/deform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "collarcurv/cutoffs.hpp"
#include "collarcurv/errors.hpp"
#include "collarcurv/taper.hpp"

namespace collarcurv {

namespace {

constexpr double kExactTol = 1e-10;

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Correction terms grouped by tensor, isotropic parts canonicalized to a
/// unit reference multiple so equal directions coalesce exactly.
class CorrectionBuilder {
public:
    explicit CorrectionBuilder(int dim) : dim_(dim) {}

    void add_isotropic(double coeff, double field_scale) { iso_coeff_ += coeff * field_scale; }

    void add_grid(double coeff, const SymTensorField& field) {
        for (std::size_t i = 0; i < grid_fields_.size(); ++i) {
            if (grid_fields_[i].same_values(field)) {
                grid_coeffs_[i] += coeff;
                return;
            }
        }
        grid_fields_.push_back(field);
        grid_coeffs_.push_back(coeff);
    }

    void add(double coeff, const SymTensorField& field) {
        if (field.is_isotropic())
            add_isotropic(coeff, field.iso_scale());
        else
            add_grid(coeff, field);
    }

    /// Emit terms profile(t) * coeff * field; zero coefficients pruned.
    void emit(const ProfileFunction& profile, std::vector<CollarTerm>& out) const {
        if (iso_coeff_ != 0.0)
            out.push_back({profile.scaled(iso_coeff_), SymTensorField::isotropic(dim_, 1.0)});
        for (std::size_t i = 0; i < grid_fields_.size(); ++i)
            if (grid_coeffs_[i] != 0.0)
                out.push_back({profile.scaled(grid_coeffs_[i]), grid_fields_[i]});
    }

    bool empty() const {
        if (iso_coeff_ != 0.0) return false;
        for (double c : grid_coeffs_)
            if (c != 0.0) return false;
        return true;
    }

private:
    int dim_;
    double iso_coeff_ = 0.0;
    std::vector<SymTensorField> grid_fields_;
    std::vector<double> grid_coeffs_;
};

void require_same_shape(const MetricFamily& family) {
    if (family.size() == 0) throw PreconditionError("empty metric family");
    if (family.index.size() != family.size())
        throw PreconditionError("family index / metric count mismatch");
    for (const auto& cm : family.metrics) {
        if (!(cm.geometry() == family.metrics[0].geometry()) ||
            cm.t_max() != family.metrics[0].t_max())
            throw PreconditionError("family members differ in geometry or collar size");
    }
}

/// Precondition sweep: every family member has scal > sigma.
void require_margin(const MetricFamily& family, const SigmaBound& sigma,
                    const SweepOptions& sweep, const char* who) {
    ScheduleStage st;
    st.base = family.metrics;
    st.corrections.assign(family.size(), {});
    SweepOptions o = sweep;
    o.stability_check = false;
    SweepResult r = sweep_stage(family.index, st, sigma, o);
    if (!r.positive_definite || r.min_margin <= 0.0) {
        std::ostringstream os;
        os << who << ": input family violates scal > sigma (margin " << r.min_margin
           << " at xi=" << r.worst.xi << ", t=" << r.worst.t << ")";
        throw PreconditionError(os.str());
    }
}

SweepResult final_verify(DeformationSchedule& schedule, const SweepOptions& opts) {
    SweepResult r = sweep_schedule(schedule, opts);
    VerificationReport& rep = schedule.report();
    rep.min_margin = r.min_margin;
    rep.worst = r.worst;
    rep.sampling = {{"s_samples", opts.s_samples},
                    {"t_samples", opts.t_samples},
                    {"refine_regions", opts.refine_regions},
                    {"stability_checked", opts.stability_check},
                    {"samples", r.samples}};
    rep.checks.push_back({"strict margin scal > sigma", r.min_margin > 0.0, r.min_margin});
    rep.checks.push_back({"slices positive definite", r.positive_definite, 0.0});
    if (opts.stability_check)
        rep.checks.push_back({"verdict stable at doubled sampling", r.stable, 0.0});
    return r;
}

/// Residual of boundary 1-jet constancy + derivative interpolation laws
/// over the s-grid. `law` maps (s, order) to the expected slice derivative.
void check_jet_law(DeformationSchedule& schedule, const std::string& name, int order,
                   const std::function<SymTensorField(std::size_t, double)>& expected) {
    double worst = 0.0;
    for (std::size_t xi = 0; xi < schedule.index().size(); ++xi) {
        SymTensorField g0 = schedule.metric_at(xi, 0.0).boundary_metric();
        for (int i = 0; i <= 16; ++i) {
            double s = i / 16.0;
            SymTensorField got = schedule.metric_at(xi, s).slice(0.0, order);
            worst = std::max(worst, (got - expected(xi, s)).norm_against(g0));
        }
    }
    schedule.report().checks.push_back({name, worst <= kExactTol, worst});
}

void check_identity_outside(DeformationSchedule& schedule, double support) {
    double worst = 0.0;
    for (std::size_t xi = 0; xi < schedule.index().size(); ++xi) {
        CollarMetric g = schedule.metric_at(xi, 0.0);
        SymTensorField g0 = g.boundary_metric();
        double t_max = g.t_max();
        if (support >= t_max) continue;
        for (int i = 0; i <= 8; ++i) {
            double t = support + (t_max * 0.999999 - support) * i / 8.0;
            for (double s : {0.25, 0.5, 1.0}) {
                SymTensorField diff = schedule.metric_at(xi, s).slice(t) - g.slice(t);
                worst = std::max(worst, diff.norm_against(g0));
            }
        }
    }
    schedule.report().checks.push_back({"identity outside support", worst <= kExactTol, worst});
}

std::string family_digest(const MetricFamily& family, const nlohmann::ordered_json& params) {
    nlohmann::ordered_json j;
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& cm : family.metrics) metrics.push_back(cm.to_json());
    j["metrics"] = metrics;
    j["params"] = params;
    return digest_hex(j.dump());
}

} // namespace

double normalization_constant(const MetricFamily& family) {
    require_same_shape(family);
    double worst = 0.0;
    for (const auto& cm : family.metrics) {
        SymTensorField g0 = cm.boundary_metric();
        worst = std::max(worst, max_abs(trace_against(g0, cm.slice(0.0, 2))));
    }
    int n = family.metrics[0].n();
    return worst / (2.0 * (n - 1));
}

double normal_form_threshold(const BoundaryGeometry& geometry, const SymTensorField& g0,
                             const SymTensorField& h, const SigmaBound& sigma) {
    geometry.require_compatible(g0);
    if (!g0.positive_definite())
        throw PreconditionError("normal_form_threshold: g0 not positive definite");
    const int n = geometry.ambient_dim();
    std::vector<double> intrinsic = geometry.intrinsic_scal(g0);
    // Weingarten data of the prescribed second fundamental form
    std::size_t nodes = std::max({intrinsic.size(), g0.nodes(), h.nodes()});
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
        Eigen::MatrixXd G = g0.at(i % g0.nodes());
        Eigen::MatrixXd W = Eigen::LLT<Eigen::MatrixXd>(G).solve(h.at(i % h.nodes()));
        double trw = W.trace();
        double trw2 = (W * W).trace();
        double val = intrinsic[i % intrinsic.size()] - sigma.at(i) + 3.0 * trw2 - trw * trw;
        worst = std::max(worst, val);
    }
    return -worst / (2.0 * (n - 1));
}

CollarMetric make_normal_collar(const BoundaryGeometry& geometry, const SymTensorField& g0,
                                const SymTensorField& h, double C, double t_max) {
    std::vector<CollarTerm> terms;
    terms.push_back({ProfileFunction::constant(1.0), g0});
    if (h.max_abs() != 0.0) terms.push_back({ProfileFunction::polynomial({0.0, -2.0}), h});
    if (C != 0.0) terms.push_back({ProfileFunction::polynomial({0.0, 0.0, -C}), g0});
    CollarMetric cm(geometry, t_max, std::move(terms));
    // positivity over a sample grid; suggest a shrunk collar on failure
    for (int i = 128; i >= 1; --i) {
        double t = t_max * 0.999999 * i / 128;
        if (!cm.slice(t).positive_definite()) {
            double ok = t_max;
            for (int j = i; j >= 1; --j) {
                double tt = t_max * 0.999999 * j / 128;
                if (cm.slice(tt).positive_definite()) break;
                ok = tt;
            }
            std::ostringstream os;
            os << "normal collar: slice not positive definite at t=" << t
               << "; shrink t_max below " << ok;
            throw PreconditionError(os.str());
        }
    }
    return cm;
}

double normal_form_residual(const CollarMetric& cm, const SymTensorField& h, double C,
                            double window) {
    BoundaryCondition cond;
    cond.kind = BoundaryCondition::Kind::CNormal;
    cond.C = C;
    cond.window = window;
    (void)h;
    return check_boundary_condition(cm, cond).residual;
}

double exact_normal_zone(const CollarMetric& cm, double C) {
    SymTensorField h = second_fundamental_form(cm, 0.0);
    double w = cm.t_max() * 0.5;
    for (int i = 0; i < 60; ++i) {
        if (normal_form_residual(cm, h, C, w) <= 1e-12) return w;
        w *= 0.5;
    }
    return 0.0;
}

std::optional<double> detect_normal_constant(const CollarMetric& cm) {
    SymTensorField g0 = cm.boundary_metric();
    SymTensorField gdd = cm.slice(0.0, 2);
    const int n1 = cm.n() - 1;
    std::vector<double> tr = trace_against(g0, gdd);
    double C = -tr[0] / (2.0 * n1);
    for (double v : tr)
        if (std::abs(-v / (2.0 * n1) - C) > kExactTol) return std::nullopt;
    // g''_0 must actually be -2C g0, not merely have the right trace
    SymTensorField resid = gdd - g0.scaled(-2.0 * C);
    if (resid.norm_against(g0) > kExactTol) return std::nullopt;
    return C;
}

namespace {

struct NormalizeAttempt {
    ScheduleStage stage;
    double support = 0.0;
    double eta = 0.0;
    double quad_zone = 0.0;
    bool trivial = false;
};

/// Builds the normalization stage for given blend parameters. Corrections:
///   -u [ q(t) (g''_0/2 + C g0) + bump(t) R_t ]
/// with R_t the second-order Taylor remainder of the slice family.
NormalizeAttempt build_normalize_stage(const MetricFamily& family, double C, double support,
                                       double eta) {
    auto taper = make_jet_taper(support, eta);
    if (!taper) throw VerificationError("jet taper infeasible at eta=" + std::to_string(eta));
    ProfileFunction bump = remainder_bump(support);

    NormalizeAttempt out;
    out.support = support;
    out.eta = eta;
    out.quad_zone = taper->quad_zone;
    out.stage.base = family.metrics;
    out.stage.corrections.resize(family.size());
    bool all_trivial = true;

    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        const CollarMetric& g = family.at(xi);
        const int dim = g.geometry().dim();
        CorrectionBuilder quad(dim);
        SymTensorField g0 = g.boundary_metric();
        quad.add(C, g0);
        std::vector<CollarTerm> corr;
        for (const auto& term : g.terms()) {
            quad.add(0.5 * term.profile.derivative(0.0, 2), term.tensor);
            ProfileFunction rem = term.profile.minus_jet2();
            if (!rem.is_zero())
                corr.push_back({(bump * rem).scaled(-1.0), term.tensor});
        }
        std::vector<CollarTerm> quad_terms;
        quad.emit(taper->q, quad_terms);
        for (auto& t : quad_terms)
            corr.push_back({t.profile.scaled(-1.0), t.tensor});
        if (!corr.empty()) all_trivial = false;
        out.stage.corrections[xi] = std::move(corr);
    }
    out.trivial = all_trivial;
    return out;
}

bool accept_normalize(const FamilyIndex& index, const ScheduleStage& stage,
                      const SigmaBound& sigma, double support, double eps_slack,
                      const SweepOptions& base) {
    SweepOptions o = base;
    o.stability_check = false;
    o.refine_regions.push_back(support);
    SigmaBound relaxed = sigma;
    relaxed.constant -= eps_slack;
    if (relaxed.field)
        for (double& v : *relaxed.field) v -= eps_slack;
    SweepResult global = sweep_stage(index, stage, relaxed, o);
    if (!global.positive_definite || global.min_margin <= 0.0) return false;
    if (eps_slack > 0.0) {
        SweepOptions inner = o;
        inner.t_cap = 0.5 * support;
        SweepResult in = sweep_stage(index, stage, sigma, inner);
        if (!in.positive_definite || in.min_margin <= 0.0) return false;
    }
    return true;
}

} // namespace

DeformationSchedule c_normalize(const MetricFamily& family, SigmaBound sigma, double C,
                                const NormalizeOptions& opts) {
    require_same_shape(family);
    require_margin(family, sigma, opts.sweep, "c_normalize");

    const double t_max = family.metrics[0].t_max();
    double support0 = std::min(opts.support, t_max * 0.999);

    // probe at the initial parameters to detect the trivial case before
    // enforcing the threshold precondition
    NormalizeAttempt probe = build_normalize_stage(family, C, support0, opts.eta0);
    const double c0 = normalization_constant(family);
    if (!probe.trivial && C < c0 - kExactTol)
        throw PreconditionError("c_normalize: C = " + std::to_string(C) +
                                " below the normalization constant " + std::to_string(c0));

    NormalizeAttempt chosen;
    bool found = false;
    double support = support0;
    for (int i = 0; i <= opts.max_halvings && !found; ++i, support *= 0.5) {
        double eta = opts.eta0;
        for (int j = 0; j <= opts.max_halvings; ++j, eta *= 0.5) {
            NormalizeAttempt att;
            try {
                att = build_normalize_stage(family, C, support, eta);
            } catch (const VerificationError&) {
                continue;
            }
            if (att.trivial ||
                accept_normalize(family.index, att.stage, sigma, support, opts.eps_slack,
                                 opts.sweep)) {
                chosen = std::move(att);
                found = true;
                break;
            }
        }
        if (found || probe.trivial) break;
    }
    if (!found) {
        std::ostringstream os;
        os << "c_normalize: verification budget exhausted (C=" << C
           << ", support halved " << opts.max_halvings << " times from " << support0 << ")";
        throw VerificationError(os.str());
    }

    chosen.stage.s_lo = 0.0;
    chosen.stage.s_hi = 1.0;
    DeformationSchedule schedule(family.index, {chosen.stage}, sigma);
    schedule.constants() = {{"C", C},
                            {"C0", c0},
                            {"support", chosen.support},
                            {"eta", chosen.eta},
                            {"quad_zone", chosen.quad_zone},
                            {"eps_slack", opts.eps_slack}};
    schedule.endpoint_tags() = {"c-normal"};
    schedule.report().inputs_digest = family_digest(
        family, {{"op", "c-normalize"}, {"C", C}, {"sigma", sigma.constant}});
    schedule.report().constants = schedule.constants();

    SweepOptions fin = opts.sweep;
    fin.refine_regions.push_back(chosen.support);
    final_verify(schedule, fin);

    // 1-jet preserved exactly, all s
    check_jet_law(schedule, "boundary metric constant in s", 0,
                  [&](std::size_t xi, double) { return family.at(xi).boundary_metric(); });
    check_jet_law(schedule, "second fundamental form constant in s", 1,
                  [&](std::size_t xi, double) { return family.at(xi).slice(0.0, 1); });
    check_jet_law(schedule, "g''_0 interpolates (1-s) g''_0 - 2sC g0", 2,
                  [&](std::size_t xi, double s) {
                      const CollarMetric& g = family.at(xi);
                      return g.slice(0.0, 2).scaled(1.0 - s) +
                             g.boundary_metric().scaled(-2.0 * s * C);
                  });
    for (int l : {3, 4})
        check_jet_law(schedule, "order-" + std::to_string(l) + " derivative scales by (1-s)", l,
                      [&, l](std::size_t xi, double s) {
                          return family.at(xi).slice(0.0, l).scaled(1.0 - s);
                      });
    check_identity_outside(schedule, chosen.support);
    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        double resid = normal_form_residual(schedule.endpoint(xi),
                                            second_fundamental_form(family.at(xi), 0.0), C,
                                            chosen.trivial ? 0.0 : chosen.quad_zone);
        schedule.report().checks.push_back(
            {"endpoint in normal form (xi=" + family.index.labels[xi] + ")",
             resid <= kExactTol, resid});
    }
    if (!schedule.report().all_pass())
        throw VerificationError("c_normalize: final verification failed:\n" +
                                schedule.report().to_string());
    return schedule;
}

namespace {

struct BendCore {
    ScheduleStage stage;
    double delta = 0.0;
    double linear_zone = 0.0;
};

/// Single bend attempt at fixed C: delta halving only.
std::optional<BendCore> bend_core(const MetricFamily& family, const TensorFamily& k,
                                  const SigmaBound& sigma, double C, double zone,
                                  const BendOptions& opts) {
    const double t_max = family.metrics[0].t_max();
    double delta = std::min({0.5, zone * zone, 1.0 / (C * C), t_max * t_max * 0.25});
    for (int i = 0; i <= opts.max_delta_halvings; ++i, delta *= 0.5) {
        CutoffFamily cf = make_cutoff_family(delta);
        BendCore core;
        core.delta = delta;
        core.linear_zone = cf.linear_zone;
        core.stage.base = family.metrics;
        core.stage.corrections.resize(family.size());
        for (std::size_t xi = 0; xi < family.size(); ++xi) {
            SymTensorField dh = second_fundamental_form(family.at(xi), 0.0) - k.at(xi);
            if (dh.max_abs() == 0.0) continue;
            core.stage.corrections[xi].push_back({cf.cutoff.scaled(2.0), dh});
        }
        SweepOptions o = opts.sweep;
        o.stability_check = false;
        o.refine_regions.push_back(std::sqrt(delta));
        o.refine_regions.push_back(delta);
        SweepResult r = sweep_stage(family.index, core.stage, sigma, o);
        if (r.positive_definite && r.min_margin > 0.0) return core;
    }
    return std::nullopt;
}

void check_bend_laws(DeformationSchedule& schedule, const MetricFamily& input,
                     const TensorFamily& k, double s_lo, double s_hi) {
    // second fundamental form interpolates (1-u) h + u k on the bend range
    double worst = 0.0;
    for (std::size_t xi = 0; xi < input.size(); ++xi) {
        SymTensorField g0 = input.at(xi).boundary_metric();
        SymTensorField h = second_fundamental_form(input.at(xi), 0.0);
        for (int i = 0; i <= 16; ++i) {
            double s = s_lo + (s_hi - s_lo) * i / 16.0;
            double u = (s - s_lo) / (s_hi - s_lo);
            SymTensorField expect = h.scaled(1.0 - u) + k.at(xi).scaled(u);
            SymTensorField got =
                second_fundamental_form(schedule.metric_at(xi, s), 0.0);
            worst = std::max(worst, (got - expect).norm_against(g0));
        }
    }
    schedule.report().checks.push_back(
        {"II interpolates (1-u) h + u k exactly", worst <= kExactTol, worst});
}

} // namespace

DeformationSchedule bend_second_form(const MetricFamily& family, const TensorFamily& k,
                                     SigmaBound sigma, const BendOptions& opts) {
    require_same_shape(family);
    if (k.size() != family.size())
        throw PreconditionError("bend: target family size mismatch");

    // inputs must be normal-form metrics sharing one constant
    std::optional<double> C0 = detect_normal_constant(family.at(0));
    if (!C0) throw PreconditionError("bend: input is not in normal form");
    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        std::optional<double> Ci = detect_normal_constant(family.at(xi));
        if (!Ci || std::abs(*Ci - *C0) > kExactTol)
            throw PreconditionError("bend: family members have different normal constants");
        SymTensorField h = second_fundamental_form(family.at(xi), 0.0);
        if (normal_form_residual(family.at(xi), h, *C0, 0.0) > kExactTol)
            throw PreconditionError("bend: input jets do not follow the normal form");
    }
    // strict trace precondition, tolerance 0
    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        SymTensorField g0 = family.at(xi).boundary_metric();
        SymTensorField h = second_fundamental_form(family.at(xi), 0.0);
        std::vector<double> trh = trace_against(g0, h);
        std::vector<double> trk = trace_against(g0, k.at(xi));
        for (std::size_t i = 0; i < std::max(trh.size(), trk.size()); ++i)
            if (trh[i % trh.size()] < trk[i % trk.size()])
                throw PreconditionError(
                    "bend: trace precondition tr(h) >= tr(k) violated at node " +
                    std::to_string(i));
    }
    require_margin(family, sigma, opts.sweep, "bend");

    double C = *C0;
    double zone = opts.zone_hint > 0.0 ? opts.zone_hint : exact_normal_zone(family.at(0), C);
    if (zone <= 0.0)
        throw PreconditionError("bend: no exact normal-form zone near the boundary");

    std::optional<BendCore> core = bend_core(family, k, sigma, C, zone, opts);
    if (core) {
        core->stage.s_lo = 0.0;
        core->stage.s_hi = 1.0;
        DeformationSchedule schedule(family.index, {core->stage}, sigma);
        schedule.constants() = {{"C", C},
                                {"delta", core->delta},
                                {"support", std::sqrt(core->delta)},
                                {"zone", zone}};
        schedule.endpoint_tags() = {"c-normal", "II=k"};
        schedule.report().inputs_digest =
            family_digest(family, {{"op", "bend"}, {"sigma", sigma.constant}});
        schedule.report().constants = schedule.constants();
        SweepOptions fin = opts.sweep;
        fin.refine_regions.push_back(std::sqrt(core->delta));
        fin.refine_regions.push_back(core->delta);
        final_verify(schedule, fin);
        check_jet_law(schedule, "boundary metric constant in s", 0,
                      [&](std::size_t xi, double) { return family.at(xi).boundary_metric(); });
        check_bend_laws(schedule, family, k, 0.0, 1.0);
        check_identity_outside(schedule, std::sqrt(core->delta));
        for (std::size_t xi = 0; xi < family.size(); ++xi) {
            double resid = normal_form_residual(
                schedule.endpoint(xi), k.at(xi), C,
                std::min(zone, core->linear_zone));
            schedule.report().checks.push_back(
                {"endpoint in normal form with II=k (xi=" + family.index.labels[xi] + ")",
                 resid <= kExactTol, resid});
        }
        if (!schedule.report().all_pass())
            throw VerificationError("bend: final verification failed:\n" +
                                    schedule.report().to_string());
        return schedule;
    }

    // No delta worked: raise C by doubling and re-enter through
    // renormalization, concatenating the two stages.
    if (opts.max_c_doublings <= 0)
        throw VerificationError("bend: delta budget exhausted and C doublings exhausted");

    double C2 = 2.0 * std::max(C, 0.5);
    NormalizeOptions renorm = opts.renormalize;
    renorm.support = std::min(renorm.support, zone);
    DeformationSchedule stage1 = c_normalize(family, sigma, C2, renorm);
    MetricFamily refam;
    refam.index = family.index;
    for (std::size_t xi = 0; xi < family.size(); ++xi)
        refam.metrics.push_back(stage1.endpoint(xi));
    BendOptions next = opts;
    next.max_c_doublings = opts.max_c_doublings - 1;
    next.zone_hint = stage1.constants().value("quad_zone", 0.0);
    DeformationSchedule stage2 = bend_second_form(refam, k, sigma, next);

    std::vector<ScheduleStage> stages = stage1.stages();
    stages[0].s_lo = 0.0;
    stages[0].s_hi = 0.5;
    for (auto st : stage2.stages()) {
        st.s_lo = 0.5 + 0.5 * st.s_lo;
        st.s_hi = 0.5 + 0.5 * st.s_hi;
        stages.push_back(std::move(st));
    }
    DeformationSchedule schedule(family.index, std::move(stages), sigma);
    schedule.constants() = stage2.constants();
    schedule.constants()["C"] = stage2.constants()["C"];
    schedule.constants()["raised_from_C"] = C;
    schedule.endpoint_tags() = stage2.endpoint_tags();
    schedule.report().inputs_digest =
        family_digest(family, {{"op", "bend"}, {"sigma", sigma.constant}});
    schedule.report().constants = schedule.constants();
    SweepOptions fin = opts.sweep;
    fin.refine_regions.push_back(stage2.constants().value("support", 0.0));
    final_verify(schedule, fin);
    check_jet_law(schedule, "boundary metric constant in s", 0,
                  [&](std::size_t xi, double) { return family.at(xi).boundary_metric(); });
    check_bend_laws(schedule, refam, k, 0.5, 1.0);
    if (!schedule.report().all_pass())
        throw VerificationError("bend: verification after raising C failed:\n" +
                                schedule.report().to_string());
    return schedule;
}

DeformationSchedule master_deform(const MetricFamily& family, const TensorFamily& k,
                                  SigmaBound sigma, const MasterOptions& opts) {
    require_same_shape(family);
    if (k.size() != family.size())
        throw PreconditionError("master: target family size mismatch");

    // mean-curvature precondition tr(k)/(n-1) <= H pointwise
    const int n = family.metrics[0].n();
    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        SymTensorField g0 = family.at(xi).boundary_metric();
        std::vector<double> trk = trace_against(g0, k.at(xi));
        std::vector<double> H = mean_curvature(family.at(xi), 0.0);
        for (std::size_t i = 0; i < std::max(trk.size(), H.size()); ++i)
            if (trk[i % trk.size()] / (n - 1) > H[i % H.size()])
                throw PreconditionError(
                    "master: tr(k)/(n-1) <= H violated at node " + std::to_string(i));
    }
    require_margin(family, sigma, opts.normalize.sweep, "master");

    // starting constant: admissible for normalization and for the boundary
    // scal thresholds of both the current and the target bending data
    double C = 0.0;
    if (opts.C) {
        C = *opts.C;
    } else {
        C = normalization_constant(family);
        for (std::size_t xi = 0; xi < family.size(); ++xi) {
            const CollarMetric& g = family.at(xi);
            C = std::max(C, normal_form_threshold(g.geometry(), g.boundary_metric(),
                                                  second_fundamental_form(g, 0.0), sigma));
            C = std::max(C, normal_form_threshold(g.geometry(), g.boundary_metric(),
                                                  k.at(xi), sigma));
        }
        C += 1.0;
    }

    std::string failure;
    for (int round = 0; round <= opts.max_c_doublings; ++round, C *= 2.0) {
        DeformationSchedule stage1 = [&]() {
            return c_normalize(family, sigma, C, opts.normalize);
        }();
        MetricFamily normalized;
        normalized.index = family.index;
        for (std::size_t xi = 0; xi < family.size(); ++xi)
            normalized.metrics.push_back(stage1.endpoint(xi));

        BendOptions bopts = opts.bend;
        bopts.zone_hint = stage1.constants().value("quad_zone", 0.0);
        if (bopts.zone_hint == 0.0) bopts.zone_hint = exact_normal_zone(normalized.at(0), C);
        std::optional<BendCore> core =
            bend_core(normalized, k, sigma, C, bopts.zone_hint, bopts);
        if (!core) {
            failure = "bend stage rejected every delta at C=" + std::to_string(C);
            continue;
        }

        std::vector<ScheduleStage> stages = stage1.stages();
        stages[0].s_lo = 0.0;
        stages[0].s_hi = 0.5;
        core->stage.s_lo = 0.5;
        core->stage.s_hi = 1.0;
        stages.push_back(core->stage);
        DeformationSchedule schedule(family.index, std::move(stages), sigma);
        schedule.constants() = stage1.constants();
        schedule.constants()["delta"] = core->delta;
        schedule.constants()["bend_support"] = std::sqrt(core->delta);
        schedule.endpoint_tags() = {"c-normal", "II=k"};
        schedule.report().inputs_digest =
            family_digest(family, {{"op", "master"}, {"sigma", sigma.constant}, {"C", C}});
        schedule.report().constants = schedule.constants();

        SweepOptions fin = opts.normalize.sweep;
        fin.refine_regions.push_back(stage1.constants().value("support", 0.0));
        fin.refine_regions.push_back(std::sqrt(core->delta));
        fin.refine_regions.push_back(core->delta);
        final_verify(schedule, fin);

        // boundary metric constant for all s
        check_jet_law(schedule, "boundary metric constant in s", 0,
                      [&](std::size_t xi, double) { return family.at(xi).boundary_metric(); });
        // II law through the stage weights
        double worst = 0.0;
        for (std::size_t xi = 0; xi < family.size(); ++xi) {
            SymTensorField g0 = family.at(xi).boundary_metric();
            SymTensorField h = second_fundamental_form(family.at(xi), 0.0);
            for (int i = 0; i <= 32; ++i) {
                double s = i / 32.0;
                double w = stage_one_weight(s);
                SymTensorField expect = h.scaled(w) + k.at(xi).scaled(1.0 - w);
                SymTensorField got =
                    second_fundamental_form(schedule.metric_at(xi, s), 0.0);
                worst = std::max(worst, (got - expect).norm_against(g0));
            }
        }
        schedule.report().checks.push_back(
            {"II follows the stage-one weight law", worst <= kExactTol, worst});
        // derivative interpolation through the stage-two weight
        check_jet_law(schedule, "g''_0 follows the stage-two weight law", 2,
                      [&](std::size_t xi, double s) {
                          double w = stage_two_weight(s);
                          const CollarMetric& g = family.at(xi);
                          return g.slice(0.0, 2).scaled(w) +
                                 g.boundary_metric().scaled(-2.0 * (1.0 - w) * C);
                      });
        check_jet_law(schedule, "order-3 derivative follows the stage-two weight law", 3,
                      [&](std::size_t xi, double s) {
                          return family.at(xi).slice(0.0, 3).scaled(stage_two_weight(s));
                      });
        check_identity_outside(schedule, stage1.constants().value("support", 0.0));
        for (std::size_t xi = 0; xi < family.size(); ++xi) {
            double resid = normal_form_residual(schedule.endpoint(xi), k.at(xi), C,
                                                std::min(bopts.zone_hint, core->linear_zone));
            schedule.report().checks.push_back(
                {"endpoint in normal form with II=k (xi=" + family.index.labels[xi] + ")",
                 resid <= kExactTol, resid});
        }
        if (schedule.report().all_pass()) return schedule;
        failure = "post-verification failed at C=" + std::to_string(C) + ":\n" +
                  schedule.report().to_string();
    }
    throw VerificationError("master: " + failure);
}

DeformationSchedule strict_push(const MetricFamily& family, double s_target, double delta,
                                SigmaBound sigma, const PushOptions& opts) {
    require_same_shape(family);
    if (s_target < -1.0 || s_target > 1.0)
        throw PreconditionError("strict_push: s must lie in [-1, 1]");
    require_margin(family, sigma, opts.sweep, "strict_push");

    const double t_max = family.metrics[0].t_max();
    double support = std::min(opts.support, t_max * 0.999);
    ProfileFunction psi = ProfileFunction::polynomial({0.0, 1.0}) * remainder_bump(support);

    double d = delta;
    for (int i = 0; i <= opts.max_halvings; ++i, d *= 0.5) {
        ScheduleStage stage;
        stage.base = family.metrics;
        stage.corrections.resize(family.size());
        if (s_target != 0.0 && d != 0.0) {
            for (std::size_t xi = 0; xi < family.size(); ++xi)
                stage.corrections[xi].push_back(
                    {psi.scaled(-s_target * d), family.at(xi).boundary_metric()});
        }
        SweepOptions o = opts.sweep;
        o.stability_check = false;
        o.refine_regions.push_back(support);
        SweepResult r = sweep_stage(family.index, stage, sigma, o);
        if (!r.positive_definite || r.min_margin <= 0.0) continue;

        stage.s_lo = 0.0;
        stage.s_hi = 1.0;
        DeformationSchedule schedule(family.index, {stage}, sigma);
        schedule.constants() = {{"delta", d}, {"s", s_target}, {"support", support}};
        schedule.endpoint_tags() = {"pushed"};
        schedule.report().inputs_digest = family_digest(
            family, {{"op", "push"}, {"s", s_target}, {"delta", d}, {"sigma", sigma.constant}});
        schedule.report().constants = schedule.constants();
        SweepOptions fin = opts.sweep;
        fin.refine_regions.push_back(support);
        final_verify(schedule, fin);
        check_jet_law(schedule, "boundary metric constant in s", 0,
                      [&](std::size_t xi, double) { return family.at(xi).boundary_metric(); });
        // II shifts by (u s delta / 2) g0, exactly
        check_jet_law(schedule, "slice derivative shifts linearly", 1,
                      [&](std::size_t xi, double s) {
                          return family.at(xi).slice(0.0, 1) +
                                 family.at(xi).boundary_metric().scaled(-s * s_target * d);
                      });
        check_identity_outside(schedule, support);
        if (!schedule.report().all_pass())
            throw VerificationError("strict_push: verification failed:\n" +
                                    schedule.report().to_string());
        return schedule;
    }
    throw VerificationError("strict_push: no delta kept scal > sigma within budget");
}

DeformationSchedule cone_deform(const MetricFamily& family, double h0, SigmaBound sigma,
                                double sigma0, const ConeOptions& opts) {
    require_same_shape(family);
    const int n = family.metrics[0].n();

    std::optional<double> C0 = detect_normal_constant(family.at(0));
    if (!C0) throw PreconditionError("cone: input is not in normal form");
    const double C = *C0;
    for (std::size_t xi = 0; xi < family.size(); ++xi) {
        std::optional<double> Ci = detect_normal_constant(family.at(xi));
        if (!Ci || std::abs(*Ci - C) > kExactTol)
            throw PreconditionError("cone: family members have different normal constants");
        SymTensorField g0 = family.at(xi).boundary_metric();
        SymTensorField h = second_fundamental_form(family.at(xi), 0.0);
        if ((h - g0.scaled(h0)).norm_against(g0) > kExactTol)
            throw PreconditionError("cone: boundary is not totally umbilic with II = h0 g0");
        // hypothesis: sigma0 >= sigma|bdy + (n-1)(n-2) h0^2 and scal_{g0} > sigma0
        std::vector<double> intrinsic = family.at(xi).geometry().intrinsic_scal(g0);
        for (std::size_t i = 0; i < intrinsic.size(); ++i) {
            if (sigma0 < sigma.at(i) + (n - 1) * (n - 2) * h0 * h0 - kExactTol)
                throw PreconditionError("cone: sigma0 below sigma + (n-1)(n-2) h0^2");
            if (intrinsic[i] <= sigma0)
                throw PreconditionError("cone: boundary scalar curvature not above sigma0");
        }
    }
    require_margin(family, sigma, opts.sweep, "cone");

    double zone = exact_normal_zone(family.at(0), C);
    const double t_max = family.metrics[0].t_max();
    double support0 = std::min({opts.support, zone, t_max * 0.999});
    const double amp = C + h0 * h0;

    double support = support0;
    for (int i = 0; i <= opts.max_halvings; ++i, support *= 0.5) {
        double eta = opts.eta0;
        for (int j = 0; j <= opts.max_halvings; ++j, eta *= 0.5) {
            auto taper = make_jet_taper(support, eta);
            if (!taper) continue;
            ScheduleStage stage;
            stage.base = family.metrics;
            stage.corrections.resize(family.size());
            if (amp != 0.0) {
                for (std::size_t xi = 0; xi < family.size(); ++xi)
                    stage.corrections[xi].push_back(
                        {taper->q.scaled(amp), family.at(xi).boundary_metric()});
            }
            SweepOptions o = opts.sweep;
            o.stability_check = false;
            o.refine_regions.push_back(support);
            SweepResult r = sweep_stage(family.index, stage, sigma, o);
            if (!r.positive_definite || r.min_margin <= 0.0) continue;

            stage.s_lo = 0.0;
            stage.s_hi = 1.0;
            DeformationSchedule schedule(family.index, {stage}, sigma);
            schedule.constants() = {{"C", C},         {"h0", h0},
                                    {"sigma0", sigma0}, {"support", support},
                                    {"eta", eta},      {"quad_zone", taper->quad_zone}};
            schedule.endpoint_tags() = {"cone-type"};
            schedule.report().inputs_digest = family_digest(
                family, {{"op", "cone"}, {"h0", h0}, {"sigma", sigma.constant}});
            schedule.report().constants = schedule.constants();
            SweepOptions fin = opts.sweep;
            fin.refine_regions.push_back(support);
            final_verify(schedule, fin);
            check_jet_law(schedule, "boundary metric constant in s", 0,
                          [&](std::size_t xi, double) {
                              return family.at(xi).boundary_metric();
                          });
            check_jet_law(schedule, "II stays h0 g0", 1, [&](std::size_t xi, double) {
                return family.at(xi).slice(0.0, 1);
            });
            // boundary scal identity:
            // scal F(s)|bdy = (1-s) scal g|bdy + s [scal_{g0} - (n-1)(n-2) h0^2]
            double worst = 0.0;
            for (std::size_t xi = 0; xi < family.size(); ++xi) {
                std::vector<double> base = collar_scalar(family.at(xi), 0.0);
                std::vector<double> intr =
                    family.at(xi).geometry().intrinsic_scal(family.at(xi).boundary_metric());
                for (int is = 0; is <= 16; ++is) {
                    double s = is / 16.0;
                    std::vector<double> got =
                        collar_scalar(schedule.metric_at(xi, s), 0.0);
                    for (std::size_t node = 0; node < got.size(); ++node) {
                        double expect =
                            (1.0 - s) * base[node % base.size()] +
                            s * (intr[node % intr.size()] - (n - 1) * (n - 2) * h0 * h0);
                        worst = std::max(worst, std::abs(got[node] - expect));
                    }
                }
            }
            schedule.report().checks.push_back(
                {"boundary scal interpolation identity", worst <= kExactTol, worst});
            check_identity_outside(schedule, support);
            for (std::size_t xi = 0; xi < family.size(); ++xi) {
                BoundaryCondition cone_cond;
                cone_cond.kind = BoundaryCondition::Kind::ConeType;
                cone_cond.h0 = h0;
                cone_cond.window = amp == 0.0 ? zone : taper->quad_zone;
                CheckResult res =
                    check_boundary_condition(schedule.endpoint(xi), cone_cond);
                res.name += " (xi=" + family.index.labels[xi] + ")";
                schedule.report().checks.push_back(res);
            }
            if (!schedule.report().all_pass())
                throw VerificationError("cone: verification failed:\n" +
                                        schedule.report().to_string());
            return schedule;
        }
        if (amp == 0.0) break;
    }
    throw VerificationError("cone: verification budget exhausted");
}

std::pair<DeformationSchedule, DeformationSchedule> desingularize(
    const MetricFamily& side1, const MetricFamily& side2, SigmaBound sigma,
    const MasterOptions& opts) {
    require_same_shape(side1);
    require_same_shape(side2);
    if (side1.size() != side2.size())
        throw PreconditionError("desingularize: family sizes differ");
    if (!(side1.metrics[0].geometry() == side2.metrics[0].geometry()))
        throw PreconditionError("desingularize: sides live over different boundaries");

    TensorFamily k1, k2;
    for (std::size_t xi = 0; xi < side1.size(); ++xi) {
        SymTensorField b1 = side1.at(xi).boundary_metric();
        SymTensorField b2 = side2.at(xi).boundary_metric();
        if (!b1.same_values(b2, 1e-12))
            throw PreconditionError("desingularize: boundary metrics do not match");
        std::vector<double> H1 = mean_curvature(side1.at(xi), 0.0);
        std::vector<double> H2 = mean_curvature(side2.at(xi), 0.0);
        for (std::size_t i = 0; i < std::max(H1.size(), H2.size()); ++i)
            if (H1[i % H1.size()] + H2[i % H2.size()] < 0.0)
                throw PreconditionError(
                    "desingularize: mean-convexity H1 + H2 >= 0 violated at node " +
                    std::to_string(i));
        SymTensorField ii2 = second_fundamental_form(side2.at(xi), 0.0);
        k1.fields.push_back(ii2.scaled(-1.0));
        k2.fields.push_back(ii2);
    }

    // shared constant C so the second-order jets match across the corner
    MasterOptions base = opts;
    double C;
    if (opts.C) {
        C = *opts.C;
    } else {
        C = std::max(normalization_constant(side1), normalization_constant(side2));
        for (std::size_t xi = 0; xi < side1.size(); ++xi) {
            for (const auto* pr : {&side1, &side2}) {
                const CollarMetric& g = pr->at(xi);
                C = std::max(C, normal_form_threshold(g.geometry(), g.boundary_metric(),
                                                      second_fundamental_form(g, 0.0), sigma));
            }
            C = std::max(C, normal_form_threshold(side1.at(xi).geometry(),
                                                  side1.at(xi).boundary_metric(), k1.at(xi),
                                                  sigma));
            C = std::max(C, normal_form_threshold(side2.at(xi).geometry(),
                                                  side2.at(xi).boundary_metric(), k2.at(xi),
                                                  sigma));
        }
        C += 1.0;
    }

    std::string failure;
    for (int round = 0; round <= opts.max_c_doublings; ++round, C *= 2.0) {
        MasterOptions mo = base;
        mo.C = C;
        mo.max_c_doublings = 0;
        try {
            DeformationSchedule s1 = master_deform(side1, k1, sigma, mo);
            DeformationSchedule s2 = master_deform(side2, k2, sigma, mo);
            // smooth-matching residuals of the endpoint jets
            double worst = 0.0;
            for (std::size_t xi = 0; xi < side1.size(); ++xi) {
                CollarMetric e1 = s1.endpoint(xi);
                CollarMetric e2 = s2.endpoint(xi);
                SymTensorField g0 = e1.boundary_metric();
                for (int l = 0; l <= 3; ++l) {
                    double sign = (l % 2 == 0) ? 1.0 : -1.0;
                    SymTensorField diff = e1.slice(0.0, l) - e2.slice(0.0, l).scaled(sign);
                    worst = std::max(worst, diff.norm_against(g0));
                }
            }
            CheckResult match{"corner jets match smoothly through order 3", worst <= 1e-9,
                              worst};
            s1.report().checks.push_back(match);
            s2.report().checks.push_back(match);
            if (!match.pass) {
                failure = "matching residual " + std::to_string(worst);
                continue;
            }
            return {std::move(s1), std::move(s2)};
        } catch (const VerificationError& e) {
            failure = e.what();
        }
    }
    throw VerificationError("desingularize: " + failure);
}

} // namespace collarcurv
