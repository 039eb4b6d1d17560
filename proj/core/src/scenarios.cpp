#include "collarcurv/scenarios.hpp"

#include <cmath>
#include <sstream>

#include "collarcurv/errors.hpp"

namespace collarcurv {

namespace {

/// Collar of a geodesic ball of radius `r` in the round n-sphere, collar
/// coordinate pointing from the boundary toward the pole:
/// g_t = sin^2(r - t) g_round = 1/2 - 1/2 cos(2t - 2r).
CollarMetric cap_collar(int n, double r, double t_max) {
    BoundaryGeometry geom = BoundaryGeometry::round_sphere(n - 1);
    ProfileFunction p =
        ProfileFunction::constant(0.5) + ProfileFunction::cosine(-0.5, 2.0, -2.0 * r);
    return CollarMetric(geom, t_max,
                        {{p, SymTensorField::isotropic(n - 1, 1.0)}});
}

CollarMetric cone_collar(int n, double t_max) {
    BoundaryGeometry geom = BoundaryGeometry::round_sphere(n - 1);
    return CollarMetric(geom, t_max,
                        {{ProfileFunction::polynomial({1.0, -2.0, 1.0}),
                          SymTensorField::isotropic(n - 1, 1.0)}});
}

CollarMetric product_collar(int n, double scale, double t_max) {
    BoundaryGeometry geom = BoundaryGeometry::round_sphere(n - 1);
    return CollarMetric(geom, t_max,
                        {{ProfileFunction::constant(1.0),
                          SymTensorField::isotropic(n - 1, scale)}});
}

} // namespace

MetricFamily Scenario::build() const {
    if (kind != Kind::Single)
        throw PreconditionError("scenario " + name + " builds a pair, not a single family");
    if (name.rfind("cap", 0) == 0 || name.rfind("minoo", 0) == 0 ||
        name.rfind("hemisphere", 0) == 0) {
        double t_max = std::min(0.5, 0.6 * radius);
        return MetricFamily::single(cap_collar(n, radius, t_max), name);
    }
    if (name.rfind("cone", 0) == 0)
        return MetricFamily::single(cone_collar(n, 0.5), name);
    if (name.rfind("cylinder", 0) == 0)
        return MetricFamily::single(product_collar(n, scale, 0.5), name);
    throw PreconditionError("scenario " + name + " has no builder");
}

std::pair<MetricFamily, MetricFamily> Scenario::build_pair() const {
    if (kind != Kind::Corner)
        throw PreconditionError("scenario " + name + " is not a corner scenario");
    double t_max = std::min(0.5, 0.6 * radius);
    return {MetricFamily::single(cap_collar(n, radius, t_max), name + ":side1"),
            MetricFamily::single(cap_collar(n, radius, t_max), name + ":side2")};
}

CheckResult Scenario::verify_facts(double tol) const {
    double worst = 0.0;
    auto check_family = [&](const MetricFamily& fam) {
        const CollarMetric& cm = fam.at(0);
        for (double t : {0.0, 0.25 * cm.t_max(), 0.5 * cm.t_max()})
            for (double v : collar_scalar(cm, t))
                worst = std::max(worst, std::abs(v - facts.scal));
        for (double v : mean_curvature(cm, 0.0))
            worst = std::max(worst, std::abs(v - facts.mean_curvature));
        SymTensorField g0 = cm.boundary_metric();
        worst = std::max(worst, std::abs(g0.iso_scale() - facts.boundary_scale));
        SymTensorField ii = second_fundamental_form(cm, 0.0);
        worst = std::max(worst, std::abs(ii.iso_scale() - facts.ii_scale));
    };
    if (kind == Kind::Single) {
        check_family(build());
    } else {
        auto [a, b] = build_pair();
        check_family(a);
        check_family(b);
    }
    return {name + ": closed-form facts", worst <= tol, worst};
}

Scenario spherical_cap(int n, double radius) {
    if (n < 2 || radius <= 0.0 || radius >= M_PI)
        throw PreconditionError("spherical cap: need n >= 2, radius in (0, pi)");
    Scenario s;
    s.name = "cap:" + std::to_string(n) + ":" + std::to_string(radius);
    s.n = n;
    s.radius = radius;
    s.default_sigma = n * (n - 1) - 0.5;
    s.recipe = "master with k = 0";
    s.facts = {static_cast<double>(n) * (n - 1), 1.0 / std::tan(radius),
               std::sin(radius) * std::sin(radius),
               std::sin(radius) * std::cos(radius)};
    return s;
}

Scenario flat_cone(int n) {
    Scenario s;
    s.name = "cone:" + std::to_string(n);
    s.n = n;
    s.default_sigma = -0.1;
    s.recipe = "master with k = II (identity bend)";
    s.facts = {0.0, 1.0, 1.0, 1.0};
    return s;
}

Scenario product_cylinder(int n, double boundary_scale) {
    Scenario s;
    s.name = "cylinder:" + std::to_string(n) + ":" + std::to_string(boundary_scale);
    s.n = n;
    s.scale = boundary_scale;
    double scal = static_cast<double>(n - 1) * (n - 2) / boundary_scale;
    s.default_sigma = scal - 0.5;
    s.recipe = "doubling predicate + strict push";
    s.facts = {scal, 0.0, boundary_scale, 0.0};
    return s;
}

Scenario hemisphere(int n) {
    Scenario s = spherical_cap(n, M_PI / 2.0);
    s.name = "hemisphere:" + std::to_string(n);
    s.default_sigma = n * (n - 1) - 0.1;
    s.recipe = "c-normalize at C = 1";
    return s;
}

Scenario corner_two_caps(int n, double radius) {
    Scenario s = spherical_cap(n, radius);
    s.kind = Scenario::Kind::Corner;
    s.name = "corner:" + std::to_string(n) + ":" + std::to_string(radius);
    s.default_sigma = 0.0;
    s.recipe = "desingularize the two-cap corner";
    return s;
}

Scenario minoo_step2(int n, double epsilon) {
    Scenario s = spherical_cap(n, M_PI / 3.0);
    s.name = "minoo_step2:" + std::to_string(n) + ":" + std::to_string(epsilon);
    s.epsilon = epsilon;
    s.default_sigma = n * (n - 1) - epsilon;
    s.recipe = "master with k = 0 at sigma = n(n-1) - eps";
    return s;
}

std::vector<Scenario> catalog() {
    return {spherical_cap(3, M_PI / 3.0), flat_cone(3),   product_cylinder(3, 1.0),
            hemisphere(3),                corner_two_caps(3, M_PI / 3.0),
            minoo_step2(3, 0.1)};
}

Scenario find_scenario(const std::string& name) {
    for (const Scenario& s : catalog())
        if (s.name == name) return s;
    // parameterized forms name:n[:param]
    auto split = [&](const std::string& text) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        return parts;
    };
    std::vector<std::string> p = split(name);
    if (p.empty()) throw PreconditionError("empty scenario name");
    if (p[0] == "cap" && p.size() == 3) return spherical_cap(std::stoi(p[1]), std::stod(p[2]));
    if (p[0] == "cone" && p.size() == 2) return flat_cone(std::stoi(p[1]));
    if (p[0] == "cylinder" && p.size() == 3)
        return product_cylinder(std::stoi(p[1]), std::stod(p[2]));
    if (p[0] == "hemisphere" && p.size() == 2) return hemisphere(std::stoi(p[1]));
    if (p[0] == "corner" && p.size() == 3)
        return corner_two_caps(std::stoi(p[1]), std::stod(p[2]));
    if (p[0] == "minoo_step2" && p.size() == 3)
        return minoo_step2(std::stoi(p[1]), std::stod(p[2]));
    throw PreconditionError("unknown scenario: " + name);
}

std::vector<std::string> schedule_csv(const DeformationSchedule& schedule, int s_rows,
                                      int t_rows) {
    std::vector<std::string> rows;
    rows.push_back("s,t,min_scal,H,II_min_eig");
    char buf[160];
    for (int is = 0; is < s_rows; ++is) {
        double s = static_cast<double>(is) / (s_rows - 1);
        for (std::size_t xi = 0; xi < schedule.index().size(); ++xi) {
            CollarMetric cm = schedule.metric_at(xi, s);
            SymTensorField g0 = cm.boundary_metric();
            for (int it = 0; it < t_rows; ++it) {
                double t = cm.t_max() * 0.999999 * it / (t_rows - 1);
                double min_scal = std::numeric_limits<double>::infinity();
                for (double v : collar_scalar(cm, t)) min_scal = std::min(min_scal, v);
                double min_H = std::numeric_limits<double>::infinity();
                for (double v : mean_curvature(cm, t)) min_H = std::min(min_H, v);
                double ii_eig =
                    second_fundamental_form(cm, t).min_eigenvalue_against(g0);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", s, t,
                              min_scal, min_H, ii_eig);
                rows.push_back(buf);
            }
        }
    }
    return rows;
}

namespace {

SymTensorField zero_like(const CollarMetric& cm) {
    return SymTensorField::isotropic(cm.geometry().dim(), 0.0);
}

void append_schedule(PipelineResult& out, const std::string& name,
                     const DeformationSchedule& schedule, int s_rows, int t_rows) {
    out.reports.emplace_back(name, schedule.report());
    for (const std::string& row : schedule_csv(schedule, s_rows, t_rows)) {
        if (!out.csv_rows.empty() && row.rfind("s,", 0) == 0) continue;
        out.csv_rows.push_back(row);
    }
}

} // namespace

PipelineResult run_pipeline(const Scenario& scenario, const PipelineOverrides& overrides) {
    PipelineResult out;
    double sigma = overrides.sigma.value_or(scenario.default_sigma);
    SweepOptions sweep;
    if (overrides.s_samples) sweep.s_samples = *overrides.s_samples;
    if (overrides.t_samples) sweep.t_samples = *overrides.t_samples;

    nlohmann::ordered_json meta;
    meta["scenario"] = scenario.name;
    meta["recipe"] = scenario.recipe;
    meta["sigma"] = sigma;
    meta["seed"] = overrides.seed;

    try {
        CheckResult facts = scenario.verify_facts();
        VerificationReport facts_report;
        facts_report.inputs_digest = digest_hex(scenario.name);
        facts_report.checks.push_back(facts);
        facts_report.min_margin = facts.pass ? 0.0 : -facts.residual;
        out.reports.emplace_back("facts", facts_report);
        if (!facts.pass) throw VerificationError("scenario facts failed to verify");

        if (scenario.kind == Scenario::Kind::Corner) {
            auto [side1, side2] = scenario.build_pair();
            MasterOptions mo;
            mo.normalize.sweep = sweep;
            mo.bend.sweep = sweep;
            auto [s1, s2] = desingularize(side1, side2, SigmaBound(sigma), mo);
            append_schedule(out, "side1", s1, 9, 17);
            append_schedule(out, "side2", s2, 9, 17);
        } else if (scenario.recipe.rfind("master", 0) == 0) {
            MetricFamily fam = scenario.build();
            TensorFamily k;
            if (scenario.recipe.find("k = II") != std::string::npos) {
                for (const auto& cm : fam.metrics)
                    k.fields.push_back(second_fundamental_form(cm, 0.0));
            } else {
                for (const auto& cm : fam.metrics) k.fields.push_back(zero_like(cm));
            }
            MasterOptions mo;
            mo.normalize.sweep = sweep;
            mo.bend.sweep = sweep;
            DeformationSchedule sched = master_deform(fam, k, SigmaBound(sigma), mo);
            // endpoint predicates of the two-step scenario
            for (std::size_t xi = 0; xi < fam.size(); ++xi) {
                CollarMetric end = sched.endpoint(xi);
                if (scenario.recipe.find("k = 0") != std::string::npos) {
                    BoundaryCondition cond;
                    cond.kind = BoundaryCondition::Kind::FormEqualsScalar;
                    cond.h0 = 0.0;
                    sched.report().checks.push_back(check_boundary_condition(end, cond));
                    cond.kind = BoundaryCondition::Kind::Doubling;
                    sched.report().checks.push_back(check_boundary_condition(end, cond));
                    CheckResult round{
                        "boundary metric stays the round metric",
                        end.boundary_metric().same_values(
                            fam.at(xi).boundary_metric(), 1e-12),
                        0.0};
                    sched.report().checks.push_back(round);
                }
            }
            if (!sched.report().all_pass())
                throw VerificationError("pipeline endpoint checks failed");
            append_schedule(out, "master", sched, 17, 33);
        } else if (scenario.recipe.rfind("c-normalize", 0) == 0) {
            MetricFamily fam = scenario.build();
            NormalizeOptions no;
            no.sweep = sweep;
            DeformationSchedule sched = c_normalize(fam, SigmaBound(sigma), 1.0, no);
            append_schedule(out, "c-normalize", sched, 17, 33);
        } else {  // doubling + strict push
            MetricFamily fam = scenario.build();
            VerificationReport pred;
            pred.inputs_digest = digest_hex(scenario.name + ":doubling");
            BoundaryCondition cond;
            cond.kind = BoundaryCondition::Kind::Doubling;
            pred.checks.push_back(check_boundary_condition(fam.at(0), cond));
            out.reports.emplace_back("doubling", pred);
            if (!pred.all_pass()) throw VerificationError("doubling predicate failed");
            PushOptions po;
            po.sweep = sweep;
            DeformationSchedule sched =
                strict_push(fam, 1.0, 0.01, SigmaBound(sigma), po);
            append_schedule(out, "push", sched, 9, 17);
        }
    } catch (const PreconditionError& e) {
        out.exit_code = 2;
        meta["error"] = e.what();
    } catch (const VerificationError& e) {
        out.exit_code = 1;
        meta["error"] = e.what();
    }

    if (out.exit_code == 0) {
        for (const auto& [name, rep] : out.reports)
            if (!rep.all_pass()) out.exit_code = 1;
    }
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const auto& [name, rep] : out.reports) {
        nlohmann::ordered_json e;
        e["stage"] = name;
        e["report"] = rep.to_json();
        reports.push_back(e);
    }
    out.bundle = nlohmann::ordered_json();
    out.bundle["meta"] = meta;
    out.bundle["reports"] = reports;
    out.bundle["exit_code"] = out.exit_code;
    return out;
}

} // namespace collarcurv
