#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collarcurv/deform.hpp"

namespace collarcurv {

/// Closed-form boundary facts a scenario must reproduce before any
/// pipeline runs (all with respect to the unit round reference metric).
struct ScenarioFacts {
    double scal = 0.0;            // ambient scalar curvature, constant
    double mean_curvature = 0.0;  // H at t = 0
    double boundary_scale = 1.0;  // g0 = boundary_scale * g_round
    double ii_scale = 0.0;        // II_0 = ii_scale * g_round
};

/// Catalog entry: constructor parameters, expected facts, pipeline recipe.
struct Scenario {
    enum class Kind { Single, Corner };

    std::string name;
    Kind kind = Kind::Single;
    int n = 3;
    double radius = 0.0;   // cap geodesic radius / cone-free parameter
    double scale = 1.0;    // product boundary scale
    double epsilon = 0.0;  // margin parameter for the two-step scenario
    double default_sigma = 0.0;
    std::string recipe;    // human-readable pipeline description

    ScenarioFacts facts;

    MetricFamily build() const;
    std::pair<MetricFamily, MetricFamily> build_pair() const;

    /// Re-verifies the closed-form facts against the constructed metrics.
    CheckResult verify_facts(double tol = 1e-9) const;
};

Scenario spherical_cap(int n, double radius);
Scenario flat_cone(int n);
Scenario product_cylinder(int n, double boundary_scale);
Scenario hemisphere(int n);
Scenario corner_two_caps(int n, double radius);
Scenario minoo_step2(int n, double epsilon);

/// Default catalog (the named scenarios at their reference parameters).
std::vector<Scenario> catalog();

/// Lookup by name; parameterized names like "cap:3:1.0472" are accepted.
Scenario find_scenario(const std::string& name);

struct PipelineOverrides {
    std::optional<double> sigma;
    std::optional<int> s_samples;
    std::optional<int> t_samples;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    std::vector<std::pair<std::string, VerificationReport>> reports;
    nlohmann::ordered_json bundle;
    std::vector<std::string> csv_rows;  // "s,t,min_scal,H,II_min_eig"
    int exit_code = 0;                  // 0 pass, 1 verification fail, 2 precondition
};

/// Executes the scenario's recipe, collecting reports and CSV traces.
/// Verification failures and precondition errors are captured in the
/// result rather than thrown.
PipelineResult run_pipeline(const Scenario& scenario, const PipelineOverrides& overrides = {});

/// CSV trace of a schedule: s, t, min scal over nodes, min H, smallest
/// g0-relative eigenvalue of II.
std::vector<std::string> schedule_csv(const DeformationSchedule& schedule, int s_rows = 17,
                                      int t_rows = 33);

} // namespace collarcurv
