#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "collarcurv/collar.hpp"
#include "collarcurv/report.hpp"

namespace collarcurv {

/// Finite sample of the compact parameter space indexing a family of
/// metrics. Iteration order is the label order; `basepoint` marks the
/// distinguished member.
struct FamilyIndex {
    std::vector<std::string> labels;
    std::size_t basepoint = 0;

    static FamilyIndex single(std::string label = "base");
    std::size_t size() const { return labels.size(); }
};

/// Family of collar metrics over a FamilyIndex (all same geometry/t_max).
struct MetricFamily {
    FamilyIndex index;
    std::vector<CollarMetric> metrics;

    static MetricFamily single(CollarMetric cm, std::string label = "base");
    std::size_t size() const { return metrics.size(); }
    const CollarMetric& at(std::size_t xi) const { return metrics.at(xi); }
};

/// Family of boundary tensor fields (e.g. target second fundamental forms).
struct TensorFamily {
    std::vector<SymTensorField> fields;

    static TensorFamily single(SymTensorField f);
    static TensorFamily constant(SymTensorField f, std::size_t copies);
    std::size_t size() const { return fields.size(); }
    const SymTensorField& at(std::size_t xi) const { return fields.at(xi); }
};

/// Target lower bound for scalar curvature: a constant, optionally refined
/// per boundary node (broadcast over t).
struct SigmaBound {
    double constant = 0.0;
    std::optional<std::vector<double>> field;

    SigmaBound() = default;
    SigmaBound(double c) : constant(c) {}  // NOLINT: implicit by design
    double at(std::size_t node) const {
        return field ? (*field)[node % field->size()] : constant;
    }
};

/// One stage of a deformation: base metrics plus correction terms whose
/// profiles are scaled by the stage-local parameter u in [0,1]. At u = 0
/// the corrections drop out, so the stage reproduces its base
/// term-for-term; corrections with syntactically zero profiles are pruned
/// at construction.
struct ScheduleStage {
    double s_lo = 0.0, s_hi = 1.0;  // global parameter range covered
    std::vector<CollarMetric> base;                    // per xi
    std::vector<std::vector<CollarTerm>> corrections;  // per xi

    CollarMetric metric_at(std::size_t xi, double u) const;
    CollarMetric endpoint(std::size_t xi) const;  // u = 1 with corrections merged
};

struct SweepOptions {
    int s_samples = 17;
    int t_samples = 129;
    /// active near-boundary regions sampled with their own refined grids
    std::vector<double> refine_regions;
    bool stability_check = true;  // re-run at double density, verdict must agree
    double t_cap = 0.0;           // restrict samples to [0, t_cap] when > 0
};

struct SweepResult {
    double min_margin = std::numeric_limits<double>::infinity();
    bool positive_definite = true;
    bool stable = true;
    SampleRef worst;
    std::size_t samples = 0;

    bool pass() const { return positive_definite && min_margin > 0.0 && stable; }
};

/// s-parameterized family of collar metrics with a verified strict
/// scalar-curvature margin.
class DeformationSchedule {
public:
    DeformationSchedule(FamilyIndex index, std::vector<ScheduleStage> stages, SigmaBound sigma);

    const FamilyIndex& index() const { return index_; }
    const SigmaBound& sigma() const { return sigma_; }
    const std::vector<ScheduleStage>& stages() const { return stages_; }

    /// Metric at family member xi and global parameter s in [0, 1].
    CollarMetric metric_at(std::size_t xi, double s) const;
    CollarMetric endpoint(std::size_t xi) const;

    nlohmann::ordered_json& constants() { return constants_; }
    const nlohmann::ordered_json& constants() const { return constants_; }
    std::vector<std::string>& endpoint_tags() { return tags_; }
    const std::vector<std::string>& endpoint_tags() const { return tags_; }
    VerificationReport& report() { return report_; }
    const VerificationReport& report() const { return report_; }

private:
    FamilyIndex index_;
    std::vector<ScheduleStage> stages_;
    SigmaBound sigma_;
    nlohmann::ordered_json constants_;
    std::vector<std::string> tags_;
    VerificationReport report_;
};

/// Scalar-curvature margin sweep over (xi, s, t, node). The t grid is the
/// uniform grid on [0, t_max) united with refined grids over each
/// `refine_regions` entry (supports can be far below the global spacing).
SweepResult sweep_schedule(const DeformationSchedule& schedule, const SweepOptions& opts);

/// Same sweep for a single stage (used inside parameter searches).
SweepResult sweep_stage(const FamilyIndex& index, const ScheduleStage& stage,
                        const SigmaBound& sigma, const SweepOptions& opts);

} // namespace collarcurv
