#include "collarcurv/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "collarcurv/errors.hpp"

namespace collarcurv {

FamilyIndex FamilyIndex::single(std::string label) {
    FamilyIndex idx;
    idx.labels = {std::move(label)};
    idx.basepoint = 0;
    return idx;
}

MetricFamily MetricFamily::single(CollarMetric cm, std::string label) {
    MetricFamily fam;
    fam.index = FamilyIndex::single(std::move(label));
    fam.metrics.push_back(std::move(cm));
    return fam;
}

TensorFamily TensorFamily::single(SymTensorField f) {
    TensorFamily fam;
    fam.fields.push_back(std::move(f));
    return fam;
}

TensorFamily TensorFamily::constant(SymTensorField f, std::size_t copies) {
    TensorFamily fam;
    fam.fields.assign(copies, f);
    return fam;
}

CollarMetric ScheduleStage::metric_at(std::size_t xi, double u) const {
    const CollarMetric& b = base.at(xi);
    if (u == 0.0 || corrections.at(xi).empty()) return b;
    std::vector<CollarTerm> terms = b.terms();
    for (const auto& corr : corrections[xi])
        terms.push_back({u == 1.0 ? corr.profile : corr.profile.scaled(u), corr.tensor});
    return CollarMetric(b.geometry(), b.t_max(), std::move(terms));
}

CollarMetric ScheduleStage::endpoint(std::size_t xi) const { return metric_at(xi, 1.0); }

DeformationSchedule::DeformationSchedule(FamilyIndex index, std::vector<ScheduleStage> stages,
                                         SigmaBound sigma)
    : index_(std::move(index)), stages_(std::move(stages)), sigma_(std::move(sigma)) {
    if (stages_.empty()) throw PreconditionError("schedule: no stages");
    for (const auto& st : stages_) {
        if (st.base.size() != index_.size() || st.corrections.size() != index_.size())
            throw PreconditionError("schedule: stage family size mismatch");
    }
}

CollarMetric DeformationSchedule::metric_at(std::size_t xi, double s) const {
    if (s < 0.0 || s > 1.0) throw PreconditionError("schedule: s outside [0,1]");
    for (const auto& st : stages_) {
        if (s <= st.s_hi || &st == &stages_.back()) {
            double u = (st.s_hi > st.s_lo) ? (s - st.s_lo) / (st.s_hi - st.s_lo) : 1.0;
            u = std::clamp(u, 0.0, 1.0);
            return st.metric_at(xi, u);
        }
    }
    return stages_.back().metric_at(xi, 1.0);
}

CollarMetric DeformationSchedule::endpoint(std::size_t xi) const {
    return stages_.back().endpoint(xi);
}

namespace {

std::vector<double> make_t_grid(double t_max, int t_samples,
                                const std::vector<double>& regions, int factor,
                                double t_cap) {
    std::set<double> grid;
    double cap = t_max * 0.999999;
    if (t_cap > 0.0) cap = std::min(cap, t_cap);
    int nt = t_samples * factor;
    for (int i = 0; i < nt; ++i) grid.insert(cap * i / (nt - 1));
    for (double w : regions) {
        if (w <= 0.0) continue;
        double hi = std::min(w, cap);
        for (int i = 0; i < nt; ++i) grid.insert(hi * i / (nt - 1));
    }
    return {grid.begin(), grid.end()};
}

SweepResult run_sweep(const FamilyIndex& index,
                      const std::function<CollarMetric(std::size_t, double)>& metric_at,
                      const SigmaBound& sigma, const SweepOptions& opts, int factor) {
    SweepResult res;
    const int ns = opts.s_samples * factor - (factor - 1);
    for (std::size_t xi = 0; xi < index.size(); ++xi) {
        for (int is = 0; is < ns; ++is) {
            double s = static_cast<double>(is) / (ns - 1);
            CollarMetric cm = metric_at(xi, s);
            std::vector<double> tg = make_t_grid(cm.t_max(), opts.t_samples,
                                                 opts.refine_regions, factor, opts.t_cap);
            for (double t : tg) {
                SymTensorField slice = cm.slice(t);
                if (!slice.positive_definite()) {
                    res.positive_definite = false;
                    res.worst = {index.labels[xi], s, t, 0};
                    return res;
                }
                std::vector<double> scal = collar_scalar(cm, t);
                for (std::size_t node = 0; node < scal.size(); ++node) {
                    double margin = scal[node] - sigma.at(node);
                    ++res.samples;
                    if (margin < res.min_margin) {
                        res.min_margin = margin;
                        res.worst = {index.labels[xi], s, t, node};
                    }
                }
            }
        }
    }
    return res;
}

} // namespace

SweepResult sweep_schedule(const DeformationSchedule& schedule, const SweepOptions& opts) {
    auto eval = [&](std::size_t xi, double s) { return schedule.metric_at(xi, s); };
    SweepResult res = run_sweep(schedule.index(), eval, schedule.sigma(), opts, 1);
    if (opts.stability_check && res.positive_definite) {
        SweepResult dense = run_sweep(schedule.index(), eval, schedule.sigma(), opts, 2);
        res.stable = (res.min_margin > 0.0) == (dense.min_margin > 0.0) &&
                     dense.positive_definite;
        if (dense.min_margin < res.min_margin) {
            res.min_margin = dense.min_margin;
            res.worst = dense.worst;
        }
        res.samples += dense.samples;
    }
    return res;
}

SweepResult sweep_stage(const FamilyIndex& index, const ScheduleStage& stage,
                        const SigmaBound& sigma, const SweepOptions& opts) {
    auto eval = [&](std::size_t xi, double s) { return stage.metric_at(xi, s); };
    SweepResult res = run_sweep(index, eval, sigma, opts, 1);
    res.stable = true;
    return res;
}

} // namespace collarcurv
