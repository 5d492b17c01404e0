#include <chrono>

#include <fmt/format.h>

#include "asflow/errors.hpp"
#include "asflow/harness.hpp"

namespace asflow {

EngineConfig engine_config(const ExperimentConfig& config, const WorkloadTrace& trace) {
    EngineConfig e;
    e.vms_per_cluster = config.vms_per_cluster;
    e.clusters = config.clusters;
    e.max_clusters = config.max_clusters;
    if (config.utilization) {
        e.clusters = size_infrastructure(trace, *config.utilization, config.vms_per_cluster);
        e.max_clusters = e.clusters;
    }
    e.interval = SimTime::from_seconds(config.autoscaling_interval_s);
    e.allocator = allocation_policy_from_string(config.allocator);
    return e;
}

std::vector<double> baseline_responses(const ExperimentConfig& config, const WorkloadTrace& trace) {
    auto e = engine_config(config, trace);
    // The baseline keeps every configured cluster allocated for the whole run.
    e.clusters = e.max_clusters ? e.max_clusters : e.clusters;
    const auto result = run(e, trace, AutoscalerKind::Static, config.tunables);
    std::vector<double> out;
    out.reserve(result.workflows.size());
    for (const auto& r : result.workflows)
        out.push_back(workflow_metrics(r).response_s);
    return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const WorkloadTrace& trace,
                                 const std::vector<double>* baseline) {
    const auto started = std::chrono::steady_clock::now();
    ExperimentOutcome out;
    auto& rep = out.report;
    rep.name = config.name;
    rep.autoscaler = config.autoscaler;
    rep.allocator = config.allocator;
    rep.workload = trace.name;
    rep.vms_per_cluster = config.vms_per_cluster;
    rep.utilization = config.utilization;

    const auto kind = autoscaler_kind_from_string(config.autoscaler);
    const auto e = engine_config(config, trace);
    rep.clusters = e.clusters;

    std::vector<double> own_baseline;
    if (!baseline && config.baseline) {
        own_baseline = baseline_responses(config, trace);
        baseline = &own_baseline;
    }

    auto result = run(e, trace, kind, config.tunables);
    if (baseline) {
        if (baseline->size() != result.workflows.size())
            throw ValidationError("baseline does not match the trace");
        for (std::size_t i = 0; i < result.workflows.size(); ++i)
            result.workflows[i].baseline_response_s = (*baseline)[i];
    }

    std::optional<double> normalize;
    if (config.normalize_accuracy)
        normalize = static_cast<double>(e.max_clusters ? e.max_clusters : e.clusters) * e.vms_per_cluster;
    rep.elasticity = elasticity_report(result, e.interval, normalize);
    rep.summary = summarize_workflows(result.workflows);
    rep.instructions = result.counters.instructions;
    rep.peak_data_items = result.counters.peak_data_items;
    out.series = std::move(result.series);
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, build_trace(config.trace, config.seed));
}

} // namespace asflow
