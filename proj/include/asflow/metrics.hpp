#pragma once

#include <optional>
#include <span>

#include "asflow/engine.hpp"

namespace asflow {

struct WorkflowMetrics {
    double makespan_s = 0.0;  // M
    double wait_s = 0.0;      // W
    double response_s = 0.0;  // R = M + W
    double nsl = 0.0;         // R / CP
    std::optional<double> slowdown;
};

/// Throws ValidationError when the critical path is not positive.
WorkflowMetrics workflow_metrics(const WorkflowRecord& record);

struct AccuracyMetrics {
    double under = 0.0;             // A_U
    double over = 0.0;              // A_O
    double under_normalized = 0.0;  // Ā_U
    double over_normalized = 0.0;   // Ā_O

    bool operator==(const AccuracyMetrics&) const = default;
};

/// Time-weighted under/over-provisioning. Ā_U divides by max(d, epsilon),
/// Ā_O by max(s, epsilon). A positive `normalize_by` divides A_U and A_O by
/// that resource count. Throws ValidationError on an empty series or zero span.
AccuracyMetrics accuracy_metrics(const SupplyDemandSeries& series, double epsilon = 1.0,
                                 std::optional<double> normalize_by = std::nullopt);

struct TimeshareMetrics {
    double under_pct = 0.0;  // T_U
    double over_pct = 0.0;   // T_O
    /// Mean length, in autoscaling intervals, of overprovisioning (k) and
    /// underprovisioning (k') episodes.
    double k = 0.0;
    double k_prime = 0.0;

    bool operator==(const TimeshareMetrics&) const = default;
};

TimeshareMetrics timeshare_metrics(const SupplyDemandSeries& series, SimTime interval);

struct ResourceMetrics {
    double idle_vms = 0.0;       // M_U
    double mean_supply = 0.0;    // V̄
    double used_hours = 0.0;     // h̄, per VM slot ever allocated
    double charged_hours = 0.0;  // C̄, per VM slot ever allocated

    bool operator==(const ResourceMetrics&) const = default;
};

ResourceMetrics resource_metrics(std::span<const ClusterAccount> clusters, const SupplyDemandSeries& series);

/// Σ max(0, R - CP) in seconds.
double cumulative_delay(std::span<const WorkflowRecord> records);

struct WorkloadSummary {
    double mean_makespan_s = 0.0;
    double mean_wait_s = 0.0;
    double mean_response_s = 0.0;
    double mean_nsl = 0.0;
    std::optional<double> mean_slowdown;
    /// Last completion minus first arrival.
    double makespan_s = 0.0;
    /// makespan over the ideal span max(submit + CP) - min(submit).
    double nsl = 0.0;
    double cumulative_delay_s = 0.0;
    /// Workflows whose wait exceeded the ideal span.
    std::int64_t long_waits = 0;

    bool operator==(const WorkloadSummary&) const = default;
};

WorkloadSummary summarize_workflows(std::span<const WorkflowRecord> records);

struct ElasticityReport {
    AccuracyMetrics accuracy;
    TimeshareMetrics timeshare;
    ResourceMetrics resources;

    bool operator==(const ElasticityReport&) const = default;
};

ElasticityReport elasticity_report(const SimulationResult& result, SimTime interval,
                                   std::optional<double> normalize_by = std::nullopt);

} // namespace asflow
