#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asflow/allocation.hpp"
#include "asflow/autoscaling.hpp"
#include "asflow/sim_time.hpp"
#include "asflow/workload.hpp"

namespace asflow {

struct EngineConfig {
    /// Clusters allocated at t = 0.
    int clusters = 50;
    int vms_per_cluster = 70;
    /// Physical cluster count and provisioning ceiling; 0 means `clusters`.
    int max_clusters = 0;
    SimTime interval = SimTime::from_ms(30'000);
    AllocationPolicy allocator = AllocationPolicy::FillWorstFit;
};

enum class EventKind : std::uint8_t { TaskCompletion, WorkflowArrival, AutoscaleTick, ClusterDeallocationCheck };

struct Event {
    SimTime time;
    EventKind kind = EventKind::TaskCompletion;
    std::uint64_t seq = 0;
    std::uint32_t payload = 0;
};

/// Strict processing order: time, then kind priority, then seq.
inline bool event_before(const Event& a, const Event& b) {
    if (a.time != b.time)
        return a.time < b.time;
    if (a.kind != b.kind)
        return a.kind < b.kind;
    return a.seq < b.seq;
}

struct SupplyDemandSample {
    SimTime t;
    std::int64_t supply = 0;
    std::int64_t demand = 0;
    std::int64_t busy = 0;

    bool operator==(const SupplyDemandSample&) const = default;
};

/// Piecewise-constant step function: sample i holds on [t_i, t_{i+1}), the
/// last one on [t_n, end).
struct SupplyDemandSeries {
    std::vector<SupplyDemandSample> samples;
    SimTime end;

    SimTime span() const { return samples.empty() ? SimTime{} : end - samples.front().t; }
};

struct ClusterAccount {
    ClusterId id = 0;
    int vms = 0;
    std::int64_t busy_vm_ms = 0;
    std::int64_t allocated_ms = 0;
    /// VM-hours charged with an hourly ceiling per allocation episode.
    std::int64_t charged_vm_hours = 0;
    int episodes = 0;
};

struct WorkflowRecord {
    WorkflowId id = 0;
    SimTime arrival;
    SimTime first_start;
    SimTime last_completion;
    SimTime critical_path;
    std::optional<double> baseline_response_s;
};

struct TickRecord {
    SimTime t;
    std::int64_t supply_vms = 0;
    std::int64_t demand_vms = 0;
    std::int64_t target_vms = 0;
    int desired_clusters = 0;
    int allocated_clusters = 0;
    std::size_t history_size = 0;
    std::uint64_t instructions = 0;
    std::int64_t data_items = 0;
};

struct ClusterLogEntry {
    SimTime t;
    ClusterId cluster = 0;
    bool allocated = false;
};

struct SimulationResult {
    std::vector<WorkflowRecord> workflows;
    SupplyDemandSeries series;
    std::vector<ClusterAccount> clusters;
    std::vector<TickRecord> ticks;
    /// Every allocation and deallocation, in order (initial allocations included).
    std::vector<ClusterLogEntry> cluster_log;
    ScaleCounters counters;
    /// Indexed like WorkloadIndex::tasks().
    std::vector<SimTime> task_start;
    std::vector<ClusterId> task_cluster;
    SimTime first_arrival;
    SimTime last_completion;
    std::uint64_t events_processed = 0;
};

/// Resource-manager commands for one provisioning decision.
struct ProvisioningCommands {
    int desired_clusters = 1;
    std::vector<ClusterId> allocate;
    std::vector<ClusterId> deallocate;
};

struct ClusterStatus {
    ClusterId id = 0;
    bool allocated = false;
    bool idle = true;
};

/// desired = min(max_clusters, max(1, ceil(target / vms_per_cluster))).
/// Allocates the lowest-id unallocated clusters; deallocates idle allocated
/// clusters, lowest id first, never going below one allocated cluster.
ProvisioningCommands apply_provisioning(std::span<const ClusterStatus> clusters, std::int64_t target_vms,
                                        int vms_per_cluster, int max_clusters);

/// Throws ValidationError when the configuration or trace cannot run to
/// completion (no clusters, non-positive interval, a task wider than a cluster).
void check_runnable(const EngineConfig& config, const WorkloadIndex& workload);

SimulationResult run(const EngineConfig& config, const WorkloadIndex& workload, Autoscaler& autoscaler);
SimulationResult run(const EngineConfig& config, const WorkloadTrace& trace, AutoscalerKind autoscaler,
                     const AutoscalerParams& params = {});

} // namespace asflow
