#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asflow/workload.hpp"

namespace asflow {

using ClusterId = std::uint32_t;

/// A queued task as seen by the allocator. `ref` is opaque caller data.
struct QueuedTask {
    TaskId id = 0;
    int cpus = 1;
    std::uint32_t ref = 0;
};

struct ClusterSlots {
    ClusterId id = 0;
    int free_slots = 0;
};

/// FCFS-ordered queue plus the free capacity of allocated clusters.
struct PlacementRequest {
    std::span<const QueuedTask> queue;
    std::vector<ClusterSlots> clusters;
};

struct Assignment {
    std::size_t queue_pos = 0;
    TaskId task = 0;
    ClusterId cluster = 0;

    bool operator==(const Assignment&) const = default;
};

struct Placement {
    std::vector<Assignment> assignments;
};

enum class AllocationPolicy { FillWorstFit, WorstFit, BestFit };

/// Picks the cluster with the most free slots and fills it in FCFS order
/// until the next task does not fit, then re-selects. A task that does not
/// fit even the emptiest cluster is skipped for this round.
Placement fill_worst_fit(const PlacementRequest& req);

/// Per task, the cluster with the most free slots, re-evaluated after each
/// assignment.
Placement worst_fit(const PlacementRequest& req);

/// Per task, the cluster with the fewest free slots that still fits it.
Placement best_fit(const PlacementRequest& req);

Placement allocate(AllocationPolicy policy, const PlacementRequest& req);

std::string to_string(AllocationPolicy policy);
AllocationPolicy allocation_policy_from_string(const std::string& name);

} // namespace asflow
