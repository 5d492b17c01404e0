#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asflow/sim_time.hpp"

namespace asflow {

using TaskId = std::int64_t;
using WorkflowId = std::int64_t;

struct Task {
    TaskId id = 0;
    WorkflowId workflow_id = 0;
    SimTime runtime;
    int cpus = 1;
    std::vector<TaskId> parents;

    bool operator==(const Task&) const = default;
};

struct Workflow {
    WorkflowId id = 0;
    SimTime submit_time;
    std::optional<WorkflowId> chained_after;
    std::vector<Task> tasks;

    bool operator==(const Workflow&) const = default;
};

struct TraceTotals {
    std::int64_t workflows = 0;
    std::int64_t tasks = 0;

    bool operator==(const TraceTotals&) const = default;
};

struct WorkloadTrace {
    std::string name;
    std::vector<Workflow> workflows;

    TraceTotals totals() const;
    /// Sum of runtime x cpus over all tasks, in CPU-seconds.
    double cpu_seconds() const;

    bool operator==(const WorkloadTrace&) const = default;
};

/// Parses and validates a trace document. Throws ValidationError.
WorkloadTrace parse_trace(std::string_view document);
WorkloadTrace load_trace(const std::filesystem::path& path);

std::string serialize_trace(const WorkloadTrace& trace);
void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path);

/// Structural checks: unique ids, positive runtimes and cpus, no dangling
/// parent or chain references, acyclic task graphs and acyclic chains.
void validate_trace(const WorkloadTrace& trace);

/// Longest cumulative-runtime path through the workflow DAG.
SimTime critical_path(const Workflow& workflow);

/// Tasks of `workflow` that may run at `now`: not yet completed, all parents
/// in `completed`, workflow submitted, and (for chained workflows) the
/// predecessor finished. `predecessor_done` is the completion time of the
/// chained predecessor, or nullopt while it is still unfinished.
/// Ordered by (eligibility time, id).
std::vector<TaskId> eligible_tasks(const Workflow& workflow,
                                   const std::map<TaskId, SimTime>& completed, SimTime now,
                                   std::optional<SimTime> predecessor_done);

/// Task counts per minute of submission time, indexed from minute 0.
std::vector<std::int64_t> tasks_per_minute(const WorkloadTrace& trace);

struct TaskNode {
    TaskId id = 0;
    std::uint32_t workflow = 0;
    SimTime runtime;
    int cpus = 1;
    std::vector<std::uint32_t> parents;
    std::vector<std::uint32_t> children;
};

struct WorkflowNode {
    WorkflowId id = 0;
    SimTime submit_time;
    std::uint32_t first_task = 0;
    std::uint32_t task_count = 0;
    std::optional<std::uint32_t> chained_after;
    std::vector<std::uint32_t> chain_successors;
    SimTime critical_path;
};

/// Dense, index-based view of a validated trace. Tasks of each workflow are
/// contiguous and stored in topological order.
class WorkloadIndex {
public:
    explicit WorkloadIndex(const WorkloadTrace& trace);

    std::span<const TaskNode> tasks() const { return tasks_; }
    std::span<const WorkflowNode> workflows() const { return workflows_; }

    const TaskNode& task(std::uint32_t i) const { return tasks_[i]; }
    const WorkflowNode& workflow(std::uint32_t i) const { return workflows_[i]; }

    std::span<const TaskNode> tasks_of(std::uint32_t wf) const {
        const auto& w = workflows_[wf];
        return std::span<const TaskNode>(tasks_).subspan(w.first_task, w.task_count);
    }

    int max_task_cpus() const { return max_cpus_; }

private:
    std::vector<TaskNode> tasks_;
    std::vector<WorkflowNode> workflows_;
    int max_cpus_ = 0;
};

} // namespace asflow
