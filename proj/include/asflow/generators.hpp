#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "asflow/workload.hpp"

namespace asflow {

/// Industrial sensor-processing workload: 2^i workflows arrive in minute i,
/// plus one seed workflow at t=0. Consecutive workflows in submission order
/// are grouped into chains `levels` long (a workflow on level l waits for the
/// one on level l-1).
struct ChronosSpec {
    int tasks_per_workflow = 3;
    double runtime_s = 60.0;
    int cpus = 1;
    int levels = 3;
    int minutes = 10;
    /// Log-normal spread of task runtimes around runtime_s (0 = fixed).
    /// Runtimes are rounded to whole seconds when spread.
    double runtime_sigma = 0.0;
    std::uint64_t seed = 42;
};

WorkloadTrace generate_chronos(const ChronosSpec& spec = {});

enum class DagShape { Chain, ForkJoin, Bag };

/// Burst-shaped workload: `tasks` tasks in workflows submitted inside the
/// first `burst_window_s` seconds, optionally followed by a tail of
/// `tail_tasks` tasks submitted uniformly over `tail_span_s` seconds.
/// Runtimes are log-normal, rounded to whole seconds (minimum 1 s).
struct BurstSpec {
    std::string name = "burst";
    std::int64_t tasks = 24'000;
    /// 0 derives the workflow count from tasks_per_workflow.
    std::int64_t workflows = 0;
    double tasks_per_workflow = 40.0;
    double burst_window_s = 60.0;
    std::int64_t tail_tasks = 0;
    std::int64_t tail_workflows = 0;
    double tail_span_s = 0.0;
    DagShape shape = DagShape::ForkJoin;
    double runtime_median_s = 60.0;
    double runtime_sigma = 0.5;
    int cpus = 1;
    std::uint64_t seed = 42;
};

WorkloadTrace generate_burst(const BurstSpec& spec);

/// Named stand-ins for the reference workloads (T1..T4 shapes). Throws
/// ValidationError on an unknown name. Known: "chronos", "chronos_varied"
/// (log-normal runtimes, sigma 0.5), "spec_scientific", "askalon_ee",
/// "askalon_ee2", "ee2_burst".
WorkloadTrace preset_trace(const std::string& name, std::uint64_t seed = 42);
BurstSpec preset_burst_spec(const std::string& name, std::uint64_t seed = 42);

/// n independent copies with fresh workflow and task ids and unchanged timing.
WorkloadTrace duplicate_trace(const WorkloadTrace& trace, int n);

/// Totals a duplicate_trace(trace, n) call would produce, without building it.
TraceTotals duplicated_totals(const TraceTotals& totals, std::int64_t n);

/// Highest per-minute task count of the trace.
std::int64_t peak_tasks_per_minute(const WorkloadTrace& trace);

/// Duplication factor ceil(reference_peak / own peak), or `override_factor`.
int peak_scale_factor(const WorkloadTrace& trace, double reference_peak,
                      std::optional<int> override_factor = std::nullopt);

WorkloadTrace scale_to_peak(const WorkloadTrace& trace, double reference_peak,
                            std::optional<int> override_factor = std::nullopt);

std::string to_string(DagShape shape);
DagShape dag_shape_from_string(const std::string& s);

} // namespace asflow
