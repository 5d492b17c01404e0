#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asflow/allocation.hpp"
#include "asflow/sim_time.hpp"
#include "asflow/workload.hpp"

namespace asflow {

/// What the resource monitor reports at an autoscaling tick. All counts are
/// in VM slots; demand is queued eligible cpus plus running cpus.
struct MonitoringSample {
    SimTime t;
    std::int64_t supply_vms = 0;
    std::int64_t demand_vms = 0;
    std::int64_t queued_cpus = 0;
    std::int64_t running_cpus = 0;
    std::int64_t arrivals_since_last_tick = 0;
};

enum class AutoscalerKind { Static, React, Reg, Adapt, Hist, ConPaaS, Token, Plan };

std::string to_string(AutoscalerKind kind);
AutoscalerKind autoscaler_kind_from_string(const std::string& name);
/// The seven provisioning policies, in reporting order.
std::vector<AutoscalerKind> all_provisioning_policies();

struct ProvisioningDecision {
    SimTime t;
    std::int64_t target_vms = 0;
    AutoscalerKind policy = AutoscalerKind::Static;
};

/// Policy tunables. Defaults are artifact choices.
struct AutoscalerParams {
    int history_window = 60;
    double up_threshold = 0.9;
    double down_threshold = 0.5;
    int hysteresis_ticks = 3;
    double hist_bucket_s = 3600.0;
    double hist_percentile = 95.0;
    int backtest_depth = 5;
    double smoothing_alpha = 0.5;
    double token_lookahead = 1.0;
};

struct CounterSample {
    SimTime t;
    std::uint64_t instructions = 0;
    std::int64_t data_items = 0;
};

/// Scale-level accounting: abstract instruction count I and data items D.
/// One instruction unit per innermost loop iteration and per predictor
/// evaluation.
struct ScaleCounters {
    std::uint64_t instructions = 0;
    std::int64_t peak_data_items = 0;
    std::vector<CounterSample> series;

    void count_instructions(std::uint64_t n) { instructions += n; }
    void record_data_items(SimTime t, std::int64_t items);
};

enum class TaskPhase : std::uint8_t { Blocked, Queued, Running, Done };

struct RunningTask {
    std::uint32_t task = 0;
    int cpus = 1;
    SimTime end;
};

/// Read-only view of the simulator state handed to policies at a tick.
struct SystemView {
    const WorkloadIndex* workload = nullptr;
    std::span<const TaskPhase> phase;
    /// Completion time for Running and Done tasks.
    std::span<const SimTime> finish;
    /// Workflows that have been released (arrived, chain satisfied) and are unfinished.
    std::span<const std::uint32_t> active_workflows;
    /// FCFS queue; QueuedTask::ref is the task index in `workload`.
    std::span<const QueuedTask> queue;
    std::span<const RunningTask> running;
    int vms_per_cluster = 70;
    int allocated_clusters = 0;
    int idle_clusters = 0;
    /// Mean runtime x cpus (CPU-seconds) of the tasks that have arrived so far.
    double mean_task_cpu_seconds = 0.0;
};

struct TickContext {
    MonitoringSample sample;
    SimTime interval;
    SystemView view;
};

/// Sum of cpus over running tasks and eligible queued tasks.
std::int64_t compute_demand(std::span<const QueuedTask> queue, std::span<const RunningTask> running);

// Decision rules, usable on their own. Each returns a target VM count >= 0.
namespace policy {

std::int64_t react_target(const MonitoringSample& s, int idle_clusters, const AutoscalerParams& p,
                          ScaleCounters& counters);

/// Degree-2 least-squares forecast of demand at `at`; nullopt with fewer than
/// three distinct sample times.
std::optional<double> quadratic_forecast(std::span<const MonitoringSample> history, SimTime at,
                                         ScaleCounters& counters);
std::int64_t reg_target(std::span<const MonitoringSample> history, const MonitoringSample& s,
                        SimTime interval, ScaleCounters& counters);

/// Least-squares slope of demand over time, in VMs per second.
std::optional<double> demand_slope(std::span<const MonitoringSample> history, ScaleCounters& counters);

/// Nearest-rank percentile; nullopt for an empty histogram.
std::optional<std::int64_t> histogram_percentile(const std::map<std::int64_t, std::int64_t>& histogram,
                                                 double percentile);

enum class Predictor { LastValue, Linear, Quadratic, Smoothing };
std::string to_string(Predictor p);

struct ForecastChoice {
    Predictor predictor = Predictor::LastValue;
    double forecast = 0.0;
    double backtest_error = 0.0;
};

/// Picks the predictor with the lowest mean absolute one-step backtest error
/// over the last `depth` samples (ties resolved in Predictor order) and
/// forecasts demand at `at`.
ForecastChoice best_forecast(std::span<const MonitoringSample> history, SimTime at, int depth,
                             double alpha, ScaleCounters& counters);

/// Level of parallelism: peak sum of cpus of tasks estimated to be executing
/// at any instant of [now, now + lookahead), propagating execution tokens from
/// running and eligible tasks along the DAG with known runtimes.
std::int64_t token_level_of_parallelism(const SystemView& view, SimTime now, SimTime lookahead,
                                        ScaleCounters& counters, std::int64_t* working_set = nullptr);

/// VM slots a partial FCFS execution plan occupies during [now, now + interval):
/// busy slots are reused once free if the task completes inside the window,
/// otherwise the task is planned onto fresh slots.
std::int64_t plan_slots(const SystemView& view, SimTime now, SimTime interval, ScaleCounters& counters,
                        std::int64_t* working_set = nullptr);

} // namespace policy

/// Provisioning policy with a bounded monitoring history and scale counters.
class Autoscaler {
public:
    explicit Autoscaler(const AutoscalerParams& params);
    virtual ~Autoscaler() = default;

    Autoscaler(const Autoscaler&) = delete;
    Autoscaler& operator=(const Autoscaler&) = delete;

    /// Appends the sample to the history, runs the policy and records D.
    ProvisioningDecision tick(const TickContext& ctx);

    virtual AutoscalerKind kind() const = 0;

    const ScaleCounters& counters() const { return counters_; }
    std::size_t history_size() const { return history_.size(); }
    std::span<const MonitoringSample> history() const { return history_; }

protected:
    virtual std::int64_t decide(const TickContext& ctx) = 0;
    /// Policy-specific data items held beyond the shared history.
    virtual std::int64_t store_size() const { return 0; }

    AutoscalerParams params_;
    ScaleCounters counters_;

private:
    std::vector<MonitoringSample> history_;
};

std::unique_ptr<Autoscaler> make_autoscaler(AutoscalerKind kind, const AutoscalerParams& params = {});

} // namespace asflow
