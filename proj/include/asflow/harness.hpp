#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asflow/autoscaling.hpp"
#include "asflow/engine.hpp"
#include "asflow/generators.hpp"
#include "asflow/metrics.hpp"
#include "asflow/workload.hpp"

namespace asflow {

/// clusters = ceil(load / (span * utilization * vms_per_cluster)), with load
/// in CPU-seconds and span in seconds. Throws ValidationError for a zero span
/// or a utilization outside (0, 1].
int size_infrastructure(double load_cpu_seconds, double span_s, double utilization, int vms_per_cluster);

/// Sizing from a trace: span = max(submit + critical path) - min(submit).
int size_infrastructure(const WorkloadTrace& trace, double utilization, int vms_per_cluster);

/// The span used for sizing, in seconds.
double ideal_span_seconds(const WorkloadTrace& trace);

enum class TraceSourceKind { File, Preset, Chronos, Burst };

struct TraceSource {
    TraceSourceKind kind = TraceSourceKind::Preset;
    /// File path for File, preset name for Preset.
    std::string name = "chronos";
    ChronosSpec chronos;
    BurstSpec burst;
    bool burst_seed_set = false;
    int duplicate = 1;
    std::optional<double> scale_reference;
    std::optional<int> scale_override;
};

/// Builds the trace, applying peak scaling and duplication.
WorkloadTrace build_trace(const TraceSource& source, std::uint64_t seed);

struct ExperimentConfig {
    std::string name;
    TraceSource trace;
    int clusters = 50;
    int vms_per_cluster = 70;
    /// 0 means equal to `clusters`.
    int max_clusters = 0;
    double autoscaling_interval_s = 30.0;
    std::string autoscaler = "react";
    std::string allocator = "fillworstfit";
    AutoscalerParams tunables;
    std::uint64_t seed = 42;
    /// Divide A_U and A_O by the maximum available VM count.
    bool normalize_accuracy = false;
    /// Also run the static baseline to obtain slowdown.
    bool baseline = true;
    /// When set, clusters (and max_clusters) are sized for this utilization.
    std::optional<double> utilization;
};

/// Parses an ExperimentConfig JSON document. Relative trace file paths are
/// resolved against `base_dir`. Throws ValidationError.
ExperimentConfig parse_experiment_config(const std::string& document, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct MetricReport {
    std::string name;
    std::string autoscaler;
    std::string allocator;
    std::string workload;
    int clusters = 0;
    int vms_per_cluster = 0;
    std::optional<double> utilization;
    ElasticityReport elasticity;
    WorkloadSummary summary;
    std::uint64_t instructions = 0;
    std::int64_t peak_data_items = 0;
    std::optional<std::string> error;

    bool operator==(const MetricReport&) const = default;
};

struct ExperimentOutcome {
    MetricReport report;
    SupplyDemandSeries series;
    /// Excluded from emitted reports so they stay byte-identical across runs.
    double wall_time_s = 0.0;
};

/// Resolves sizing and builds the engine configuration.
EngineConfig engine_config(const ExperimentConfig& config, const WorkloadTrace& trace);

ExperimentOutcome run_experiment(const ExperimentConfig& config);
/// Runs against an already built trace; `baseline` supplies static-run
/// response times per workflow index instead of running the baseline here.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const WorkloadTrace& trace,
                                 const std::vector<double>* baseline = nullptr);

/// Per-workflow response times (seconds) of the static baseline.
std::vector<double> baseline_responses(const ExperimentConfig& config, const WorkloadTrace& trace);

struct WorkloadEntry {
    std::string label;
    TraceSource trace;
    std::optional<int> clusters;
};

struct SweepSpec {
    ExperimentConfig base;
    std::vector<std::string> autoscalers;
    std::vector<std::string> allocators;
    /// 0 keeps the configured cluster count; other values size the system.
    std::vector<double> utilizations;
    std::vector<WorkloadEntry> workloads;
    std::string output;
    /// Worker threads; 0 uses the hardware concurrency.
    int jobs = 0;
    bool dump_supply = false;
};

struct SweepCell {
    ExperimentConfig config;
    std::string workload_label;
    /// Index into the sweep's workload list; -1 for the base trace.
    int workload = -1;
};

/// Cross product of the axes, in a fixed order. Empty axes keep the base value.
std::vector<SweepCell> expand_sweep(const SweepSpec& spec);

SweepSpec parse_sweep_spec(const std::string& document, const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_spec(const std::filesystem::path& path);

/// Known presets: domain, bursty, allocation, utilization, at_scale.
/// `scale` only affects at_scale (sites and duplication multiplied by it).
SweepSpec sweep_preset(const std::string& name, double scale = 1e-3);

/// One outcome per cell, in expand_sweep order. Cell failures are recorded
/// in MetricReport::error and do not stop the sweep.
std::vector<ExperimentOutcome> run_sweep(const SweepSpec& spec);

// Report emission. Column order is fixed.
std::string reports_to_csv(const std::vector<MetricReport>& reports);
std::string reports_to_json(const std::vector<MetricReport>& reports);
std::vector<MetricReport> reports_from_json(const std::string& document);
/// Raw supply samples per cell: label,t_s,supply,demand.
std::string supply_dump_csv(const std::vector<ExperimentOutcome>& outcomes);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json. Throws IoError.
void emit_report(const std::vector<MetricReport>& reports, const std::filesystem::path& dir,
                 const std::string& stem = "report");
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace asflow
