#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "asflow/errors.hpp"
#include "asflow/harness.hpp"

namespace asflow {

std::vector<SweepCell> expand_sweep(const SweepSpec& spec) {
    std::vector<int> workloads;
    if (spec.workloads.empty())
        workloads.push_back(-1);
    for (std::size_t i = 0; i < spec.workloads.size(); ++i)
        workloads.push_back(static_cast<int>(i));
    const std::vector<double> utils = spec.utilizations.empty() ? std::vector<double>{0.0} : spec.utilizations;
    const auto allocators =
        spec.allocators.empty() ? std::vector<std::string>{spec.base.allocator} : spec.allocators;
    const auto autoscalers =
        spec.autoscalers.empty() ? std::vector<std::string>{spec.base.autoscaler} : spec.autoscalers;

    std::vector<SweepCell> cells;
    for (int w : workloads) {
        for (double u : utils) {
            for (const auto& alloc : allocators) {
                for (const auto& as : autoscalers) {
                    SweepCell cell;
                    cell.config = spec.base;
                    cell.workload = w;
                    if (w >= 0) {
                        const auto& entry = spec.workloads[static_cast<std::size_t>(w)];
                        cell.config.trace = entry.trace;
                        cell.workload_label = entry.label;
                        if (entry.clusters) {
                            cell.config.clusters = *entry.clusters;
                            cell.config.max_clusters = 0;
                        }
                    } else {
                        cell.workload_label = spec.base.trace.name;
                    }
                    if (u > 0.0)
                        cell.config.utilization = u;
                    cell.config.allocator = alloc;
                    cell.config.autoscaler = as;
                    cell.config.name = cell.workload_label;
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

namespace {

std::vector<std::string> policy_names() {
    std::vector<std::string> out;
    for (auto k : all_provisioning_policies())
        out.push_back(to_string(k));
    return out;
}

WorkloadEntry preset_entry(const std::string& name, std::optional<int> clusters = std::nullopt) {
    WorkloadEntry e;
    e.label = name;
    e.trace.kind = TraceSourceKind::Preset;
    e.trace.name = name;
    e.clusters = clusters;
    return e;
}

// Runs f(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                f(i);
        });
}

} // namespace

SweepSpec sweep_preset(const std::string& name, double scale) {
    SweepSpec s;
    s.base.clusters = 50;
    s.base.vms_per_cluster = 70;
    s.output = "results/" + name;
    if (name == "domain") {
        s.workloads = {preset_entry("chronos"), preset_entry("spec_scientific"), preset_entry("askalon_ee")};
        s.utilizations = {0.0, 0.7};
        s.autoscalers = policy_names();
    } else if (name == "bursty") {
        auto chronos = preset_entry("chronos", 62);
        chronos.label = "chronos_x22";
        chronos.trace.scale_reference = 24'000.0;
        chronos.trace.scale_override = 22;
        s.workloads = {preset_entry("ee2_burst", 13), chronos};
        s.autoscalers = policy_names();
    } else if (name == "allocation") {
        s.workloads = {preset_entry("chronos_varied")};
        s.allocators = {"fillworstfit", "worstfit", "bestfit"};
        s.autoscalers = policy_names();
        s.dump_supply = true;
    } else if (name == "utilization") {
        s.workloads = {preset_entry("askalon_ee")};
        s.utilizations = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
        s.autoscalers = policy_names();
    } else if (name == "at_scale") {
        if (!(scale > 0.0) || scale > 1.0)
            throw ValidationError("at_scale factor must be in (0, 1]");
        const auto sites = std::max(1, static_cast<int>(std::lround(100'000 * scale)));
        auto t4 = preset_entry("askalon_ee2", sites);
        t4.trace.duplicate = std::max(1, static_cast<int>(std::lround(975 * scale)));
        t4.label = fmt::format("askalon_ee2x{}", t4.trace.duplicate);
        s.workloads = {t4};
        s.autoscalers = {"react", "adapt", "reg"};
        s.base.baseline = false;
    } else {
        throw ValidationError(fmt::format("unknown sweep preset '{}'", name));
    }
    return s;
}

std::vector<ExperimentOutcome> run_sweep(const SweepSpec& spec) {
    const auto cells = expand_sweep(spec);
    std::vector<ExperimentOutcome> outcomes(cells.size());

    // Traces are built once per workload and shared read-only.
    std::map<int, WorkloadTrace> traces;
    std::map<int, std::string> trace_errors;
    for (const auto& c : cells) {
        if (traces.contains(c.workload) || trace_errors.contains(c.workload))
            continue;
        try {
            traces.emplace(c.workload, build_trace(c.config.trace, c.config.seed));
        } catch (const std::exception& e) {
            trace_errors.emplace(c.workload, e.what());
        }
    }

    using BaselineKey = std::tuple<int, int, int, std::string, double>;
    auto key_of = [&](const SweepCell& c) -> std::optional<BaselineKey> {
        if (!c.config.baseline || !traces.contains(c.workload))
            return std::nullopt;
        try {
            const auto e = engine_config(c.config, traces.at(c.workload));
            return BaselineKey{c.workload, e.max_clusters ? e.max_clusters : e.clusters, e.vms_per_cluster,
                               c.config.allocator, c.config.autoscaling_interval_s};
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };

    std::map<BaselineKey, std::size_t> baseline_index;
    std::vector<std::size_t> baseline_cell;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (auto k = key_of(cells[i]); k && !baseline_index.contains(*k)) {
            baseline_index.emplace(*k, baseline_cell.size());
            baseline_cell.push_back(i);
        }
    std::vector<std::vector<double>> baselines(baseline_cell.size());
    std::vector<std::string> baseline_errors(baseline_cell.size());
    parallel_for(baseline_cell.size(), spec.jobs, [&](std::size_t b) {
        const auto& c = cells[baseline_cell[b]];
        try {
            baselines[b] = baseline_responses(c.config, traces.at(c.workload));
        } catch (const std::exception& e) {
            baseline_errors[b] = e.what();
        }
    });

    parallel_for(cells.size(), spec.jobs, [&](std::size_t i) {
        const auto& c = cells[i];
        auto fail = [&](const std::string& what) {
            auto& r = outcomes[i].report;
            r.name = c.config.name;
            r.autoscaler = c.config.autoscaler;
            r.allocator = c.config.allocator;
            r.workload = c.workload_label;
            r.clusters = c.config.clusters;
            r.vms_per_cluster = c.config.vms_per_cluster;
            r.utilization = c.config.utilization;
            r.error = what;
        };
        if (auto it = trace_errors.find(c.workload); it != trace_errors.end())
            return fail(it->second);
        const std::vector<double>* baseline = nullptr;
        if (auto k = key_of(c)) {
            const auto b = baseline_index.at(*k);
            if (!baseline_errors[b].empty())
                return fail("baseline: " + baseline_errors[b]);
            baseline = &baselines[b];
        }
        try {
            auto cfg = c.config;
            cfg.baseline = false;
            outcomes[i] = run_experiment(cfg, traces.at(c.workload), baseline);
            outcomes[i].report.name = c.config.name;
            outcomes[i].report.workload = c.workload_label;
        } catch (const std::exception& e) {
            fail(e.what());
        }
    });
    return outcomes;
}

} // namespace asflow
