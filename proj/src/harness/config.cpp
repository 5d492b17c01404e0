#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "asflow/errors.hpp"
#include "asflow/harness.hpp"

namespace asflow {

using nlohmann::json;
using nlohmann::ordered_json;

int size_infrastructure(double load_cpu_seconds, double span_s, double utilization, int vms_per_cluster) {
    if (!(span_s > 0.0))
        throw ValidationError("cannot size infrastructure for a trace spanning zero time");
    if (!(utilization > 0.0) || utilization > 1.0)
        throw ValidationError(fmt::format("target utilization {} is outside (0, 1]", utilization));
    if (vms_per_cluster < 1)
        throw ValidationError("vms_per_cluster must be >= 1");
    if (!(load_cpu_seconds > 0.0))
        throw ValidationError("trace has no load");
    const double clusters = load_cpu_seconds / (span_s * utilization * vms_per_cluster);
    return std::max(1, static_cast<int>(std::ceil(clusters - 1e-9)));
}

double ideal_span_seconds(const WorkloadTrace& trace) {
    if (trace.workflows.empty())
        throw ValidationError("cannot size infrastructure for an empty trace");
    SimTime first = SimTime::max(), last;
    for (const auto& wf : trace.workflows) {
        first = std::min(first, wf.submit_time);
        last = std::max(last, wf.submit_time + critical_path(wf));
    }
    return (last - first).seconds();
}

int size_infrastructure(const WorkloadTrace& trace, double utilization, int vms_per_cluster) {
    return size_infrastructure(trace.cpu_seconds(), ideal_span_seconds(trace), utilization, vms_per_cluster);
}

WorkloadTrace build_trace(const TraceSource& src, std::uint64_t seed) {
    WorkloadTrace trace;
    switch (src.kind) {
    case TraceSourceKind::File:
        trace = load_trace(src.name);
        break;
    case TraceSourceKind::Preset:
        trace = preset_trace(src.name, seed);
        break;
    case TraceSourceKind::Chronos:
        trace = generate_chronos(src.chronos);
        break;
    case TraceSourceKind::Burst: {
        auto spec = src.burst;
        if (!src.burst_seed_set)
            spec.seed = seed;
        trace = generate_burst(spec);
        break;
    }
    }
    if (src.scale_reference || src.scale_override)
        trace = scale_to_peak(trace, src.scale_reference.value_or(0.0), src.scale_override);
    if (src.duplicate != 1)
        trace = duplicate_trace(trace, src.duplicate);
    return trace;
}

namespace {

json parse_json(const std::string& doc, const char* what) {
    try {
        return json::parse(doc);
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed {}: {}", what, e.what()));
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
void get_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null())
        out = j.at(key).get<T>();
}

AutoscalerParams parse_tunables(const json& j) {
    AutoscalerParams p;
    if (!j.is_object())
        throw ValidationError("tunables must be an object");
    get_opt(j, "history_window", p.history_window);
    get_opt(j, "up_threshold", p.up_threshold);
    get_opt(j, "down_threshold", p.down_threshold);
    get_opt(j, "hysteresis_ticks", p.hysteresis_ticks);
    get_opt(j, "hist_bucket_s", p.hist_bucket_s);
    get_opt(j, "hist_percentile", p.hist_percentile);
    get_opt(j, "backtest_depth", p.backtest_depth);
    get_opt(j, "smoothing_alpha", p.smoothing_alpha);
    get_opt(j, "token_lookahead", p.token_lookahead);
    if (p.history_window < 1 || p.hysteresis_ticks < 1 || p.backtest_depth < 1 || !(p.hist_bucket_s > 0.0) ||
        p.hist_percentile <= 0.0 || p.hist_percentile > 100.0 || !(p.token_lookahead > 0.0))
        throw ValidationError("tunable out of range");
    return p;
}

ordered_json tunables_to_json(const AutoscalerParams& p) {
    return ordered_json{{"history_window", p.history_window},   {"up_threshold", p.up_threshold},
                        {"down_threshold", p.down_threshold},   {"hysteresis_ticks", p.hysteresis_ticks},
                        {"hist_bucket_s", p.hist_bucket_s},     {"hist_percentile", p.hist_percentile},
                        {"backtest_depth", p.backtest_depth},   {"smoothing_alpha", p.smoothing_alpha},
                        {"token_lookahead", p.token_lookahead}};
}

TraceSource parse_trace_source(const json& j, const std::filesystem::path& base_dir) {
    TraceSource src;
    if (j.is_string()) {
        src.kind = TraceSourceKind::Preset;
        src.name = j.get<std::string>();
        return src;
    }
    if (!j.is_object())
        throw ValidationError("trace must be a preset name or an object");
    if (j.contains("file")) {
        src.kind = TraceSourceKind::File;
        std::filesystem::path p = j.at("file").get<std::string>();
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        src.name = p.string();
    } else if (j.contains("preset")) {
        src.kind = TraceSourceKind::Preset;
        src.name = j.at("preset").get<std::string>();
    } else if (j.contains("generator")) {
        const auto gen = j.at("generator").get<std::string>();
        const json params = j.value("params", json::object());
        if (gen == "chronos") {
            src.kind = TraceSourceKind::Chronos;
            src.name = "chronos";
            auto& c = src.chronos;
            get_opt(params, "tasks_per_workflow", c.tasks_per_workflow);
            get_opt(params, "runtime_s", c.runtime_s);
            get_opt(params, "cpus", c.cpus);
            get_opt(params, "levels", c.levels);
            get_opt(params, "minutes", c.minutes);
            get_opt(params, "runtime_sigma", c.runtime_sigma);
            get_opt(params, "seed", c.seed);
        } else if (gen == "burst") {
            src.kind = TraceSourceKind::Burst;
            auto& b = src.burst;
            if (params.contains("preset"))
                b = preset_burst_spec(params.at("preset").get<std::string>());
            get_opt(params, "name", b.name);
            get_opt(params, "tasks", b.tasks);
            get_opt(params, "workflows", b.workflows);
            get_opt(params, "tasks_per_workflow", b.tasks_per_workflow);
            get_opt(params, "burst_window_s", b.burst_window_s);
            get_opt(params, "tail_tasks", b.tail_tasks);
            get_opt(params, "tail_workflows", b.tail_workflows);
            get_opt(params, "tail_span_s", b.tail_span_s);
            get_opt(params, "runtime_median_s", b.runtime_median_s);
            get_opt(params, "runtime_sigma", b.runtime_sigma);
            get_opt(params, "cpus", b.cpus);
            if (params.contains("shape"))
                b.shape = dag_shape_from_string(params.at("shape").get<std::string>());
            if (params.contains("seed")) {
                b.seed = params.at("seed").get<std::uint64_t>();
                src.burst_seed_set = true;
            }
            src.name = b.name;
        } else {
            throw ValidationError(fmt::format("unknown generator '{}'", gen));
        }
    } else {
        throw ValidationError("trace needs one of file, preset or generator");
    }
    get_opt(j, "duplicate", src.duplicate);
    if (src.duplicate < 1)
        throw ValidationError("duplicate must be >= 1");
    if (j.contains("scale_to_peak")) {
        const auto& s = j.at("scale_to_peak");
        if (s.contains("reference"))
            src.scale_reference = s.at("reference").get<double>();
        if (s.contains("override"))
            src.scale_override = s.at("override").get<int>();
        if (!src.scale_reference && !src.scale_override)
            throw ValidationError("scale_to_peak needs reference or override");
    }
    return src;
}

ordered_json trace_source_to_json(const TraceSource& src) {
    ordered_json j;
    switch (src.kind) {
    case TraceSourceKind::File: j["file"] = src.name; break;
    case TraceSourceKind::Preset: j["preset"] = src.name; break;
    case TraceSourceKind::Chronos:
        j["generator"] = "chronos";
        j["params"] = ordered_json{{"tasks_per_workflow", src.chronos.tasks_per_workflow},
                                   {"runtime_s", src.chronos.runtime_s},
                                   {"cpus", src.chronos.cpus},
                                   {"levels", src.chronos.levels},
                                   {"minutes", src.chronos.minutes},
                                   {"runtime_sigma", src.chronos.runtime_sigma},
                                   {"seed", src.chronos.seed}};
        break;
    case TraceSourceKind::Burst: {
        const auto& b = src.burst;
        j["generator"] = "burst";
        ordered_json p{{"name", b.name},
                       {"tasks", b.tasks},
                       {"workflows", b.workflows},
                       {"tasks_per_workflow", b.tasks_per_workflow},
                       {"burst_window_s", b.burst_window_s},
                       {"tail_tasks", b.tail_tasks},
                       {"tail_workflows", b.tail_workflows},
                       {"tail_span_s", b.tail_span_s},
                       {"shape", to_string(b.shape)},
                       {"runtime_median_s", b.runtime_median_s},
                       {"runtime_sigma", b.runtime_sigma},
                       {"cpus", b.cpus}};
        if (src.burst_seed_set)
            p["seed"] = b.seed;
        j["params"] = p;
        break;
    }
    }
    if (src.duplicate != 1)
        j["duplicate"] = src.duplicate;
    if (src.scale_reference || src.scale_override) {
        ordered_json s = ordered_json::object();
        if (src.scale_reference)
            s["reference"] = *src.scale_reference;
        if (src.scale_override)
            s["override"] = *src.scale_override;
        j["scale_to_peak"] = s;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object())
        throw ValidationError("experiment config must be an object");
    ExperimentConfig c;
    get_opt(j, "name", c.name);
    if (j.contains("trace"))
        c.trace = parse_trace_source(j.at("trace"), base_dir);
    get_opt(j, "clusters", c.clusters);
    get_opt(j, "vms_per_cluster", c.vms_per_cluster);
    get_opt(j, "max_clusters", c.max_clusters);
    get_opt(j, "autoscaling_interval", c.autoscaling_interval_s);
    get_opt(j, "autoscaler", c.autoscaler);
    get_opt(j, "allocator", c.allocator);
    if (j.contains("tunables"))
        c.tunables = parse_tunables(j.at("tunables"));
    get_opt(j, "seed", c.seed);
    get_opt(j, "normalize_accuracy", c.normalize_accuracy);
    get_opt(j, "baseline", c.baseline);
    if (j.contains("utilization") && !j.at("utilization").is_null())
        c.utilization = j.at("utilization").get<double>();

    if (c.clusters < 1)
        throw ValidationError("clusters must be >= 1");
    if (c.vms_per_cluster < 1)
        throw ValidationError("vms_per_cluster must be >= 1");
    if (!(c.autoscaling_interval_s > 0.0))
        throw ValidationError("autoscaling_interval must be > 0");
    if (c.utilization && (!(*c.utilization > 0.0) || *c.utilization > 1.0))
        throw ValidationError("utilization must be in (0, 1]");
    autoscaler_kind_from_string(c.autoscaler);
    allocation_policy_from_string(c.allocator);
    return c;
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ValidationError(e.what());
    }
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& document, const std::filesystem::path& base_dir) {
    const auto j = parse_json(document, "experiment config");
    return guarded([&] { return config_from_json(j, base_dir); });
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path), path.parent_path());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["name"] = c.name;
    j["trace"] = trace_source_to_json(c.trace);
    j["clusters"] = c.clusters;
    j["vms_per_cluster"] = c.vms_per_cluster;
    j["max_clusters"] = c.max_clusters;
    j["autoscaling_interval"] = c.autoscaling_interval_s;
    j["autoscaler"] = c.autoscaler;
    j["allocator"] = c.allocator;
    j["tunables"] = tunables_to_json(c.tunables);
    j["seed"] = c.seed;
    j["normalize_accuracy"] = c.normalize_accuracy;
    j["baseline"] = c.baseline;
    j["utilization"] = c.utilization ? ordered_json(*c.utilization) : ordered_json(nullptr);
    return j.dump(2);
}

SweepSpec parse_sweep_spec(const std::string& document, const std::filesystem::path& base_dir) {
    const auto j = parse_json(document, "sweep spec");
    return guarded([&] {
        if (!j.is_object())
            throw ValidationError("sweep spec must be an object");
        SweepSpec s;
        if (j.contains("preset")) {
            double scale = j.value("scale", 1e-3);
            s = sweep_preset(j.at("preset").get<std::string>(), scale);
        }
        if (j.contains("base"))
            s.base = config_from_json(j.at("base"), base_dir);
        get_opt(j, "autoscalers", s.autoscalers);
        get_opt(j, "allocators", s.allocators);
        get_opt(j, "utilizations", s.utilizations);
        if (j.contains("workloads")) {
            s.workloads.clear();
            for (const auto& w : j.at("workloads")) {
                WorkloadEntry e;
                if (w.is_string()) {
                    e.label = w.get<std::string>();
                    e.trace.kind = TraceSourceKind::Preset;
                    e.trace.name = e.label;
                } else {
                    e.trace = parse_trace_source(w.at("trace"), base_dir);
                    e.label = w.value("name", e.trace.name);
                    if (w.contains("clusters"))
                        e.clusters = w.at("clusters").get<int>();
                }
                s.workloads.push_back(std::move(e));
            }
        }
        get_opt(j, "output", s.output);
        if (!s.output.empty() && std::filesystem::path(s.output).is_relative() && !base_dir.empty())
            s.output = (base_dir / s.output).string();
        get_opt(j, "jobs", s.jobs);
        get_opt(j, "dump_supply", s.dump_supply);
        for (const auto& a : s.autoscalers)
            autoscaler_kind_from_string(a);
        for (const auto& a : s.allocators)
            allocation_policy_from_string(a);
        for (auto u : s.utilizations)
            if (u < 0.0 || u > 1.0)
                throw ValidationError(fmt::format("utilization {} is outside [0, 1]", u));
        return s;
    });
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
    return parse_sweep_spec(read_file(path), path.parent_path());
}

} // namespace asflow
