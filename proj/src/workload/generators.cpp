#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "asflow/errors.hpp"
#include "asflow/generators.hpp"

namespace asflow {

WorkloadTrace generate_chronos(const ChronosSpec& spec) {
    if (spec.tasks_per_workflow < 1 || spec.cpus < 1 || spec.levels < 1 || spec.minutes < 1 ||
        !(spec.runtime_s > 0.0) || spec.runtime_sigma < 0.0)
        throw ValidationError("chronos parameters must be >= 1");

    WorkloadTrace trace;
    trace.name = "chronos";
    const auto runtime = SimTime::from_seconds(spec.runtime_s);
    std::mt19937_64 rng(spec.seed);
    std::lognormal_distribution<double> spread(std::log(spec.runtime_s), spec.runtime_sigma);
    auto draw = [&] {
        if (spec.runtime_sigma == 0.0)
            return runtime;
        return SimTime::from_ms(std::max<std::int64_t>(1, std::llround(spread(rng))) * 1000);
    };

    auto add_workflow = [&](SimTime submit) {
        Workflow wf;
        wf.id = static_cast<WorkflowId>(trace.workflows.size());
        wf.submit_time = submit;
        const auto level = wf.id % spec.levels;
        if (level > 0)
            wf.chained_after = wf.id - 1;
        const TaskId base = wf.id * spec.tasks_per_workflow;
        for (int k = 0; k < spec.tasks_per_workflow; ++k) {
            Task t;
            t.id = base + k;
            t.workflow_id = wf.id;
            t.runtime = draw();
            t.cpus = spec.cpus;
            if (k > 0)
                t.parents.push_back(base + k - 1);
            wf.tasks.push_back(std::move(t));
        }
        trace.workflows.push_back(std::move(wf));
    };

    // Seed workflow: the arrival law alone gives 2^minutes - 1 workflows.
    add_workflow(SimTime{});
    for (int minute = 0; minute < spec.minutes; ++minute) {
        const auto submit = SimTime::from_ms(std::int64_t{minute} * 60'000);
        for (std::int64_t k = 0; k < (std::int64_t{1} << minute); ++k)
            add_workflow(submit);
    }
    return trace;
}

std::string to_string(DagShape shape) {
    switch (shape) {
    case DagShape::Chain: return "chain";
    case DagShape::ForkJoin: return "forkjoin";
    case DagShape::Bag: return "bag";
    }
    return "forkjoin";
}

DagShape dag_shape_from_string(const std::string& s) {
    if (s == "chain") return DagShape::Chain;
    if (s == "forkjoin") return DagShape::ForkJoin;
    if (s == "bag") return DagShape::Bag;
    throw ValidationError(fmt::format("unknown DAG shape '{}'", s));
}

namespace {

void shape_tasks(Workflow& wf, DagShape shape) {
    const auto n = wf.tasks.size();
    auto id = [&](std::size_t i) { return wf.tasks[i].id; };
    switch (shape) {
    case DagShape::Bag:
        break;
    case DagShape::Chain:
        for (std::size_t i = 1; i < n; ++i)
            wf.tasks[i].parents = {id(i - 1)};
        break;
    case DagShape::ForkJoin:
        if (n < 3) {
            for (std::size_t i = 1; i < n; ++i)
                wf.tasks[i].parents = {id(i - 1)};
            break;
        }
        for (std::size_t i = 1; i + 1 < n; ++i)
            wf.tasks[i].parents = {id(0)};
        for (std::size_t i = 1; i + 1 < n; ++i)
            wf.tasks[n - 1].parents.push_back(id(i));
        break;
    }
}

// Splits `tasks` into `workflows` near-equal parts.
std::vector<std::int64_t> split(std::int64_t tasks, std::int64_t workflows) {
    std::vector<std::int64_t> parts(static_cast<std::size_t>(workflows), tasks / workflows);
    for (std::int64_t i = 0; i < tasks % workflows; ++i)
        ++parts[static_cast<std::size_t>(i)];
    return parts;
}

} // namespace

WorkloadTrace generate_burst(const BurstSpec& spec) {
    if (spec.tasks < 1 || spec.cpus < 1 || spec.tail_tasks < 0 || !(spec.tasks_per_workflow > 0.0) ||
        !(spec.burst_window_s > 0.0) || !(spec.runtime_median_s > 0.0) || spec.runtime_sigma < 0.0)
        throw ValidationError("invalid burst generator parameters");

    std::mt19937_64 rng(spec.seed);
    std::lognormal_distribution<double> runtime_dist(std::log(spec.runtime_median_s), spec.runtime_sigma);

    auto derive = [&](std::int64_t tasks, std::int64_t requested) {
        if (tasks == 0)
            return std::int64_t{0};
        auto n = requested > 0 ? requested
                               : std::max<std::int64_t>(1, std::llround(tasks / spec.tasks_per_workflow));
        return std::min(n, tasks);
    };
    const auto burst_wfs = derive(spec.tasks, spec.workflows);
    const auto tail_wfs = derive(spec.tail_tasks, spec.tail_workflows);

    struct Planned {
        SimTime submit;
        std::int64_t tasks;
    };
    std::vector<Planned> plan;
    const auto window_ms = std::max<std::int64_t>(1, std::llround(spec.burst_window_s * 1000.0));
    std::uniform_int_distribution<std::int64_t> burst_at(0, window_ms / 1000 > 0 ? window_ms / 1000 - 1 : 0);
    for (auto n : split(spec.tasks, burst_wfs))
        plan.push_back({SimTime::from_ms(burst_at(rng) * 1000), n});
    if (tail_wfs > 0) {
        const auto span_s = std::max<std::int64_t>(1, std::llround(spec.tail_span_s));
        const auto offset_s = window_ms / 1000 > 0 ? window_ms / 1000 : 1;
        std::uniform_int_distribution<std::int64_t> tail_at(offset_s, offset_s + span_s - 1);
        for (auto n : split(spec.tail_tasks, tail_wfs))
            plan.push_back({SimTime::from_ms(tail_at(rng) * 1000), n});
    }
    std::stable_sort(plan.begin(), plan.end(),
                     [](const Planned& a, const Planned& b) { return a.submit < b.submit; });

    WorkloadTrace trace;
    trace.name = spec.name;
    TaskId next_task = 0;
    for (const auto& p : plan) {
        Workflow wf;
        wf.id = static_cast<WorkflowId>(trace.workflows.size());
        wf.submit_time = p.submit;
        for (std::int64_t k = 0; k < p.tasks; ++k) {
            Task t;
            t.id = next_task++;
            t.workflow_id = wf.id;
            t.runtime = SimTime::from_ms(std::max<std::int64_t>(1, std::llround(runtime_dist(rng))) * 1000);
            t.cpus = spec.cpus;
            wf.tasks.push_back(std::move(t));
        }
        shape_tasks(wf, spec.shape);
        trace.workflows.push_back(std::move(wf));
    }
    return trace;
}

BurstSpec preset_burst_spec(const std::string& name, std::uint64_t seed) {
    BurstSpec s;
    s.name = name;
    s.seed = seed;
    if (name == "askalon_ee") {
        // 757 workflows / 45,786 tasks, ~16,000 tasks in the first minute,
        // about 49 minutes of arrivals.
        s.tasks = 16'000;
        s.workflows = 265;
        s.tail_tasks = 29'786;
        s.tail_workflows = 492;
        s.tail_span_s = 2'880.0;
        s.shape = DagShape::ForkJoin;
        s.runtime_median_s = 54.0;
        s.runtime_sigma = 0.5;
    } else if (name == "askalon_ee2") {
        // 3,551 workflows / 122,105 tasks, ~24,000 tasks in the first minute.
        s.tasks = 24'000;
        s.workflows = 698;
        s.tail_tasks = 98'105;
        s.tail_workflows = 2'853;
        s.tail_span_s = 7'200.0;
        s.shape = DagShape::ForkJoin;
        s.runtime_median_s = 30.0;
        s.runtime_sigma = 0.5;
    } else if (name == "ee2_burst") {
        // Single 24,000-task burst of long chains.
        s.tasks = 24'000;
        s.workflows = 700;
        s.burst_window_s = 60.0;
        s.shape = DagShape::Chain;
        s.runtime_median_s = 30.0;
        s.runtime_sigma = 0.25;
    } else if (name == "spec_scientific") {
        // 200 workflows / 13,876 tasks arriving over an hour.
        s.tasks = 69;
        s.workflows = 1;
        s.tail_tasks = 13'807;
        s.tail_workflows = 199;
        s.tail_span_s = 3'540.0;
        s.shape = DagShape::ForkJoin;
        s.runtime_median_s = 20.0;
        s.runtime_sigma = 0.6;
    } else {
        throw ValidationError(fmt::format("unknown workload preset '{}'", name));
    }
    return s;
}

WorkloadTrace preset_trace(const std::string& name, std::uint64_t seed) {
    if (name == "chronos")
        return generate_chronos();
    if (name == "chronos_varied") {
        ChronosSpec spec;
        spec.runtime_sigma = 0.5;
        spec.seed = seed;
        auto trace = generate_chronos(spec);
        trace.name = name;
        return trace;
    }
    return generate_burst(preset_burst_spec(name, seed));
}

WorkloadTrace duplicate_trace(const WorkloadTrace& trace, int n) {
    if (n < 1)
        throw ValidationError("duplication factor must be >= 1");
    if (n == 1)
        return trace;

    WorkflowId wf_stride = 0;
    TaskId task_stride = 0;
    for (const auto& wf : trace.workflows) {
        wf_stride = std::max(wf_stride, wf.id + 1);
        for (const auto& t : wf.tasks)
            task_stride = std::max(task_stride, t.id + 1);
    }

    WorkloadTrace out;
    out.name = fmt::format("{}x{}", trace.name, n);
    out.workflows.reserve(trace.workflows.size() * static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        const WorkflowId wf_off = wf_stride * c;
        const TaskId task_off = task_stride * c;
        for (const auto& wf : trace.workflows) {
            Workflow copy = wf;
            copy.id += wf_off;
            if (copy.chained_after)
                *copy.chained_after += wf_off;
            for (auto& t : copy.tasks) {
                t.id += task_off;
                t.workflow_id = copy.id;
                for (auto& p : t.parents)
                    p += task_off;
            }
            out.workflows.push_back(std::move(copy));
        }
    }
    return out;
}

TraceTotals duplicated_totals(const TraceTotals& totals, std::int64_t n) {
    return {totals.workflows * n, totals.tasks * n};
}

std::int64_t peak_tasks_per_minute(const WorkloadTrace& trace) {
    auto hist = tasks_per_minute(trace);
    return hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
}

int peak_scale_factor(const WorkloadTrace& trace, double reference_peak,
                      std::optional<int> override_factor) {
    if (override_factor) {
        if (*override_factor < 1)
            throw ValidationError("duplication override must be >= 1");
        return *override_factor;
    }
    const auto own = peak_tasks_per_minute(trace);
    if (own <= 0)
        throw ValidationError("cannot scale an empty trace");
    return std::max(1, static_cast<int>(std::ceil(reference_peak / static_cast<double>(own))));
}

WorkloadTrace scale_to_peak(const WorkloadTrace& trace, double reference_peak,
                            std::optional<int> override_factor) {
    return duplicate_trace(trace, peak_scale_factor(trace, reference_peak, override_factor));
}

} // namespace asflow
