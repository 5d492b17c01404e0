#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "asflow/engine.hpp"
#include "asflow/workload.hpp"

namespace testgen {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Random DAG: edges only from lower to higher position, so it is acyclic.
inline asflow::Workflow random_workflow(Rng& rng, asflow::WorkflowId id, asflow::TaskId first_task, int n,
                                        int max_runtime_s, int max_cpus, double edge_p) {
    asflow::Workflow wf;
    wf.id = id;
    std::bernoulli_distribution edge(edge_p);
    for (int i = 0; i < n; ++i) {
        asflow::Task t;
        t.id = first_task + i;
        t.workflow_id = id;
        t.runtime = asflow::SimTime::from_ms(std::int64_t{uniform(rng, 1, max_runtime_s)} * 1000);
        t.cpus = uniform(rng, 1, max_cpus);
        for (int p = 0; p < i; ++p)
            if (edge(rng))
                t.parents.push_back(first_task + p);
        wf.tasks.push_back(t);
    }
    return wf;
}

struct TraceShape {
    int max_workflows = 4;
    int max_tasks = 10;
    int max_runtime_s = 8;
    int max_cpus = 1;
    int max_submit_s = 10;
    double edge_p = 0.3;
    double chain_p = 0.2;
};

// Random trace with whole-second submits and runtimes and at most
// shape.max_tasks tasks in total.
inline asflow::WorkloadTrace random_trace(Rng& rng, const TraceShape& shape) {
    asflow::WorkloadTrace trace;
    trace.name = "random";
    int budget = uniform(rng, 1, shape.max_tasks);
    const int nwf = std::min(budget, uniform(rng, 1, shape.max_workflows));
    std::bernoulli_distribution chain(shape.chain_p);
    asflow::TaskId next = uniform(rng, 0, 5);
    for (int w = 0; w < nwf; ++w) {
        const int left = nwf - w - 1;
        const int n = w + 1 == nwf ? budget : uniform(rng, 1, budget - left);
        budget -= n;
        auto wf = random_workflow(rng, 10 + w, next, n, shape.max_runtime_s, shape.max_cpus, shape.edge_p);
        next += n + uniform(rng, 0, 3);
        wf.submit_time = asflow::SimTime::from_ms(std::int64_t{uniform(rng, 0, shape.max_submit_s)} * 1000);
        if (w > 0 && chain(rng))
            wf.chained_after = 10 + uniform(rng, 0, w - 1);
        trace.workflows.push_back(std::move(wf));
    }
    return trace;
}

// Random step series with integer-millisecond steps.
inline asflow::SupplyDemandSeries random_series(Rng& rng, int max_steps, int max_width_ms, int max_value) {
    asflow::SupplyDemandSeries s;
    const int steps = uniform(rng, 1, max_steps);
    std::int64_t t = uniform(rng, 0, 1000);
    for (int i = 0; i < steps; ++i) {
        asflow::SupplyDemandSample x;
        x.t = asflow::SimTime::from_ms(t);
        x.supply = uniform(rng, 0, max_value);
        x.demand = uniform(rng, 0, max_value);
        x.busy = uniform(rng, 0, static_cast<int>(std::min<std::int64_t>(x.supply, x.demand)));
        s.samples.push_back(x);
        t += uniform(rng, 1, max_width_ms);
    }
    s.end = asflow::SimTime::from_ms(t);
    return s;
}

inline asflow::Task make_task(asflow::TaskId id, asflow::WorkflowId wf, double runtime_s, int cpus = 1,
                              std::vector<asflow::TaskId> parents = {}) {
    return {id, wf, asflow::SimTime::from_seconds(runtime_s), cpus, std::move(parents)};
}

inline asflow::Workflow make_workflow(asflow::WorkflowId id, double submit_s, std::vector<asflow::Task> tasks) {
    asflow::Workflow wf;
    wf.id = id;
    wf.submit_time = asflow::SimTime::from_seconds(submit_s);
    wf.tasks = std::move(tasks);
    return wf;
}

inline asflow::WorkloadTrace make_trace(std::vector<asflow::Workflow> wfs) {
    asflow::WorkloadTrace t;
    t.name = "test";
    t.workflows = std::move(wfs);
    return t;
}

} // namespace testgen
