#include <algorithm>
#include <queue>
#include <unordered_map>

#include "asflow/workload.hpp"

namespace asflow {

namespace {

// Kahn's algorithm, lowest local index first among ready tasks.
std::vector<std::size_t> topological_order(const Workflow& wf,
                                           std::vector<std::vector<std::size_t>>& parents_out) {
    std::unordered_map<TaskId, std::size_t> local;
    for (std::size_t i = 0; i < wf.tasks.size(); ++i)
        local.emplace(wf.tasks[i].id, i);

    parents_out.assign(wf.tasks.size(), {});
    std::vector<std::vector<std::size_t>> children(wf.tasks.size());
    std::vector<int> indegree(wf.tasks.size(), 0);
    for (std::size_t i = 0; i < wf.tasks.size(); ++i) {
        for (TaskId p : wf.tasks[i].parents) {
            auto pi = local.at(p);
            if (std::find(parents_out[i].begin(), parents_out[i].end(), pi) != parents_out[i].end())
                continue;
            parents_out[i].push_back(pi);
            children[pi].push_back(i);
            ++indegree[i];
        }
    }

    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < indegree.size(); ++i)
        if (indegree[i] == 0)
            ready.push(i);
    std::vector<std::size_t> order;
    order.reserve(wf.tasks.size());
    while (!ready.empty()) {
        auto i = ready.top();
        ready.pop();
        order.push_back(i);
        for (auto c : children[i])
            if (--indegree[c] == 0)
                ready.push(c);
    }
    return order;
}

} // namespace

SimTime critical_path(const Workflow& wf) {
    std::vector<std::vector<std::size_t>> parents;
    auto order = topological_order(wf, parents);
    std::vector<SimTime> finish(wf.tasks.size());
    SimTime longest;
    for (auto i : order) {
        SimTime start;
        for (auto p : parents[i])
            start = std::max(start, finish[p]);
        finish[i] = start + wf.tasks[i].runtime;
        longest = std::max(longest, finish[i]);
    }
    return longest;
}

std::vector<TaskId> eligible_tasks(const Workflow& wf, const std::map<TaskId, SimTime>& completed,
                                   SimTime now, std::optional<SimTime> predecessor_done) {
    if (wf.submit_time > now)
        return {};
    SimTime base = wf.submit_time;
    if (wf.chained_after) {
        if (!predecessor_done || *predecessor_done > now)
            return {};
        base = std::max(base, *predecessor_done);
    }

    std::vector<std::pair<SimTime, TaskId>> ready;
    for (const auto& t : wf.tasks) {
        if (completed.count(t.id))
            continue;
        SimTime at = base;
        bool ok = true;
        for (TaskId p : t.parents) {
            auto it = completed.find(p);
            if (it == completed.end()) {
                ok = false;
                break;
            }
            at = std::max(at, it->second);
        }
        if (ok)
            ready.emplace_back(at, t.id);
    }
    std::sort(ready.begin(), ready.end());
    std::vector<TaskId> out;
    out.reserve(ready.size());
    for (const auto& [at, id] : ready)
        out.push_back(id);
    return out;
}

std::vector<std::int64_t> tasks_per_minute(const WorkloadTrace& trace) {
    std::vector<std::int64_t> hist;
    for (const auto& wf : trace.workflows) {
        auto minute = static_cast<std::size_t>(wf.submit_time.ms() / 60'000);
        if (hist.size() <= minute)
            hist.resize(minute + 1, 0);
        hist[minute] += static_cast<std::int64_t>(wf.tasks.size());
    }
    return hist;
}

WorkloadIndex::WorkloadIndex(const WorkloadTrace& trace) {
    std::unordered_map<WorkflowId, std::uint32_t> wf_pos;
    workflows_.reserve(trace.workflows.size());
    std::size_t total = 0;
    for (const auto& wf : trace.workflows)
        total += wf.tasks.size();
    tasks_.reserve(total);

    for (const auto& wf : trace.workflows) {
        std::vector<std::vector<std::size_t>> parents;
        auto order = topological_order(wf, parents);
        std::vector<std::uint32_t> remap(wf.tasks.size());
        const auto first = static_cast<std::uint32_t>(tasks_.size());
        for (std::size_t k = 0; k < order.size(); ++k)
            remap[order[k]] = first + static_cast<std::uint32_t>(k);

        const auto wf_idx = static_cast<std::uint32_t>(workflows_.size());
        for (auto local : order) {
            const auto& t = wf.tasks[local];
            TaskNode node;
            node.id = t.id;
            node.workflow = wf_idx;
            node.runtime = t.runtime;
            node.cpus = t.cpus;
            for (auto p : parents[local])
                node.parents.push_back(remap[p]);
            max_cpus_ = std::max(max_cpus_, t.cpus);
            tasks_.push_back(std::move(node));
        }
        for (std::uint32_t i = first; i < tasks_.size(); ++i)
            for (auto p : tasks_[i].parents)
                tasks_[p].children.push_back(i);

        WorkflowNode w;
        w.id = wf.id;
        w.submit_time = wf.submit_time;
        w.first_task = first;
        w.task_count = static_cast<std::uint32_t>(wf.tasks.size());
        SimTime longest;
        std::vector<SimTime> finish(wf.tasks.size());
        for (std::uint32_t i = first; i < tasks_.size(); ++i) {
            SimTime start;
            for (auto p : tasks_[i].parents)
                start = std::max(start, finish[p - first]);
            finish[i - first] = start + tasks_[i].runtime;
            longest = std::max(longest, finish[i - first]);
        }
        w.critical_path = longest;
        wf_pos.emplace(wf.id, wf_idx);
        workflows_.push_back(std::move(w));
    }

    for (std::size_t i = 0; i < trace.workflows.size(); ++i) {
        if (const auto& pred = trace.workflows[i].chained_after) {
            auto p = wf_pos.at(*pred);
            workflows_[i].chained_after = p;
            workflows_[p].chain_successors.push_back(static_cast<std::uint32_t>(i));
        }
    }
}

} // namespace asflow
