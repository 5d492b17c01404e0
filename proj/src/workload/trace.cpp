#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "asflow/errors.hpp"
#include "asflow/workload.hpp"

namespace asflow {

using nlohmann::json;
using nlohmann::ordered_json;

TraceTotals WorkloadTrace::totals() const {
    TraceTotals t;
    t.workflows = static_cast<std::int64_t>(workflows.size());
    for (const auto& wf : workflows)
        t.tasks += static_cast<std::int64_t>(wf.tasks.size());
    return t;
}

double WorkloadTrace::cpu_seconds() const {
    std::int64_t cpu_ms = 0;
    for (const auto& wf : workflows)
        for (const auto& t : wf.tasks)
            cpu_ms += t.runtime.ms() * t.cpus;
    return static_cast<double>(cpu_ms) / 1000.0;
}

namespace {

SimTime runtime_from_seconds(double s, TaskId id, WorkflowId wf) {
    if (!(s > 0.0))
        throw ValidationError(
            fmt::format("invalid task: task {} in workflow {} has non-positive runtime", id, wf));
    auto t = SimTime::from_seconds(s);
    return t.ms() == 0 ? SimTime::from_ms(1) : t;
}

template <typename T>
T required(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError(fmt::format("missing field '{}' in {}", key, where));
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(fmt::format("field '{}' in {} has the wrong type", key, where));
    }
}

Workflow parse_workflow(const json& j) {
    if (!j.is_object())
        throw ValidationError("workflow entry is not an object");
    Workflow wf;
    wf.id = required<WorkflowId>(j, "id", "workflow");
    double submit = required<double>(j, "submit_time_s", "workflow");
    if (submit < 0.0)
        throw ValidationError(fmt::format("workflow {} has negative submit time", wf.id));
    wf.submit_time = SimTime::from_seconds(submit);
    if (auto it = j.find("chained_after"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer())
            throw ValidationError(fmt::format("workflow {}: chained_after must be int|null", wf.id));
        wf.chained_after = it->get<WorkflowId>();
    }
    const auto tasks = required<json>(j, "tasks", "workflow");
    if (!tasks.is_array())
        throw ValidationError(fmt::format("workflow {}: tasks must be an array", wf.id));
    wf.tasks.reserve(tasks.size());
    for (const auto& tj : tasks) {
        if (!tj.is_object())
            throw ValidationError(fmt::format("workflow {}: task entry is not an object", wf.id));
        Task t;
        t.workflow_id = wf.id;
        t.id = required<TaskId>(tj, "id", "task");
        t.runtime = runtime_from_seconds(required<double>(tj, "runtime_s", "task"), t.id, wf.id);
        t.cpus = required<int>(tj, "cpus", "task");
        if (auto it = tj.find("parents"); it != tj.end()) {
            if (!it->is_array())
                throw ValidationError(fmt::format("task {}: parents must be an array", t.id));
            for (const auto& p : *it) {
                if (!p.is_number_integer())
                    throw ValidationError(fmt::format("task {}: parent ids must be integers", t.id));
                t.parents.push_back(p.get<TaskId>());
            }
        }
        wf.tasks.push_back(std::move(t));
    }
    return wf;
}

} // namespace

WorkloadTrace parse_trace(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("trace is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object())
        throw ValidationError("trace document must be a JSON object");

    WorkloadTrace trace;
    trace.name = doc.value("name", std::string{});
    const auto workflows = required<json>(doc, "workflows", "trace");
    if (!workflows.is_array())
        throw ValidationError("'workflows' must be an array");
    trace.workflows.reserve(workflows.size());
    for (const auto& wj : workflows)
        trace.workflows.push_back(parse_workflow(wj));

    validate_trace(trace);
    return trace;
}

WorkloadTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(fmt::format("cannot open trace file '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_trace(ss.str());
}

std::string serialize_trace(const WorkloadTrace& trace) {
    ordered_json doc;
    doc["name"] = trace.name;
    auto& wfs = doc["workflows"] = ordered_json::array();
    for (const auto& wf : trace.workflows) {
        ordered_json w;
        w["id"] = wf.id;
        w["submit_time_s"] = wf.submit_time.seconds();
        w["chained_after"] = wf.chained_after ? ordered_json(*wf.chained_after) : ordered_json(nullptr);
        auto& tasks = w["tasks"] = ordered_json::array();
        for (const auto& t : wf.tasks) {
            ordered_json tj;
            tj["id"] = t.id;
            tj["runtime_s"] = t.runtime.seconds();
            tj["cpus"] = t.cpus;
            tj["parents"] = t.parents;
            tasks.push_back(std::move(tj));
        }
        wfs.push_back(std::move(w));
    }
    return doc.dump();
}

void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(fmt::format("cannot write trace file '{}'", path.string()));
    out << serialize_trace(trace) << '\n';
    if (!out)
        throw IoError(fmt::format("failed writing trace file '{}'", path.string()));
}

void validate_trace(const WorkloadTrace& trace) {
    std::unordered_map<WorkflowId, std::size_t> wf_index;
    std::unordered_set<TaskId> all_tasks;
    for (std::size_t i = 0; i < trace.workflows.size(); ++i) {
        const auto& wf = trace.workflows[i];
        if (!wf_index.emplace(wf.id, i).second)
            throw ValidationError(fmt::format("duplicate workflow id {}", wf.id));
        if (wf.submit_time < SimTime{})
            throw ValidationError(fmt::format("workflow {} has negative submit time", wf.id));
        if (wf.tasks.empty())
            throw ValidationError(fmt::format("workflow {} has no tasks", wf.id));
        for (const auto& t : wf.tasks) {
            if (t.runtime <= SimTime{} || t.cpus < 1)
                throw ValidationError(fmt::format(
                    "invalid task: task {} in workflow {} needs runtime > 0 and cpus >= 1", t.id, wf.id));
            if (t.workflow_id != wf.id)
                throw ValidationError(fmt::format("invalid task: task {} is filed under workflow {}",
                                                  t.id, wf.id));
            if (!all_tasks.insert(t.id).second)
                throw ValidationError(fmt::format("duplicate task id {}", t.id));
        }
    }

    for (const auto& wf : trace.workflows) {
        std::unordered_map<TaskId, std::size_t> local;
        for (std::size_t i = 0; i < wf.tasks.size(); ++i)
            local.emplace(wf.tasks[i].id, i);
        std::vector<int> indegree(wf.tasks.size(), 0);
        std::vector<std::vector<std::size_t>> children(wf.tasks.size());
        for (std::size_t i = 0; i < wf.tasks.size(); ++i) {
            std::set<TaskId> seen;
            for (TaskId p : wf.tasks[i].parents) {
                auto it = local.find(p);
                if (it == local.end())
                    throw ValidationError(fmt::format(
                        "dangling edge: task {} in workflow {} references unknown parent {}",
                        wf.tasks[i].id, wf.id, p));
                if (!seen.insert(p).second)
                    continue;
                ++indegree[i];
                children[it->second].push_back(i);
            }
        }
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < indegree.size(); ++i)
            if (indegree[i] == 0)
                ready.push_back(i);
        std::size_t visited = 0;
        while (!ready.empty()) {
            auto i = ready.back();
            ready.pop_back();
            ++visited;
            for (auto c : children[i])
                if (--indegree[c] == 0)
                    ready.push_back(c);
        }
        if (visited != wf.tasks.size())
            throw ValidationError(fmt::format("cyclic workflow {}", wf.id));
    }

    // Chains must reference known workflows and must not loop.
    for (const auto& wf : trace.workflows) {
        if (!wf.chained_after)
            continue;
        if (!wf_index.count(*wf.chained_after))
            throw ValidationError(fmt::format("dangling edge: workflow {} is chained after unknown workflow {}",
                                              wf.id, *wf.chained_after));
    }
    std::vector<int> state(trace.workflows.size(), 0);  // 0 new, 1 on stack, 2 done
    for (std::size_t start = 0; start < trace.workflows.size(); ++start) {
        std::vector<std::size_t> path;
        std::size_t cur = start;
        while (state[cur] == 0) {
            state[cur] = 1;
            path.push_back(cur);
            const auto& next = trace.workflows[cur].chained_after;
            if (!next)
                break;
            cur = wf_index.at(*next);
            if (state[cur] == 1)
                throw ValidationError(fmt::format("cyclic workflow chain through workflow {}",
                                                  trace.workflows[cur].id));
        }
        for (auto p : path)
            state[p] = 2;
    }
}

} // namespace asflow
