#include <algorithm>
#include <queue>

#include "asflow/engine.hpp"
#include "asflow/errors.hpp"

namespace asflow {

namespace {

struct Cluster {
    int vms = 0;
    int busy = 0;
    int running = 0;
    bool allocated = false;
    SimTime allocated_since;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const { return event_before(b, a); }
};

std::int64_t ceil_hours(SimTime d) {
    constexpr std::int64_t hour = 3'600'000;
    return std::max<std::int64_t>(1, (d.ms() + hour - 1) / hour);
}

class Simulator {
public:
    Simulator(const EngineConfig& cfg, const WorkloadIndex& w, Autoscaler& as)
        : cfg_(cfg), w_(w), as_(as), max_clusters_(cfg.max_clusters ? cfg.max_clusters : cfg.clusters) {
        const auto n = w_.tasks().size();
        phase_.assign(n, TaskPhase::Blocked);
        finish_.assign(n, SimTime{});
        waiting_parents_.resize(n);
        running_pos_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            waiting_parents_[i] = static_cast<std::uint32_t>(w_.task(static_cast<std::uint32_t>(i)).parents.size());
        const auto nw = w_.workflows().size();
        wf_left_.resize(nw);
        wf_arrived_.assign(nw, 0);
        wf_done_.assign(nw, 0);
        wf_started_.assign(nw, 0);
        for (std::size_t i = 0; i < nw; ++i)
            wf_left_[i] = w_.workflow(static_cast<std::uint32_t>(i)).task_count;

        res_.task_start.assign(n, SimTime{});
        res_.task_cluster.assign(n, 0);
        res_.workflows.resize(nw);
        for (std::size_t i = 0; i < nw; ++i) {
            const auto& wf = w_.workflow(static_cast<std::uint32_t>(i));
            res_.workflows[i] = {wf.id, wf.submit_time, SimTime{}, SimTime{}, wf.critical_path, std::nullopt};
        }

        clusters_.resize(static_cast<std::size_t>(max_clusters_));
        res_.clusters.resize(clusters_.size());
        for (std::size_t c = 0; c < clusters_.size(); ++c) {
            clusters_[c].vms = cfg_.vms_per_cluster;
            res_.clusters[c].id = static_cast<ClusterId>(c);
            res_.clusters[c].vms = cfg_.vms_per_cluster;
        }
    }

    SimulationResult run() {
        if (w_.tasks().empty())
            throw ValidationError("trace has no tasks");
        SimTime origin = SimTime::max();
        for (const auto& wf : w_.workflows())
            origin = std::min(origin, wf.submit_time);
        res_.first_arrival = origin;
        for (int c = 0; c < cfg_.clusters; ++c)
            allocate_cluster(static_cast<ClusterId>(c), origin);
        desired_ = cfg_.clusters;

        for (std::uint32_t i = 0; i < w_.workflows().size(); ++i)
            push(w_.workflow(i).submit_time, EventKind::WorkflowArrival, i);
        push(origin + cfg_.interval, EventKind::AutoscaleTick, 0);
        record_sample(origin);

        while (!events_.empty()) {
            const SimTime t = events_.top().time;
            while (!events_.empty() && events_.top().time == t &&
                   events_.top().kind <= EventKind::WorkflowArrival) {
                const auto ev = pop();
                if (ev.kind == EventKind::TaskCompletion)
                    complete(ev.payload, t);
                else
                    arrive(ev.payload);
            }
            flush_eligible();
            dispatch(t);
            while (!events_.empty() && events_.top().time == t && events_.top().kind == EventKind::AutoscaleTick) {
                pop();
                tick(t);
            }
            while (!events_.empty() && events_.top().time == t &&
                   events_.top().kind == EventKind::ClusterDeallocationCheck)
                deallocation_check(pop().payload, t);
            record_sample(t);
            if (done_ == w_.tasks().size()) {
                res_.last_completion = t;
                break;
            }
        }
        finalize(res_.last_completion);
        return std::move(res_);
    }

private:
    void push(SimTime t, EventKind kind, std::uint32_t payload) { events_.push({t, kind, seq_++, payload}); }

    Event pop() {
        auto ev = events_.top();
        events_.pop();
        ++res_.events_processed;
        return ev;
    }

    int allocated_count() const {
        return static_cast<int>(
            std::count_if(clusters_.begin(), clusters_.end(), [](const Cluster& c) { return c.allocated; }));
    }

    void allocate_cluster(ClusterId id, SimTime t) {
        auto& c = clusters_[id];
        c.allocated = true;
        c.allocated_since = t;
        supply_ += c.vms;
        res_.cluster_log.push_back({t, id, true});
    }

    void deallocate_cluster(ClusterId id, SimTime t) {
        auto& c = clusters_[id];
        auto& acc = res_.clusters[id];
        const auto held = t - c.allocated_since;
        acc.allocated_ms += held.ms();
        acc.charged_vm_hours += ceil_hours(held) * c.vms;
        ++acc.episodes;
        c.allocated = false;
        supply_ -= c.vms;
        res_.cluster_log.push_back({t, id, false});
    }

    void arrive(std::uint32_t wf) {
        wf_arrived_[wf] = 1;
        const auto& node = w_.workflow(wf);
        arrivals_since_tick_ += node.task_count;
        for (const auto& task : w_.tasks_of(wf)) {
            arrived_cpu_seconds_ += task.runtime.seconds() * task.cpus;
            ++arrived_tasks_;
        }
        if (!node.chained_after || wf_done_[*node.chained_after])
            release(wf);
    }

    void release(std::uint32_t wf) {
        active_.push_back(wf);
        const auto& node = w_.workflow(wf);
        for (std::uint32_t i = node.first_task; i < node.first_task + node.task_count; ++i)
            if (waiting_parents_[i] == 0)
                pending_.push_back(i);
    }

    void complete(std::uint32_t i, SimTime t) {
        const auto& task = w_.task(i);
        const auto cid = res_.task_cluster[i];
        auto& c = clusters_[cid];
        c.busy -= task.cpus;
        --c.running;
        busy_ -= task.cpus;
        running_cpus_ -= task.cpus;
        res_.clusters[cid].busy_vm_ms += task.runtime.ms() * task.cpus;

        const auto pos = running_pos_[i];
        running_[pos] = running_.back();
        running_pos_[running_[pos].task] = pos;
        running_.pop_back();

        phase_[i] = TaskPhase::Done;
        ++done_;
        for (auto child : task.children)
            if (--waiting_parents_[child] == 0)
                pending_.push_back(child);

        if (c.running == 0 && allocated_count() > desired_)
            push(t, EventKind::ClusterDeallocationCheck, cid);

        if (--wf_left_[task.workflow] == 0) {
            wf_done_[task.workflow] = 1;
            res_.workflows[task.workflow].last_completion = t;
            for (auto succ : w_.workflow(task.workflow).chain_successors)
                if (wf_arrived_[succ])
                    release(succ);
        }
    }

    // Tasks that became eligible at the current instant join the queue
    // ordered by task id.
    void flush_eligible() {
        if (pending_.empty())
            return;
        std::sort(pending_.begin(), pending_.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return w_.task(a).id < w_.task(b).id; });
        for (auto i : pending_) {
            const auto& task = w_.task(i);
            phase_[i] = TaskPhase::Queued;
            queue_.push_back({task.id, task.cpus, i});
            queued_cpus_ += task.cpus;
        }
        pending_.clear();
    }

    void dispatch(SimTime t) {
        if (queue_.empty())
            return;
        PlacementRequest req;
        for (std::size_t c = 0; c < clusters_.size(); ++c) {
            const auto& cl = clusters_[c];
            if (cl.allocated && cl.busy < cl.vms)
                req.clusters.push_back({static_cast<ClusterId>(c), cl.vms - cl.busy});
        }
        if (req.clusters.empty())
            return;
        req.queue = queue_;
        const auto placement = allocate(cfg_.allocator, req);
        if (placement.assignments.empty())
            return;

        std::vector<char> placed(queue_.size(), 0);
        for (const auto& a : placement.assignments) {
            placed[a.queue_pos] = 1;
            start(queue_[a.queue_pos].ref, a.cluster, t);
        }
        // Drop placed entries, keeping FCFS order of the rest.
        std::size_t out = 0;
        for (std::size_t k = 0; k < placed.size(); ++k)
            if (!placed[k])
                queue_[out++] = queue_[k];
        queue_.resize(out);
    }

    void start(std::uint32_t i, ClusterId cid, SimTime t) {
        const auto& task = w_.task(i);
        auto& c = clusters_[cid];
        c.busy += task.cpus;
        ++c.running;
        busy_ += task.cpus;
        queued_cpus_ -= task.cpus;
        running_cpus_ += task.cpus;
        phase_[i] = TaskPhase::Running;
        finish_[i] = t + task.runtime;
        res_.task_start[i] = t;
        res_.task_cluster[i] = cid;
        running_pos_[i] = static_cast<std::uint32_t>(running_.size());
        running_.push_back({i, task.cpus, finish_[i]});

        auto& rec = res_.workflows[task.workflow];
        if (!wf_started_[task.workflow]) {
            wf_started_[task.workflow] = 1;
            rec.first_start = t;
        }
        push(finish_[i], EventKind::TaskCompletion, i);
    }

    void tick(SimTime t) {
        std::erase_if(active_, [&](std::uint32_t wf) { return wf_done_[wf] != 0; });

        std::vector<ClusterStatus> status(clusters_.size());
        int idle = 0;
        for (std::size_t c = 0; c < clusters_.size(); ++c) {
            status[c] = {static_cast<ClusterId>(c), clusters_[c].allocated, clusters_[c].running == 0};
            if (clusters_[c].allocated && clusters_[c].running == 0)
                ++idle;
        }

        TickContext ctx;
        ctx.sample = {t, supply_, queued_cpus_ + running_cpus_, queued_cpus_, running_cpus_, arrivals_since_tick_};
        ctx.interval = cfg_.interval;
        ctx.view.workload = &w_;
        ctx.view.phase = phase_;
        ctx.view.finish = finish_;
        ctx.view.active_workflows = active_;
        ctx.view.queue = queue_;
        ctx.view.running = running_;
        ctx.view.vms_per_cluster = cfg_.vms_per_cluster;
        ctx.view.allocated_clusters = allocated_count();
        ctx.view.idle_clusters = idle;
        ctx.view.mean_task_cpu_seconds =
            arrived_tasks_ ? arrived_cpu_seconds_ / static_cast<double>(arrived_tasks_) : 0.0;

        const auto decision = as_.tick(ctx);
        const auto cmd = apply_provisioning(status, decision.target_vms, cfg_.vms_per_cluster, max_clusters_);
        desired_ = cmd.desired_clusters;
        for (auto id : cmd.allocate)
            allocate_cluster(id, t);
        for (auto id : cmd.deallocate)
            deallocate_cluster(id, t);
        if (!cmd.allocate.empty())
            dispatch(t);

        const auto& counters = as_.counters();
        res_.ticks.push_back({t, ctx.sample.supply_vms, ctx.sample.demand_vms, decision.target_vms, desired_, allocated_count(), as_.history_size(),
                              counters.instructions,
                              counters.series.empty() ? 0 : counters.series.back().data_items});
        arrivals_since_tick_ = 0;
        push(t + cfg_.interval, EventKind::AutoscaleTick, 0);
    }

    void deallocation_check(ClusterId id, SimTime t) {
        const auto& c = clusters_[id];
        if (c.allocated && c.running == 0 && allocated_count() > desired_ && allocated_count() > 1)
            deallocate_cluster(id, t);
    }

    void record_sample(SimTime t) {
        SupplyDemandSample s{t, supply_, queued_cpus_ + running_cpus_, busy_};
        auto& v = res_.series.samples;
        if (!v.empty() && v.back().t == t) {
            v.back() = s;
            if (v.size() > 1 && v[v.size() - 2].supply == s.supply && v[v.size() - 2].demand == s.demand &&
                v[v.size() - 2].busy == s.busy)
                v.pop_back();
            return;
        }
        if (!v.empty() && v.back().supply == s.supply && v.back().demand == s.demand && v.back().busy == s.busy)
            return;
        v.push_back(s);
    }

    void finalize(SimTime end) {
        res_.series.end = end;
        for (std::size_t c = 0; c < clusters_.size(); ++c)
            if (clusters_[c].allocated)
                deallocate_cluster(static_cast<ClusterId>(c), end);
        res_.counters = as_.counters();
    }

    const EngineConfig& cfg_;
    const WorkloadIndex& w_;
    Autoscaler& as_;
    const int max_clusters_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t seq_ = 0;

    std::vector<Cluster> clusters_;
    int desired_ = 1;
    std::int64_t supply_ = 0;
    std::int64_t busy_ = 0;
    std::int64_t queued_cpus_ = 0;
    std::int64_t running_cpus_ = 0;

    std::vector<TaskPhase> phase_;
    std::vector<SimTime> finish_;
    std::vector<std::uint32_t> waiting_parents_;
    std::vector<std::uint32_t> running_pos_;
    std::vector<RunningTask> running_;
    std::vector<QueuedTask> queue_;
    std::vector<std::uint32_t> pending_;
    std::size_t done_ = 0;

    std::vector<std::uint32_t> wf_left_;
    std::vector<char> wf_arrived_;
    std::vector<char> wf_done_;
    std::vector<char> wf_started_;
    std::vector<std::uint32_t> active_;

    std::int64_t arrivals_since_tick_ = 0;
    double arrived_cpu_seconds_ = 0.0;
    std::int64_t arrived_tasks_ = 0;

    SimulationResult res_;
};

} // namespace

SimulationResult run(const EngineConfig& config, const WorkloadIndex& workload, Autoscaler& autoscaler) {
    check_runnable(config, workload);
    Simulator sim(config, workload, autoscaler);
    return sim.run();
}

SimulationResult run(const EngineConfig& config, const WorkloadTrace& trace, AutoscalerKind autoscaler,
                     const AutoscalerParams& params) {
    const WorkloadIndex index(trace);
    auto as = make_autoscaler(autoscaler, params);
    return run(config, index, *as);
}

} // namespace asflow
