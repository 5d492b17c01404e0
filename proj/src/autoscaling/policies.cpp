#include <algorithm>
#include <cmath>
#include <queue>

#include <fmt/format.h>

#include "asflow/autoscaling.hpp"
#include "asflow/errors.hpp"

namespace asflow {

void ScaleCounters::record_data_items(SimTime t, std::int64_t items) {
    peak_data_items = std::max(peak_data_items, items);
    series.push_back({t, instructions, items});
}

std::string to_string(AutoscalerKind kind) {
    switch (kind) {
    case AutoscalerKind::Static: return "static";
    case AutoscalerKind::React: return "react";
    case AutoscalerKind::Reg: return "reg";
    case AutoscalerKind::Adapt: return "adapt";
    case AutoscalerKind::Hist: return "hist";
    case AutoscalerKind::ConPaaS: return "conpaas";
    case AutoscalerKind::Token: return "token";
    case AutoscalerKind::Plan: return "plan";
    }
    return "static";
}

AutoscalerKind autoscaler_kind_from_string(const std::string& name) {
    for (auto k : {AutoscalerKind::Static, AutoscalerKind::React, AutoscalerKind::Reg, AutoscalerKind::Adapt,
                   AutoscalerKind::Hist, AutoscalerKind::ConPaaS, AutoscalerKind::Token, AutoscalerKind::Plan})
        if (to_string(k) == name)
            return k;
    throw ValidationError(fmt::format("unknown autoscaler '{}'", name));
}

std::vector<AutoscalerKind> all_provisioning_policies() {
    return {AutoscalerKind::React, AutoscalerKind::ConPaaS, AutoscalerKind::Hist, AutoscalerKind::Adapt,
            AutoscalerKind::Plan,  AutoscalerKind::Reg,     AutoscalerKind::Token};
}

std::int64_t compute_demand(std::span<const QueuedTask> queue, std::span<const RunningTask> running) {
    std::int64_t d = 0;
    for (const auto& q : queue)
        d += q.cpus;
    for (const auto& r : running)
        d += r.cpus;
    return d;
}

namespace policy {

std::int64_t react_target(const MonitoringSample& s, int idle_clusters, const AutoscalerParams& p,
                          ScaleCounters& counters) {
    counters.count_instructions(2);
    if (s.supply_vms <= 0)
        return s.demand_vms;
    const double ratio = static_cast<double>(s.demand_vms) / static_cast<double>(s.supply_vms);
    if (ratio >= p.up_threshold)
        return s.demand_vms;
    if (ratio <= p.down_threshold && idle_clusters > 0)
        return s.demand_vms;
    return s.supply_vms;
}

std::int64_t reg_target(std::span<const MonitoringSample> history, const MonitoringSample& s,
                        SimTime interval, ScaleCounters& counters) {
    counters.count_instructions(1);
    if (s.demand_vms > s.supply_vms)
        return s.demand_vms;
    auto f = quadratic_forecast(history, s.t + interval, counters);
    if (!f)
        return s.demand_vms;
    return std::max<std::int64_t>(0, std::llround(*f));
}

std::int64_t token_level_of_parallelism(const SystemView& view, SimTime now, SimTime lookahead,
                                        ScaleCounters& counters, std::int64_t* working_set) {
    const SimTime horizon = now + lookahead;
    // Estimated [start, end) of every task holding a token inside the window.
    std::vector<std::pair<SimTime, int>> edges;
    std::vector<SimTime> est;  // estimated finish per task of the current workflow
    std::vector<char> reached;
    std::int64_t visited = 0;

    for (auto wf : view.active_workflows) {
        const auto& w = view.workload->workflow(wf);
        est.assign(w.task_count, SimTime{});
        reached.assign(w.task_count, 0);
        for (std::uint32_t k = 0; k < w.task_count; ++k) {
            const std::uint32_t i = w.first_task + k;
            const auto& node = view.workload->task(i);
            counters.count_instructions(1);
            ++visited;
            SimTime start;
            switch (view.phase[i]) {
            case TaskPhase::Done:
                est[k] = view.finish[i];
                reached[k] = 1;
                continue;
            case TaskPhase::Running:
                start = now;
                est[k] = view.finish[i];
                break;
            case TaskPhase::Queued:
                start = now;
                est[k] = now + node.runtime;
                break;
            case TaskPhase::Blocked: {
                bool ok = true;
                start = now;
                for (auto p : node.parents) {
                    counters.count_instructions(1);
                    const auto pk = p - w.first_task;
                    if (!reached[pk] || est[pk] >= horizon) {
                        ok = false;
                        break;
                    }
                    start = std::max(start, est[pk]);
                }
                if (!ok)
                    continue;
                est[k] = start + node.runtime;
                break;
            }
            }
            reached[k] = 1;
            if (start < horizon) {
                edges.emplace_back(start, node.cpus);
                edges.emplace_back(est[k], -node.cpus);
            }
        }
    }

    // Ends sort before starts at equal instants: intervals are half-open.
    std::sort(edges.begin(), edges.end());
    std::int64_t cur = 0, peak = 0;
    for (const auto& [at, delta] : edges) {
        counters.count_instructions(1);
        cur += delta;
        if (at < horizon)
            peak = std::max(peak, cur);
    }
    if (working_set)
        *working_set = static_cast<std::int64_t>(edges.size() / 2) + visited;
    return peak;
}

std::int64_t plan_slots(const SystemView& view, SimTime now, SimTime interval, ScaleCounters& counters,
                        std::int64_t* working_set) {
    const SimTime horizon = now + interval;
    std::priority_queue<SimTime, std::vector<SimTime>, std::greater<>> slots;
    std::int64_t assigned = 0;
    for (const auto& r : view.running) {
        for (int c = 0; c < r.cpus; ++c)
            slots.push(r.end);
        assigned += r.cpus;
        counters.count_instructions(1);
    }

    std::int64_t fresh = 0;
    std::vector<SimTime> taken;
    for (const auto& q : view.queue) {
        counters.count_instructions(1);
        const SimTime runtime = view.workload->task(q.ref).runtime;
        if (static_cast<int>(slots.size()) >= q.cpus && now + runtime <= horizon) {
            taken.clear();
            SimTime start = now;
            for (int c = 0; c < q.cpus; ++c) {
                taken.push_back(slots.top());
                start = std::max(start, slots.top());
                slots.pop();
            }
            if (start + runtime <= horizon) {
                for (int c = 0; c < q.cpus; ++c)
                    slots.push(start + runtime);
                continue;
            }
            for (auto t : taken)
                slots.push(t);
        }
        for (int c = 0; c < q.cpus; ++c)
            slots.push(now + runtime);
        fresh += q.cpus;
    }
    if (working_set)
        *working_set = static_cast<std::int64_t>(slots.size() + view.queue.size());
    return assigned + fresh;
}

} // namespace policy

Autoscaler::Autoscaler(const AutoscalerParams& params) : params_(params) {
    if (params_.history_window < 1)
        throw ValidationError("history_window must be >= 1");
}

ProvisioningDecision Autoscaler::tick(const TickContext& ctx) {
    history_.push_back(ctx.sample);
    if (history_.size() > static_cast<std::size_t>(params_.history_window))
        history_.erase(history_.begin());
    counters_.count_instructions(1);
    ProvisioningDecision d{ctx.sample.t, std::max<std::int64_t>(0, decide(ctx)), kind()};
    counters_.record_data_items(ctx.sample.t, static_cast<std::int64_t>(history_.size()) + store_size());
    return d;
}

namespace {

class StaticPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Static; }

protected:
    std::int64_t decide(const TickContext& ctx) override { return ctx.sample.supply_vms; }
};

class ReactPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::React; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        return policy::react_target(ctx.sample, ctx.view.idle_clusters, params_, counters_);
    }
};

class RegPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Reg; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        return policy::reg_target(history(), ctx.sample, ctx.interval, counters_);
    }
};

class AdaptPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Adapt; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        const auto& s = ctx.sample;
        auto slope = policy::demand_slope(history(), counters_);
        if (!slope) {
            below_ = 0;
            return s.demand_vms;
        }
        const auto raw = std::max<std::int64_t>(
            0, s.demand_vms + std::llround(*slope * ctx.interval.seconds()));
        if (raw >= s.supply_vms) {
            below_ = 0;
            return raw;
        }
        // Release capacity only once the downward trend has persisted.
        ++below_;
        return below_ >= params_.hysteresis_ticks ? raw : s.supply_vms;
    }
    std::int64_t store_size() const override { return 1; }

private:
    int below_ = 0;
};

class HistPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Hist; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        const auto& s = ctx.sample;
        const auto bucket_ms = std::max<std::int64_t>(1, std::llround(params_.hist_bucket_s * 1000.0));
        auto& hist = buckets_[s.t.ms() / bucket_ms];
        counters_.count_instructions(hist.size() + 1);

        std::int64_t target = s.demand_vms;
        if (auto predicted = policy::histogram_percentile(hist, params_.hist_percentile)) {
            const double vms = static_cast<double>(*predicted) * ctx.view.mean_task_cpu_seconds /
                               ctx.interval.seconds();
            target = std::llround(vms);
            if (s.demand_vms > s.supply_vms)
                target = std::max(target, s.demand_vms);
        }
        if (hist[s.arrivals_since_last_tick]++ == 0)
            ++bins_;
        return target;
    }
    std::int64_t store_size() const override {
        return bins_ + static_cast<std::int64_t>(buckets_.size());
    }

private:
    std::map<std::int64_t, std::map<std::int64_t, std::int64_t>> buckets_;
    std::int64_t bins_ = 0;
};

class ConPaaSPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::ConPaaS; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        auto choice = policy::best_forecast(history(), ctx.sample.t + ctx.interval, params_.backtest_depth,
                                            params_.smoothing_alpha, counters_);
        return std::max<std::int64_t>(0, std::llround(choice.forecast));
    }
    // One backtest error buffer per predictor.
    std::int64_t store_size() const override { return 4LL * params_.backtest_depth; }
};

class TokenPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Token; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        const auto lookahead = SimTime::from_ms(
            std::llround(static_cast<double>(ctx.interval.ms()) * params_.token_lookahead));
        return policy::token_level_of_parallelism(ctx.view, ctx.sample.t, lookahead, counters_, &working_);
    }
    std::int64_t store_size() const override { return working_; }

private:
    std::int64_t working_ = 0;
};

class PlanPolicy final : public Autoscaler {
public:
    using Autoscaler::Autoscaler;
    AutoscalerKind kind() const override { return AutoscalerKind::Plan; }

protected:
    std::int64_t decide(const TickContext& ctx) override {
        auto slots = policy::plan_slots(ctx.view, ctx.sample.t, ctx.interval, counters_, &working_);
        // Reactive floor while underprovisioned.
        if (ctx.sample.demand_vms > ctx.sample.supply_vms)
            slots = std::max(slots, ctx.sample.demand_vms);
        return slots;
    }
    std::int64_t store_size() const override { return working_; }

private:
    std::int64_t working_ = 0;
};

} // namespace

std::unique_ptr<Autoscaler> make_autoscaler(AutoscalerKind kind, const AutoscalerParams& params) {
    switch (kind) {
    case AutoscalerKind::Static: return std::make_unique<StaticPolicy>(params);
    case AutoscalerKind::React: return std::make_unique<ReactPolicy>(params);
    case AutoscalerKind::Reg: return std::make_unique<RegPolicy>(params);
    case AutoscalerKind::Adapt: return std::make_unique<AdaptPolicy>(params);
    case AutoscalerKind::Hist: return std::make_unique<HistPolicy>(params);
    case AutoscalerKind::ConPaaS: return std::make_unique<ConPaaSPolicy>(params);
    case AutoscalerKind::Token: return std::make_unique<TokenPolicy>(params);
    case AutoscalerKind::Plan: return std::make_unique<PlanPolicy>(params);
    }
    throw ValidationError("unknown autoscaler");
}

} // namespace asflow
