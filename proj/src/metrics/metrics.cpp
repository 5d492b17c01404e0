#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "asflow/errors.hpp"
#include "asflow/metrics.hpp"

namespace asflow {

namespace {

void require_span(const SupplyDemandSeries& series) {
    if (series.samples.empty())
        throw ValidationError("empty supply/demand series");
    if (series.span() <= SimTime{})
        throw ValidationError("supply/demand series spans zero time");
}

// Calls f(sample, duration_ms) for each step of the series.
template <class F>
void for_each_step(const SupplyDemandSeries& series, F&& f) {
    const auto& v = series.samples;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const SimTime until = i + 1 < v.size() ? v[i + 1].t : series.end;
        const auto dt = (until - v[i].t).ms();
        if (dt > 0)
            f(v[i], dt);
    }
}

int sign(const SupplyDemandSample& s) {
    return s.supply > s.demand ? 1 : (s.supply < s.demand ? -1 : 0);
}

} // namespace

WorkflowMetrics workflow_metrics(const WorkflowRecord& r) {
    if (r.critical_path <= SimTime{})
        throw ValidationError(fmt::format("workflow {} has a non-positive critical path", r.id));
    WorkflowMetrics m;
    m.makespan_s = (r.last_completion - r.first_start).seconds();
    m.wait_s = (r.first_start - r.arrival).seconds();
    m.response_s = m.makespan_s + m.wait_s;
    m.nsl = m.response_s / r.critical_path.seconds();
    if (r.baseline_response_s && *r.baseline_response_s > 0.0)
        m.slowdown = m.response_s / *r.baseline_response_s;
    return m;
}

AccuracyMetrics accuracy_metrics(const SupplyDemandSeries& series, double epsilon,
                                 std::optional<double> normalize_by) {
    require_span(series);
    long double under = 0, over = 0, nunder = 0, nover = 0;
    for_each_step(series, [&](const SupplyDemandSample& s, std::int64_t dt) {
        const auto diff = s.demand - s.supply;
        const auto w = static_cast<long double>(dt);
        if (diff > 0) {
            under += w * static_cast<long double>(diff);
            nunder += w * static_cast<long double>(diff) / std::max<long double>(s.demand, epsilon);
        } else if (diff < 0) {
            over += w * static_cast<long double>(-diff);
            nover += w * static_cast<long double>(-diff) / std::max<long double>(s.supply, epsilon);
        }
    });
    const auto total = static_cast<long double>(series.span().ms());
    AccuracyMetrics m;
    m.under = static_cast<double>(under / total);
    m.over = static_cast<double>(over / total);
    m.under_normalized = static_cast<double>(nunder / total);
    m.over_normalized = static_cast<double>(nover / total);
    if (normalize_by && *normalize_by > 0.0) {
        m.under /= *normalize_by;
        m.over /= *normalize_by;
    }
    return m;
}

TimeshareMetrics timeshare_metrics(const SupplyDemandSeries& series, SimTime interval) {
    require_span(series);
    if (interval <= SimTime{})
        throw ValidationError("interval must be > 0");
    std::int64_t under_ms = 0, over_ms = 0;
    std::int64_t over_episodes = 0, under_episodes = 0;
    int prev = 0;
    bool first = true;
    for_each_step(series, [&](const SupplyDemandSample& s, std::int64_t dt) {
        const int sg = sign(s);
        if (sg > 0)
            over_ms += dt;
        else if (sg < 0)
            under_ms += dt;
        if (first || sg != prev) {
            if (sg > 0)
                ++over_episodes;
            else if (sg < 0)
                ++under_episodes;
        }
        prev = sg;
        first = false;
    });
    const auto total = static_cast<double>(series.span().ms());
    const auto iv = static_cast<double>(interval.ms());
    TimeshareMetrics m;
    m.under_pct = 100.0 * static_cast<double>(under_ms) / total;
    m.over_pct = 100.0 * static_cast<double>(over_ms) / total;
    m.k = over_episodes ? static_cast<double>(over_ms) / iv / static_cast<double>(over_episodes) : 0.0;
    m.k_prime = under_episodes ? static_cast<double>(under_ms) / iv / static_cast<double>(under_episodes) : 0.0;
    return m;
}

ResourceMetrics resource_metrics(std::span<const ClusterAccount> clusters, const SupplyDemandSeries& series) {
    require_span(series);
    long double idle = 0, supply = 0;
    for_each_step(series, [&](const SupplyDemandSample& s, std::int64_t dt) {
        idle += static_cast<long double>(dt) * static_cast<long double>(s.supply - s.busy);
        supply += static_cast<long double>(dt) * static_cast<long double>(s.supply);
    });
    const auto total = static_cast<long double>(series.span().ms());

    std::int64_t slots = 0, charged = 0;
    long double busy_ms = 0;
    for (const auto& c : clusters) {
        if (c.episodes == 0)
            continue;
        slots += c.vms;
        charged += c.charged_vm_hours;
        busy_ms += static_cast<long double>(c.busy_vm_ms);
    }
    ResourceMetrics m;
    m.idle_vms = static_cast<double>(idle / total);
    m.mean_supply = static_cast<double>(supply / total);
    if (slots > 0) {
        m.used_hours = static_cast<double>(busy_ms / 3.6e6L / static_cast<long double>(slots));
        m.charged_hours = static_cast<double>(charged) / static_cast<double>(slots);
    }
    return m;
}

double cumulative_delay(std::span<const WorkflowRecord> records) {
    double sum = 0.0;
    for (const auto& r : records)
        sum += std::max(0.0, workflow_metrics(r).response_s - r.critical_path.seconds());
    return sum;
}

WorkloadSummary summarize_workflows(std::span<const WorkflowRecord> records) {
    WorkloadSummary s;
    if (records.empty())
        return s;
    SimTime first_arrival = SimTime::max(), last = SimTime{}, ideal_end = SimTime{};
    for (const auto& r : records) {
        first_arrival = std::min(first_arrival, r.arrival);
        last = std::max(last, r.last_completion);
        ideal_end = std::max(ideal_end, r.arrival + r.critical_path);
    }
    const double ideal_span = (ideal_end - first_arrival).seconds();

    double slow = 0.0;
    std::size_t slow_n = 0;
    for (const auto& r : records) {
        const auto m = workflow_metrics(r);
        s.mean_makespan_s += m.makespan_s;
        s.mean_wait_s += m.wait_s;
        s.mean_response_s += m.response_s;
        s.mean_nsl += m.nsl;
        s.cumulative_delay_s += std::max(0.0, m.response_s - r.critical_path.seconds());
        if (m.slowdown) {
            slow += *m.slowdown;
            ++slow_n;
        }
        if (m.wait_s > ideal_span)
            ++s.long_waits;
    }
    const auto n = static_cast<double>(records.size());
    s.mean_makespan_s /= n;
    s.mean_wait_s /= n;
    s.mean_response_s /= n;
    s.mean_nsl /= n;
    if (slow_n == records.size())
        s.mean_slowdown = slow / n;
    s.makespan_s = (last - first_arrival).seconds();
    s.nsl = ideal_span > 0.0 ? s.makespan_s / ideal_span : 0.0;
    return s;
}

ElasticityReport elasticity_report(const SimulationResult& result, SimTime interval,
                                   std::optional<double> normalize_by) {
    return {accuracy_metrics(result.series, 1.0, normalize_by), timeshare_metrics(result.series, interval),
            resource_metrics(result.clusters, result.series)};
}

} // namespace asflow
