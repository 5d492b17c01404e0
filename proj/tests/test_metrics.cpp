#include <doctest.h>

#include <cmath>

#include "asflow/engine.hpp"
#include "asflow/errors.hpp"
#include "asflow/generators.hpp"
#include "asflow/metrics.hpp"
#include "oracles/integrator.hpp"
#include "support.hpp"

using namespace asflow;

namespace {

SupplyDemandSeries steps(std::initializer_list<std::array<std::int64_t, 3>> rows, std::int64_t end_s) {
    SupplyDemandSeries s;
    for (const auto& r : rows)
        s.samples.push_back({SimTime::from_ms(r[0] * 1000), r[1], r[2], std::min(r[1], r[2])});
    s.end = SimTime::from_ms(end_s * 1000);
    return s;
}

WorkflowRecord record(double arrival, double start, double end, double cp) {
    WorkflowRecord r;
    r.id = 1;
    r.arrival = SimTime::from_seconds(arrival);
    r.first_start = SimTime::from_seconds(start);
    r.last_completion = SimTime::from_seconds(end);
    r.critical_path = SimTime::from_seconds(cp);
    return r;
}

} // namespace

TEST_CASE("workflow metric examples") {
    const auto m = workflow_metrics(record(0, 10, 50, 25));
    CHECK(m.makespan_s == 40.0);
    CHECK(m.wait_s == 10.0);
    CHECK(m.response_s == 50.0);
    CHECK(m.nsl == 2.0);
    CHECK_FALSE(m.slowdown.has_value());

    auto with_base = record(0, 0, 50, 25);
    with_base.baseline_response_s = 25.0;
    CHECK(workflow_metrics(with_base).slowdown == 2.0);

    CHECK_THROWS_AS(workflow_metrics(record(0, 0, 1, 0)), ValidationError);
}

TEST_CASE("accuracy examples") {
    auto a = accuracy_metrics(steps({{0, 5, 5}}, 10));
    CHECK(a == AccuracyMetrics{});

    a = accuracy_metrics(steps({{0, 2, 1}}, 100));
    CHECK(a.over == 1.0);
    CHECK(a.over_normalized == 0.5);
    CHECK(a.under == 0.0);

    a = accuracy_metrics(steps({{0, 0, 0}}, 10));
    CHECK(a.over_normalized == 0.0);
    CHECK(a.under_normalized == 0.0);

    a = accuracy_metrics(steps({{0, 70, 140}}, 10));
    CHECK(a.under == 70.0);
    CHECK(a.under_normalized == 0.5);

    a = accuracy_metrics(steps({{0, 2, 1}}, 100), 1.0, 2.0);
    CHECK(a.over == 0.5);
    CHECK(a.over_normalized == 0.5);

    CHECK_THROWS_AS(accuracy_metrics(SupplyDemandSeries{}), ValidationError);
    CHECK_THROWS_AS(accuracy_metrics(steps({{5, 1, 1}}, 5)), ValidationError);
}

TEST_CASE("timeshare examples") {
    auto t = timeshare_metrics(steps({{0, 2, 1}, {30, 1, 1}}, 100), 10_s);
    CHECK(t.over_pct == 30.0);
    CHECK(t.under_pct == 0.0);
    CHECK(t.k == 3.0);

    t = timeshare_metrics(steps({{0, 2, 1}, {60, 1, 1}, {90, 3, 1}, {210, 1, 1}}, 300), 30_s);
    CHECK(t.k == 3.0);
    CHECK(t.k_prime == 0.0);

    t = timeshare_metrics(steps({{0, 1, 2}, {30, 3, 3}, {60, 1, 4}}, 150), 30_s);
    CHECK(t.k_prime == 2.0);
    CHECK(t.under_pct == 80.0);

    t = timeshare_metrics(steps({{0, 4, 4}}, 60), 30_s);
    CHECK(t == TimeshareMetrics{});
}

TEST_CASE("resource examples") {
    SUBCASE("one idle cluster for an hour") {
        const auto series = steps({{0, 70, 0}}, 3600);
        const std::vector<ClusterAccount> acc{{0, 70, 0, 3'600'000, 70, 1}};
        const auto r = resource_metrics(acc, series);
        CHECK(r.idle_vms == 70.0);
        CHECK(r.mean_supply == 70.0);
        CHECK(r.used_hours == 0.0);
        CHECK(r.charged_hours == 1.0);
    }
    SUBCASE("one VM busy half an hour") {
        const auto series = steps({{0, 1, 1}, {1800, 1, 0}}, 3600);
        const std::vector<ClusterAccount> acc{{0, 1, 1'800'000, 3'600'000, 1, 1}};
        const auto r = resource_metrics(acc, series);
        CHECK(r.used_hours == 0.5);
        CHECK(r.charged_hours == 1.0);
        CHECK(r.used_hours <= r.charged_hours);
    }
    SUBCASE("one of two clusters released at half time") {
        const auto series = steps({{0, 140, 0}, {1800, 70, 0}}, 3600);
        const std::vector<ClusterAccount> acc{{0, 70, 0, 3'600'000, 70, 1}, {1, 70, 0, 1'800'000, 70, 1},
                                              {2, 70, 0, 0, 0, 0}};
        const auto r = resource_metrics(acc, series);
        CHECK(r.mean_supply == 105.0);
        CHECK(r.charged_hours == 1.0);
    }
}

TEST_CASE("cumulative delay") {
    CHECK(cumulative_delay(std::vector<WorkflowRecord>{record(0, 0, 25, 25)}) == 0.0);
    CHECK(cumulative_delay(std::vector<WorkflowRecord>{record(0, 10, 50, 25)}) == 25.0);

    testgen::Rng rng(51);
    for (int i = 0; i < 200; ++i) {
        std::vector<WorkflowRecord> recs;
        double want = 0.0;
        const int n = testgen::uniform(rng, 1, 20);
        for (int k = 0; k < n; ++k) {
            const int arrival = testgen::uniform(rng, 0, 100);
            const int start = arrival + testgen::uniform(rng, 0, 50);
            const int end = start + testgen::uniform(rng, 1, 100);
            const int cp = testgen::uniform(rng, 1, 150);
            recs.push_back(record(arrival, start, end, cp));
            want += std::max(0, end - arrival - cp);
        }
        CHECK(cumulative_delay(recs) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("workload summary") {
    std::vector<WorkflowRecord> recs{record(0, 0, 10, 10), record(5, 10, 20, 5)};
    const auto s = summarize_workflows(recs);
    CHECK(s.makespan_s == 20.0);
    CHECK(s.nsl == 2.0);
    CHECK(s.mean_wait_s == 2.5);
    CHECK(s.mean_response_s == 12.5);
    CHECK(s.cumulative_delay_s == 10.0);
    CHECK(s.long_waits == 0);
    CHECK_FALSE(s.mean_slowdown.has_value());
}

TEST_CASE("integrals agree with the per-millisecond oracle") {
    testgen::Rng rng(52);
    for (int i = 0; i < 200; ++i) {
        const auto series = testgen::random_series(rng, 300, 20, 50);
        const auto o = oracle::integrate_per_ms(series);
        const auto total = static_cast<long double>(o.total_ms);
        const auto a = accuracy_metrics(series);
        CHECK(a.under == doctest::Approx(static_cast<double>(o.under / total)).epsilon(1e-9));
        CHECK(a.over == doctest::Approx(static_cast<double>(o.over / total)).epsilon(1e-9));
        CHECK(a.under_normalized == doctest::Approx(static_cast<double>(o.nunder / total)).epsilon(1e-9));
        CHECK(a.over_normalized == doctest::Approx(static_cast<double>(o.nover / total)).epsilon(1e-9));
        const auto t = timeshare_metrics(series, 30_s);
        CHECK(t.under_pct == doctest::Approx(static_cast<double>(100 * o.under_ms / total)).epsilon(1e-9));
        CHECK(t.over_pct == doctest::Approx(static_cast<double>(100 * o.over_ms / total)).epsilon(1e-9));
        const auto r = resource_metrics({}, series);
        CHECK(r.idle_vms == doctest::Approx(static_cast<double>(o.idle / total)).epsilon(1e-9));
        CHECK(r.mean_supply == doctest::Approx(static_cast<double>(o.supply / total)).epsilon(1e-9));
    }
}

TEST_CASE("metric properties on fuzzed series") {
    testgen::Rng rng(53);
    for (int i = 0; i < 500; ++i) {
        const auto series = testgen::random_series(rng, 60, 5000, 8);
        const auto a = accuracy_metrics(series);
        const auto t = timeshare_metrics(series, 1_s);
        CHECK(a.under_normalized >= 0.0);
        CHECK(a.under_normalized <= 1.0);
        CHECK(a.over_normalized >= 0.0);
        CHECK(a.over_normalized <= 1.0);
        CHECK(t.under_pct + t.over_pct <= 100.0 + 1e-9);
        CHECK((a.under == 0.0) == (a.under_normalized == 0.0));
        CHECK((a.under == 0.0) == (t.under_pct == 0.0));
        CHECK((a.over == 0.0) == (a.over_normalized == 0.0));
        CHECK((a.over == 0.0) == (t.over_pct == 0.0));
        CHECK((t.k == 0.0) == (t.over_pct == 0.0));
        CHECK((t.k_prime == 0.0) == (t.under_pct == 0.0));
    }
}

TEST_CASE("simulated runs satisfy the metric identities") {
    const auto trace = preset_trace("chronos_varied");
    EngineConfig cfg;
    cfg.clusters = 8;
    cfg.max_clusters = 30;
    for (auto k : all_provisioning_policies()) {
        CAPTURE(to_string(k));
        const auto r = run(cfg, trace, k);
        for (const auto& rec : r.workflows) {
            const auto m = workflow_metrics(rec);
            CHECK(m.response_s == m.makespan_s + m.wait_s);
            CHECK(m.nsl == m.response_s / rec.critical_path.seconds());
            CHECK(m.nsl >= 1.0);
        }
        // Accounted VM time never exceeds charged VM time, per cluster.
        for (const auto& c : r.clusters) {
            CHECK(c.busy_vm_ms <= c.allocated_ms * c.vms);
            CHECK(c.allocated_ms * c.vms <= c.charged_vm_hours * 3'600'000);
        }
        const auto e = elasticity_report(r, cfg.interval);
        CHECK(e.resources.used_hours <= e.resources.charged_hours);
        CHECK(e.accuracy.over_normalized <= 1.0);
    }
}
