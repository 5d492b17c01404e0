#include <doctest.h>

#include <algorithm>

#include "asflow/errors.hpp"
#include "asflow/generators.hpp"
#include "asflow/workload.hpp"
#include "oracles/longest_path.hpp"
#include "support.hpp"

using namespace asflow;
using testgen::make_task;
using testgen::make_trace;
using testgen::make_workflow;

TEST_CASE("parse_trace accepts a minimal document") {
    const auto trace = parse_trace(R"({"name":"one","workflows":[{"id":1,"submit_time_s":0,"chained_after":null,
        "tasks":[{"id":7,"runtime_s":10,"cpus":1,"parents":[]}]}]})");
    CHECK(trace.totals() == TraceTotals{1, 1});
    CHECK(trace.workflows[0].tasks[0].runtime == 10_s);
}

TEST_CASE("parse_trace rejects malformed graphs") {
    SUBCASE("mutual parents") {
        CHECK_THROWS_WITH_AS(parse_trace(R"({"name":"c","workflows":[{"id":3,"submit_time_s":0,"chained_after":null,
            "tasks":[{"id":1,"runtime_s":1,"cpus":1,"parents":[2]},{"id":2,"runtime_s":1,"cpus":1,"parents":[1]}]}]})"),
                             "cyclic workflow 3", ValidationError);
    }
    SUBCASE("unknown parent") {
        try {
            parse_trace(R"({"name":"d","workflows":[{"id":3,"submit_time_s":0,"chained_after":null,
                "tasks":[{"id":1,"runtime_s":1,"cpus":1,"parents":[9]}]}]})");
            FAIL("expected a dangling edge error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("dangling edge") != std::string::npos);
        }
    }
    SUBCASE("non-positive runtime") {
        try {
            parse_trace(R"({"name":"r","workflows":[{"id":3,"submit_time_s":0,"chained_after":null,
                "tasks":[{"id":1,"runtime_s":0,"cpus":1,"parents":[]}]}]})");
            FAIL("expected an invalid task error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("invalid task") != std::string::npos);
        }
    }
    SUBCASE("chain to an unknown workflow") {
        CHECK_THROWS_AS(parse_trace(R"({"name":"r","workflows":[{"id":3,"submit_time_s":0,"chained_after":4,
                "tasks":[{"id":1,"runtime_s":1,"cpus":1,"parents":[]}]}]})"),
                        ValidationError);
    }
    SUBCASE("not json") { CHECK_THROWS_AS(parse_trace("{"), ValidationError); }
}

TEST_CASE("serialize/parse round-trips random traces") {
    testgen::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        testgen::TraceShape shape;
        shape.max_cpus = 4;
        shape.max_tasks = 20;
        const auto trace = testgen::random_trace(rng, shape);
        CHECK(parse_trace(serialize_trace(trace)) == trace);
    }
    const auto chronos = generate_chronos();
    CHECK(parse_trace(serialize_trace(chronos)) == chronos);
}

TEST_CASE("critical_path examples") {
    CHECK(critical_path(make_workflow(1, 0, {make_task(1, 1, 10)})) == 10_s);
    CHECK(critical_path(make_workflow(1, 0, {make_task(1, 1, 5), make_task(2, 1, 5, 1, {1}),
                                            make_task(3, 1, 5, 1, {2})})) == 15_s);
    const auto diamond = make_workflow(1, 0, {make_task(1, 1, 1), make_task(2, 1, 2, 1, {1}),
                                              make_task(3, 1, 3, 1, {1}), make_task(4, 1, 1, 1, {2, 3})});
    CHECK(critical_path(diamond) == 5_s);
    CHECK(oracle::longest_path_ms(diamond) == 5000);
}

TEST_CASE("critical_path equals brute-force path enumeration on small DAGs") {
    testgen::Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
        const int n = testgen::uniform(rng, 1, 12);
        const double p = std::uniform_real_distribution<double>(0.0, 0.8)(rng);
        auto wf = testgen::random_workflow(rng, 1, 100, n, 20, 1, p);
        // Shuffle so that file order is not topological.
        std::shuffle(wf.tasks.begin(), wf.tasks.end(), rng);
        REQUIRE(critical_path(wf).ms() == oracle::longest_path_ms(wf));
        const WorkloadIndex index(make_trace({wf}));
        CHECK(index.workflow(0).critical_path == critical_path(wf));
    }
}

TEST_CASE("eligible_tasks") {
    const auto chain = make_workflow(1, 0, {make_task(1, 1, 5), make_task(2, 1, 5, 1, {1}),
                                            make_task(3, 1, 5, 1, {2})});
    CHECK(eligible_tasks(chain, {}, 0_s, std::nullopt) == std::vector<TaskId>{1});

    const auto diamond = make_workflow(1, 0, {make_task(1, 1, 1), make_task(2, 1, 2, 1, {1}),
                                              make_task(3, 1, 3, 1, {1}), make_task(4, 1, 1, 1, {2, 3})});
    CHECK(eligible_tasks(diamond, {{1, 1_s}}, 1_s, std::nullopt) == std::vector<TaskId>{2, 3});

    auto chained = make_workflow(2, 0, {make_task(9, 2, 1)});
    chained.chained_after = 1;
    CHECK(eligible_tasks(chained, {}, 5_s, std::nullopt).empty());
    CHECK(eligible_tasks(chained, {}, 5_s, 3_s) == std::vector<TaskId>{9});

    const auto late = make_workflow(3, 100, {make_task(5, 3, 1)});
    CHECK(eligible_tasks(late, {}, 50_s, std::nullopt).empty());
}

TEST_CASE("chronos generator") {
    const auto trace = generate_chronos();
    CHECK(trace.totals() == TraceTotals{1024, 3072});
    const auto at_540 = std::count_if(trace.workflows.begin(), trace.workflows.end(),
                                      [](const Workflow& w) { return w.submit_time == 540_s; });
    CHECK(at_540 == 512);
    CHECK(peak_tasks_per_minute(trace) == 1536);

    ChronosSpec flat;
    flat.tasks_per_workflow = 1;
    flat.levels = 1;
    const auto single = generate_chronos(flat);
    CHECK(single.totals() == TraceTotals{1024, 1024});
    CHECK(std::none_of(single.workflows.begin(), single.workflows.end(),
                       [](const Workflow& w) { return w.chained_after.has_value(); }));

    ChronosSpec bad;
    bad.levels = 0;
    CHECK_THROWS_AS(generate_chronos(bad), ValidationError);
}

TEST_CASE("chronos levels chain consecutive workflows") {
    const auto trace = generate_chronos();
    for (const auto& wf : trace.workflows) {
        if (wf.id % 3 == 0)
            CHECK_FALSE(wf.chained_after.has_value());
        else
            CHECK(wf.chained_after == wf.id - 1);
    }
}

TEST_CASE("scale_to_peak and duplicate_trace") {
    const auto chronos = generate_chronos();
    CHECK(peak_scale_factor(chronos, 24'000) == 16);
    CHECK(peak_scale_factor(chronos, 24'000, 22) == 22);
    CHECK(peak_scale_factor(chronos, 1536) == 1);
    CHECK(scale_to_peak(chronos, 1536) == chronos);

    CHECK(duplicate_trace(chronos, 1) == chronos);
    const auto twice = duplicate_trace(chronos, 2);
    CHECK(twice.totals() == TraceTotals{2048, 6144});
    CHECK_NOTHROW(validate_trace(twice));
    CHECK(twice.workflows[1024].submit_time == chronos.workflows[0].submit_time);
    CHECK(twice.cpu_seconds() == doctest::Approx(2 * chronos.cpu_seconds()));

    CHECK(duplicated_totals({3551, 122'105}, 975).tasks == 119'052'375);
    CHECK_THROWS_AS(duplicate_trace(chronos, 0), ValidationError);
}

TEST_CASE("cpu-seconds scale linearly under duplication") {
    testgen::Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        testgen::TraceShape shape;
        shape.max_cpus = 3;
        const auto trace = testgen::random_trace(rng, shape);
        const int n = testgen::uniform(rng, 1, 6);
        CHECK(duplicate_trace(trace, n).cpu_seconds() == doctest::Approx(n * trace.cpu_seconds()));
    }
}

TEST_CASE("burst generator") {
    BurstSpec spec;
    spec.tasks = 24'000;
    const auto burst = generate_burst(spec);
    CHECK(burst.totals().tasks == 24'000);
    CHECK(peak_tasks_per_minute(burst) == 24'000);
    CHECK(tasks_per_minute(burst).size() == 1);

    BurstSpec one;
    one.tasks = 1;
    CHECK(generate_burst(one).totals() == TraceTotals{1, 1});

    CHECK(serialize_trace(generate_burst(spec)) == serialize_trace(burst));
    spec.seed = 43;
    CHECK(serialize_trace(generate_burst(spec)) != serialize_trace(burst));
}

TEST_CASE("burst presets are valid traces") {
    for (const char* name : {"ee2_burst", "askalon_ee", "spec_scientific", "chronos_varied"}) {
        CAPTURE(name);
        const auto trace = preset_trace(name);
        CHECK_NOTHROW(validate_trace(trace));
    }
    CHECK(preset_trace("ee2_burst").totals().tasks == 24'000);
    CHECK(preset_trace("askalon_ee").totals() == TraceTotals{757, 45'786});
    CHECK(preset_trace("askalon_ee2").totals() == TraceTotals{3551, 122'105});
    CHECK(preset_trace("chronos_varied").totals() == TraceTotals{1024, 3072});
    CHECK_THROWS_AS(preset_trace("nope"), ValidationError);
}

TEST_CASE("workload index keeps workflows contiguous and topologically ordered") {
    testgen::Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        testgen::TraceShape shape;
        shape.max_tasks = 30;
        shape.edge_p = 0.5;
        auto trace = testgen::random_trace(rng, shape);
        for (auto& wf : trace.workflows)
            std::shuffle(wf.tasks.begin(), wf.tasks.end(), rng);
        const WorkloadIndex index(trace);
        REQUIRE(index.tasks().size() == static_cast<std::size_t>(trace.totals().tasks));
        for (std::uint32_t w = 0; w < index.workflows().size(); ++w)
            for (const auto& t : index.tasks_of(w)) {
                CHECK(t.workflow == w);
                for (auto p : t.parents)
                    CHECK(&index.task(p) < &t);
            }
    }
}
