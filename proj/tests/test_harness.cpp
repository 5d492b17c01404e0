#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asflow/errors.hpp"
#include "asflow/generators.hpp"
#include "asflow/harness.hpp"
#include "support.hpp"

using namespace asflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("asflow_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(ASFLOW_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.name = "tiny";
    c.trace.kind = TraceSourceKind::Chronos;
    c.trace.chronos.minutes = 5;
    c.clusters = 2;
    c.max_clusters = 4;
    c.vms_per_cluster = 10;
    return c;
}

} // namespace

TEST_CASE("infrastructure sizing") {
    CHECK(size_infrastructure(2'823'758.0, 2998.0, 0.7, 70) == 20);
    CHECK(size_infrastructure(1.0, 1000.0, 0.7, 70) == 1);
    CHECK(size_infrastructure(70.0 * 100.0, 100.0, 1.0, 70) == 1);
    CHECK(size_infrastructure(70.0 * 100.0 + 1.0, 100.0, 1.0, 70) == 2);
    CHECK_THROWS_AS(size_infrastructure(100.0, 0.0, 0.7, 70), ValidationError);
    CHECK_THROWS_AS(size_infrastructure(100.0, 10.0, 0.0, 70), ValidationError);
    CHECK_THROWS_AS(size_infrastructure(100.0, 10.0, 1.5, 70), ValidationError);

    const auto chronos = generate_chronos();
    CHECK(ideal_span_seconds(chronos) == doctest::Approx(540.0 + 180.0));
    CHECK(size_infrastructure(chronos, 0.7, 70) ==
          static_cast<int>(std::ceil(chronos.cpu_seconds() / (720.0 * 0.7 * 70))));
}

TEST_CASE("sizing is monotone in utilization and inversely proportional") {
    testgen::Rng rng(61);
    for (int i = 0; i < 100; ++i) {
        testgen::TraceShape shape;
        shape.max_tasks = 40;
        shape.max_cpus = 4;
        shape.max_runtime_s = 600;
        const auto trace = testgen::random_trace(rng, shape);
        const double load = trace.cpu_seconds();
        const double span = ideal_span_seconds(trace);
        const int vms = testgen::uniform(rng, 1, 8);
        int prev = std::numeric_limits<int>::max();
        for (int k = 1; k <= 10; ++k) {
            const double u = k / 10.0;
            const int n = size_infrastructure(trace, u, vms);
            CHECK(n <= prev);
            prev = n;
            const double exact = load / (span * u * vms);
            CHECK(n >= exact - 1e-9);
            CHECK(n < std::max(1.0, exact) + 1.0);
        }
        // Halving the utilization doubles the unrounded requirement.
        const double a = load / (span * 0.8 * vms), b = load / (span * 0.4 * vms);
        CHECK(b == doctest::Approx(2 * a));
    }
}

TEST_CASE("experiment config parsing") {
    const auto c = parse_experiment_config(R"({
        "name": "x", "trace": {"generator": "chronos", "params": {"minutes": 4, "runtime_sigma": 0.5}},
        "clusters": 3, "max_clusters": 6, "autoscaling_interval": 15, "autoscaler": "plan",
        "allocator": "bestfit", "tunables": {"history_window": 10}, "utilization": 0.5})");
    CHECK(c.name == "x");
    CHECK(c.trace.kind == TraceSourceKind::Chronos);
    CHECK(c.trace.chronos.minutes == 4);
    CHECK(c.clusters == 3);
    CHECK(c.autoscaling_interval_s == 15.0);
    CHECK(c.tunables.history_window == 10);
    CHECK(c.utilization == 0.5);
    CHECK(parse_experiment_config(experiment_config_to_json(c)).trace.chronos.runtime_sigma == 0.5);
    CHECK(experiment_config_to_json(parse_experiment_config(experiment_config_to_json(c))) ==
          experiment_config_to_json(c));

    CHECK_THROWS_AS(parse_experiment_config(R"({"clusters": 0})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"autoscaling_interval": 0})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"autoscaler": "magic"})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"utilization": 1.2})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"clusters": "two"})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"tunables": {"history_window": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config("[1,"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("trace sources") {
    TraceSource src;
    src.kind = TraceSourceKind::Preset;
    src.name = "chronos";
    src.scale_reference = 24'000.0;
    src.scale_override = 22;
    CHECK(build_trace(src, 42).totals() == TraceTotals{1024 * 22, 3072 * 22});

    const auto dir = scratch("trace_file");
    save_trace(generate_chronos(), dir / "t.json");
    const auto c = parse_experiment_config(R"({"trace": {"file": "t.json"}})", dir);
    CHECK(build_trace(c.trace, 1) == generate_chronos());
}

TEST_CASE("sweep expansion") {
    CHECK(expand_sweep(sweep_preset("utilization")).size() == 63);
    CHECK(expand_sweep(sweep_preset("allocation")).size() == 21);
    CHECK(expand_sweep(sweep_preset("domain")).size() == 42);
    CHECK(expand_sweep(sweep_preset("bursty")).size() == 14);
    CHECK(expand_sweep(sweep_preset("at_scale")).size() == 3);
    CHECK_THROWS_AS(sweep_preset("huge"), ValidationError);

    SweepSpec empty;
    empty.base = tiny_config();
    const auto cells = expand_sweep(empty);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].config.autoscaler == "react");

    const auto spec = parse_sweep_spec(R"({"base": {"clusters": 2}, "autoscalers": ["react", "plan"],
        "allocators": ["bestfit"], "utilizations": [0.5, 0.9],
        "workloads": ["chronos", {"name": "w", "trace": {"preset": "askalon_ee"}, "clusters": 7}]})");
    const auto grid = expand_sweep(spec);
    CHECK(grid.size() == 8);
    CHECK(grid.front().workload_label == "chronos");
    CHECK(grid.front().config.utilization == 0.5);
    CHECK(grid.back().config.autoscaler == "plan");
    CHECK(grid.back().config.clusters == 7);
}

TEST_CASE("experiment reports") {
    auto c = tiny_config();
    c.autoscaler = "plan";
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    CHECK(a.report == b.report);
    CHECK(a.report.summary.mean_slowdown.has_value());
    CHECK(a.report.instructions > 0);

    c.autoscaler = "static";
    c.max_clusters = 0;
    const auto s = run_experiment(c);
    CHECK(s.report.summary.mean_slowdown == 1.0);

    const std::vector<MetricReport> reports{a.report, s.report};
    CHECK(reports_from_json(reports_to_json(reports)) == reports);
    CHECK(reports_to_csv(reports) == reports_to_csv(reports_from_json(reports_to_json(reports))));

    const auto csv = reports_to_csv(reports);
    CHECK(csv.substr(0, csv.find('\n')).find("A_U,A_O,nA_U,nA_O,T_U,T_O,k,kp,M_U,V_bar,h_bar,C_bar") !=
          std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("emitted reports are byte-identical across runs") {
    SweepSpec spec;
    spec.base = tiny_config();
    spec.autoscalers = {"react", "hist", "token"};
    spec.allocators = {"fillworstfit", "bestfit"};
    spec.jobs = 3;
    const auto d1 = scratch("emit1"), d2 = scratch("emit2");
    auto collect = [](const std::vector<ExperimentOutcome>& out) {
        std::vector<MetricReport> r;
        for (const auto& o : out)
            r.push_back(o.report);
        return r;
    };
    emit_report(collect(run_sweep(spec)), d1);
    spec.jobs = 1;
    emit_report(collect(run_sweep(spec)), d2);
    CHECK(slurp(d1 / "report.csv") == slurp(d2 / "report.csv"));
    CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
    CHECK_FALSE(slurp(d1 / "report.csv").empty());
}

TEST_CASE("io errors") {
    const auto dir = scratch("io");
    write_text(dir / "blocker", "x");
    MetricReport r;
    r.workload = "w";
    CHECK_THROWS_AS(emit_report({r}, dir / "blocker" / "sub"), IoError);
    CHECK_THROWS_AS(load_trace(dir / "missing.json"), IoError);
}

TEST_CASE("a failing cell does not stop the sweep") {
    SweepSpec spec;
    spec.base = tiny_config();
    spec.base.vms_per_cluster = 2;
    WorkloadEntry ok;
    ok.label = "ok";
    ok.trace.kind = TraceSourceKind::Chronos;
    ok.trace.chronos.minutes = 3;
    WorkloadEntry wide = ok;
    wide.label = "wide";
    wide.trace.chronos.cpus = 4;
    WorkloadEntry missing;
    missing.label = "missing";
    missing.trace.kind = TraceSourceKind::File;
    missing.trace.name = "/nonexistent/trace.json";
    spec.workloads = {wide, ok, missing};
    spec.autoscalers = {"react", "adapt"};
    const auto out = run_sweep(spec);
    REQUIRE(out.size() == 6);
    for (const auto& o : out) {
        CAPTURE(o.report.workload);
        CHECK(o.report.error.has_value() == (o.report.workload != "ok"));
    }
    const auto csv = reports_to_csv({out[0].report});
    CHECK(csv.find("can never run") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    const auto dir = scratch("cli");
    const auto cfg = dir / "cfg.json";
    write_text(cfg, experiment_config_to_json(tiny_config()));
    CHECK(cli("run --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "report.csv"));
    CHECK(cli("run --config " + cfg.string() + " --autoscaler nope") == 1);
    CHECK(cli("run --config " + (dir / "none.json").string()) == 3);
    CHECK(cli("frobnicate") == 1);

    write_text(dir / "bad.json", R"({"clusters": 0})");
    CHECK(cli("run --config " + (dir / "bad.json").string()) == 1);

    CHECK(cli("gen chronos --minutes 4 --out " + (dir / "c.json").string()) == 0);
    CHECK(cli("validate --trace " + (dir / "c.json").string()) == 0);
    CHECK(cli("size --trace " + (dir / "c.json").string() + " --utilization 0.7") == 0);
    CHECK(cli("size --trace " + (dir / "c.json").string() + " --utilization 0") == 1);
    CHECK(cli("gen burst --preset ee2_burst --tasks 5 --out " + (dir / "b.json").string()) == 1);
    CHECK(cli("gen burst --preset askalon_ee --seed 3 --out " + (dir / "b.json").string()) == 0);

    write_text(dir / "sweep.json", R"({"base": {"clusters": 1, "vms_per_cluster": 2,
        "trace": {"generator": "chronos", "params": {"minutes": 3, "cpus": 4}}}, "output": "res"})");
    CHECK(cli("sweep --spec " + (dir / "sweep.json").string()) == 2);
    CHECK(fs::exists(dir / "res" / "report.json"));
}
