#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "asflow/errors.hpp"
#include "asflow/generators.hpp"
#include "asflow/harness.hpp"

using namespace asflow;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kIo = 3 };

int cmd_run(const std::string& config_path, const std::string& autoscaler, const std::string& allocator,
            const std::string& out_dir) {
    auto config = load_experiment_config(config_path);
    if (!autoscaler.empty()) {
        autoscaler_kind_from_string(autoscaler);
        config.autoscaler = autoscaler;
    }
    if (!allocator.empty()) {
        allocation_policy_from_string(allocator);
        config.allocator = allocator;
    }
    const auto outcome = run_experiment(config);
    const std::vector<MetricReport> reports{outcome.report};
    if (out_dir.empty())
        std::cout << reports_to_csv(reports);
    else
        emit_report(reports, out_dir);
    fmt::print(stderr, "wall time {:.3f} s\n", outcome.wall_time_s);
    return kOk;
}

int cmd_sweep(const std::string& spec_path, const std::string& preset, double scale, int jobs,
              const std::string& out_dir) {
    SweepSpec spec = spec_path.empty() ? sweep_preset(preset, scale) : load_sweep_spec(spec_path);
    if (jobs >= 0)
        spec.jobs = jobs;
    if (!out_dir.empty())
        spec.output = out_dir;
    if (spec.output.empty())
        spec.output = "results";

    const auto outcomes = run_sweep(spec);
    std::vector<MetricReport> reports;
    int failed = 0;
    double wall = 0.0;
    for (const auto& o : outcomes) {
        reports.push_back(o.report);
        wall += o.wall_time_s;
        if (o.report.error) {
            ++failed;
            fmt::print(stderr, "cell {}/{}/{} failed: {}\n", o.report.workload, o.report.autoscaler,
                       o.report.allocator, *o.report.error);
        }
    }
    emit_report(reports, spec.output);
    if (spec.dump_supply)
        write_text(std::filesystem::path(spec.output) / "supply.csv", supply_dump_csv(outcomes));
    fmt::print("{} cells, {} failed, reports in {}\n", outcomes.size(), failed, spec.output);
    fmt::print(stderr, "cell wall time {:.3f} s\n", wall);
    return failed ? kRuntime : kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven simulator for workflow autoscaling policies"};
    app.require_subcommand(1);

    std::string config_path, autoscaler, allocator, out_dir;
    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--autoscaler", autoscaler, "Override the autoscaler");
    run->add_option("--allocator", allocator, "Override the allocation policy");
    run->add_option("--out", out_dir, "Directory for report.csv and report.json (default: CSV to stdout)");

    std::string spec_path, preset;
    double scale = 1e-3;
    int jobs = -1;
    auto* sweep = app.add_subcommand("sweep", "Run a sweep of experiments");
    auto* spec_opt = sweep->add_option("--spec", spec_path, "Sweep spec (JSON)");
    sweep->add_option("--preset", preset, "domain | bursty | allocation | utilization | at_scale")
        ->excludes(spec_opt);
    sweep->add_option("--scale", scale, "Scale factor for the at_scale preset");
    sweep->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
    sweep->add_option("--out", out_dir, "Output directory override");

    std::string trace_path;
    double utilization = 0.7;
    int vms = 70;
    auto* size = app.add_subcommand("size", "Clusters needed for a target utilization");
    size->add_option("--trace", trace_path, "Trace file")->required();
    size->add_option("--utilization", utilization, "Target utilization in (0, 1]")->required();
    size->add_option("--vms-per-cluster", vms, "VMs per cluster");

    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
    gen->require_subcommand(1);
    ChronosSpec chronos;
    auto* gen_chronos = gen->add_subcommand("chronos", "Exponential-arrival sensor workload");
    gen_chronos->add_option("--tasks-per-workflow", chronos.tasks_per_workflow);
    gen_chronos->add_option("--runtime", chronos.runtime_s, "Task runtime in seconds");
    gen_chronos->add_option("--cpus", chronos.cpus);
    gen_chronos->add_option("--levels", chronos.levels);
    gen_chronos->add_option("--minutes", chronos.minutes);
    gen_chronos->add_option("--out", gen_out, "Output trace file")->required();

    BurstSpec burst;
    std::string burst_preset, shape;
    auto* gen_burst = gen->add_subcommand("burst", "Burst-shaped workload");
    gen_burst->add_option("--preset", burst_preset, "askalon_ee | askalon_ee2 | ee2_burst | spec_scientific");
    gen_burst->add_option("--name", burst.name);
    gen_burst->add_option("--tasks", burst.tasks);
    gen_burst->add_option("--workflows", burst.workflows);
    gen_burst->add_option("--tasks-per-workflow", burst.tasks_per_workflow);
    gen_burst->add_option("--window", burst.burst_window_s, "Burst window in seconds");
    gen_burst->add_option("--tail-tasks", burst.tail_tasks);
    gen_burst->add_option("--tail-workflows", burst.tail_workflows);
    gen_burst->add_option("--tail-span", burst.tail_span_s, "Tail span in seconds");
    gen_burst->add_option("--shape", shape, "chain | forkjoin | bag");
    gen_burst->add_option("--runtime-median", burst.runtime_median_s);
    gen_burst->add_option("--runtime-sigma", burst.runtime_sigma);
    gen_burst->add_option("--cpus", burst.cpus);
    gen_burst->add_option("--seed", burst.seed);
    gen_burst->add_option("--out", gen_out, "Output trace file")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Validate a trace file");
    validate->add_option("--trace", validate_path, "Trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*run)
            return cmd_run(config_path, autoscaler, allocator, out_dir);
        if (*sweep) {
            if (spec_path.empty() && preset.empty())
                throw ValidationError("sweep needs --spec or --preset");
            return cmd_sweep(spec_path, preset, scale, jobs, out_dir);
        }
        if (*size) {
            fmt::print("{}\n", size_infrastructure(load_trace(trace_path), utilization, vms));
            return kOk;
        }
        if (*gen_chronos) {
            save_trace(generate_chronos(chronos), gen_out);
            return kOk;
        }
        if (*gen_burst) {
            if (!burst_preset.empty()) {
                // A preset fixes every shape parameter; only the seed may vary.
                for (auto* opt : gen_burst->get_options())
                    if (opt->count() > 0 && opt->get_name() != "--preset" && opt->get_name() != "--out" &&
                        opt->get_name() != "--seed")
                        throw ValidationError("--preset cannot be combined with shape flags");
                burst = preset_burst_spec(burst_preset, burst.seed);
            }
            if (!shape.empty())
                burst.shape = dag_shape_from_string(shape);
            save_trace(generate_burst(burst), gen_out);
            return kOk;
        }
        if (*validate) {
            const auto trace = load_trace(validate_path);
            const auto totals = trace.totals();
            fmt::print("{}: {} workflows, {} tasks, {:.1f} CPU-seconds\n", trace.name, totals.workflows,
                       totals.tasks, trace.cpu_seconds());
            return kOk;
        }
    } catch (const ValidationError& e) {
        fmt::print(stderr, "validation error: {}\n", e.what());
        return kValidation;
    } catch (const IoError& e) {
        fmt::print(stderr, "io error: {}\n", e.what());
        return kIo;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kRuntime;
    }
    return kOk;
}
