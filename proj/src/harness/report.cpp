#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "asflow/errors.hpp"
#include "asflow/harness.hpp"

namespace asflow {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kHeader =
    "workload,autoscaler,allocator,clusters,vms_per_cluster,utilization,"
    "A_U,A_O,nA_U,nA_O,T_U,T_O,k,kp,M_U,V_bar,h_bar,C_bar,"
    "M_mean,W_mean,R_mean,NSL_mean,S_mean,workload_makespan,workload_nsl,cumulative_delay,"
    "I,D_peak,long_waits,error";

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

// RFC 4180 quoting for free-text fields.
std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace

std::string reports_to_csv(const std::vector<MetricReport>& reports) {
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : reports) {
        const auto& a = r.elasticity.accuracy;
        const auto& t = r.elasticity.timeshare;
        const auto& m = r.elasticity.resources;
        const auto& s = r.summary;
        out += fmt::format("{},{},{},{},{},{},", quoted(r.workload), r.autoscaler, r.allocator, r.clusters,
                           r.vms_per_cluster, opt(r.utilization));
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},", num(a.under), num(a.over), num(a.under_normalized),
                           num(a.over_normalized), num(t.under_pct), num(t.over_pct), num(t.k), num(t.k_prime),
                           num(m.idle_vms), num(m.mean_supply), num(m.used_hours), num(m.charged_hours));
        out += fmt::format("{},{},{},{},{},{},{},{},", num(s.mean_makespan_s), num(s.mean_wait_s),
                           num(s.mean_response_s), num(s.mean_nsl), opt(s.mean_slowdown), num(s.makespan_s),
                           num(s.nsl), num(s.cumulative_delay_s));
        out += fmt::format("{},{},{},{}\n", r.instructions, r.peak_data_items, s.long_waits,
                           quoted(r.error.value_or("")));
    }
    return out;
}

std::string reports_to_json(const std::vector<MetricReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        const auto& a = r.elasticity.accuracy;
        const auto& t = r.elasticity.timeshare;
        const auto& m = r.elasticity.resources;
        const auto& s = r.summary;
        ordered_json j;
        j["name"] = r.name;
        j["workload"] = r.workload;
        j["autoscaler"] = r.autoscaler;
        j["allocator"] = r.allocator;
        j["clusters"] = r.clusters;
        j["vms_per_cluster"] = r.vms_per_cluster;
        j["utilization"] = opt_json(r.utilization);
        j["elasticity"] = ordered_json{{"A_U", a.under},       {"A_O", a.over},          {"nA_U", a.under_normalized},
                                       {"nA_O", a.over_normalized}, {"T_U", t.under_pct}, {"T_O", t.over_pct},
                                       {"k", t.k},             {"kp", t.k_prime},        {"M_U", m.idle_vms},
                                       {"V_bar", m.mean_supply},    {"h_bar", m.used_hours},
                                       {"C_bar", m.charged_hours}};
        j["workflows"] = ordered_json{{"M_mean", s.mean_makespan_s},
                                      {"W_mean", s.mean_wait_s},
                                      {"R_mean", s.mean_response_s},
                                      {"NSL_mean", s.mean_nsl},
                                      {"S_mean", opt_json(s.mean_slowdown)},
                                      {"workload_makespan", s.makespan_s},
                                      {"workload_nsl", s.nsl},
                                      {"cumulative_delay", s.cumulative_delay_s},
                                      {"long_waits", s.long_waits}};
        j["scale"] = ordered_json{{"I", r.instructions}, {"D_peak", r.peak_data_items}};
        j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<MetricReport> reports_from_json(const std::string& document) {
    try {
        const auto arr = json::parse(document);
        std::vector<MetricReport> out;
        for (const auto& j : arr) {
            MetricReport r;
            r.name = j.at("name").get<std::string>();
            r.workload = j.at("workload").get<std::string>();
            r.autoscaler = j.at("autoscaler").get<std::string>();
            r.allocator = j.at("allocator").get<std::string>();
            r.clusters = j.at("clusters").get<int>();
            r.vms_per_cluster = j.at("vms_per_cluster").get<int>();
            r.utilization = opt_double(j, "utilization");
            const auto& e = j.at("elasticity");
            auto& a = r.elasticity.accuracy;
            auto& t = r.elasticity.timeshare;
            auto& m = r.elasticity.resources;
            a.under = e.at("A_U").get<double>();
            a.over = e.at("A_O").get<double>();
            a.under_normalized = e.at("nA_U").get<double>();
            a.over_normalized = e.at("nA_O").get<double>();
            t.under_pct = e.at("T_U").get<double>();
            t.over_pct = e.at("T_O").get<double>();
            t.k = e.at("k").get<double>();
            t.k_prime = e.at("kp").get<double>();
            m.idle_vms = e.at("M_U").get<double>();
            m.mean_supply = e.at("V_bar").get<double>();
            m.used_hours = e.at("h_bar").get<double>();
            m.charged_hours = e.at("C_bar").get<double>();
            const auto& w = j.at("workflows");
            auto& s = r.summary;
            s.mean_makespan_s = w.at("M_mean").get<double>();
            s.mean_wait_s = w.at("W_mean").get<double>();
            s.mean_response_s = w.at("R_mean").get<double>();
            s.mean_nsl = w.at("NSL_mean").get<double>();
            s.mean_slowdown = opt_double(w, "S_mean");
            s.makespan_s = w.at("workload_makespan").get<double>();
            s.nsl = w.at("workload_nsl").get<double>();
            s.cumulative_delay_s = w.at("cumulative_delay").get<double>();
            s.long_waits = w.at("long_waits").get<std::int64_t>();
            r.instructions = j.at("scale").at("I").get<std::uint64_t>();
            r.peak_data_items = j.at("scale").at("D_peak").get<std::int64_t>();
            if (j.contains("error") && !j.at("error").is_null())
                r.error = j.at("error").get<std::string>();
            out.push_back(std::move(r));
        }
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed report document: {}", e.what()));
    }
}

std::string supply_dump_csv(const std::vector<ExperimentOutcome>& outcomes) {
    std::string out = "workload,autoscaler,allocator,t_s,supply,demand\n";
    for (const auto& o : outcomes) {
        const auto& r = o.report;
        for (const auto& s : o.series.samples)
            out += fmt::format("{},{},{},{:.3f},{},{}\n", quoted(r.workload), r.autoscaler, r.allocator,
                               s.t.seconds(), s.supply, s.demand);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(fmt::format("cannot write {}", path.string()));
    out << text;
    out.flush();
    if (!out)
        throw IoError(fmt::format("failed writing {}", path.string()));
}

void emit_report(const std::vector<MetricReport>& reports, const std::filesystem::path& dir,
                 const std::string& stem) {
    if (reports.empty())
        throw ValidationError("no reports to emit");
    write_text(dir / (stem + ".csv"), reports_to_csv(reports));
    write_text(dir / (stem + ".json"), reports_to_json(reports));
}

} // namespace asflow
