#include <algorithm>

#include <fmt/format.h>

#include "asflow/engine.hpp"
#include "asflow/errors.hpp"

namespace asflow {

ProvisioningCommands apply_provisioning(std::span<const ClusterStatus> clusters, std::int64_t target_vms,
                                        int vms_per_cluster, int max_clusters) {
    ProvisioningCommands cmd;
    const std::int64_t vms = std::max(1, vms_per_cluster);
    const std::int64_t target = std::max<std::int64_t>(0, target_vms);
    const std::int64_t cap = std::max(1, std::min<int>(max_clusters, static_cast<int>(clusters.size())));
    cmd.desired_clusters = static_cast<int>(std::min(cap, std::max<std::int64_t>(1, (target + vms - 1) / vms)));

    std::vector<ClusterStatus> sorted(clusters.begin(), clusters.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    const auto allocated =
        static_cast<int>(std::count_if(sorted.begin(), sorted.end(), [](const auto& c) { return c.allocated; }));

    if (allocated < cmd.desired_clusters) {
        int need = cmd.desired_clusters - allocated;
        for (const auto& c : sorted) {
            if (need == 0)
                break;
            if (!c.allocated) {
                cmd.allocate.push_back(c.id);
                --need;
            }
        }
    } else if (allocated > cmd.desired_clusters) {
        int excess = allocated - cmd.desired_clusters;
        for (const auto& c : sorted) {
            if (excess == 0)
                break;
            if (c.allocated && c.idle) {
                cmd.deallocate.push_back(c.id);
                --excess;
            }
        }
    }
    return cmd;
}

void check_runnable(const EngineConfig& config, const WorkloadIndex& workload) {
    if (config.clusters < 1)
        throw ValidationError("at least one cluster is required");
    if (config.vms_per_cluster < 1)
        throw ValidationError("vms_per_cluster must be >= 1");
    if (config.max_clusters != 0 && config.max_clusters < config.clusters)
        throw ValidationError(
            fmt::format("max_clusters ({}) is below clusters ({})", config.max_clusters, config.clusters));
    if (config.interval <= SimTime{})
        throw ValidationError("autoscaling interval must be > 0");
    for (const auto& t : workload.tasks())
        if (t.cpus > config.vms_per_cluster)
            throw ValidationError(fmt::format("task {} needs {} cpus but clusters have {} VMs; it can never run",
                                              t.id, t.cpus, config.vms_per_cluster));
}

} // namespace asflow
