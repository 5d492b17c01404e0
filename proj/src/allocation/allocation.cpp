#include <set>
#include <utility>

#include <fmt/format.h>

#include "asflow/allocation.hpp"
#include "asflow/errors.hpp"

namespace asflow {

namespace {

// Ordered (-free, id): begin() is the emptiest cluster, lowest id on ties.
using MostFree = std::set<std::pair<int, ClusterId>>;
// Ordered (free, id): lower_bound({cpus, 0}) is the tightest fit.
using LeastFree = std::set<std::pair<int, ClusterId>>;

MostFree most_free_index(const PlacementRequest& req) {
    MostFree s;
    for (const auto& c : req.clusters)
        if (c.free_slots > 0)
            s.emplace(-c.free_slots, c.id);
    return s;
}

} // namespace

Placement fill_worst_fit(const PlacementRequest& req) {
    Placement out;
    auto clusters = most_free_index(req);
    const auto& q = req.queue;
    std::size_t head = 0;
    while (head < q.size() && !clusters.empty()) {
        auto [neg_free, id] = *clusters.begin();
        int free = -neg_free;
        if (q[head].cpus > free) {
            ++head;  // fits nowhere this round
            continue;
        }
        clusters.erase(clusters.begin());
        while (head < q.size() && q[head].cpus <= free) {
            free -= q[head].cpus;
            out.assignments.push_back({head, q[head].id, id});
            ++head;
        }
        if (free > 0)
            clusters.emplace(-free, id);
    }
    return out;
}

Placement worst_fit(const PlacementRequest& req) {
    Placement out;
    auto clusters = most_free_index(req);
    const auto& q = req.queue;
    for (std::size_t i = 0; i < q.size() && !clusters.empty(); ++i) {
        auto [neg_free, id] = *clusters.begin();
        int free = -neg_free;
        if (q[i].cpus > free)
            continue;
        clusters.erase(clusters.begin());
        free -= q[i].cpus;
        out.assignments.push_back({i, q[i].id, id});
        if (free > 0)
            clusters.emplace(-free, id);
    }
    return out;
}

Placement best_fit(const PlacementRequest& req) {
    Placement out;
    LeastFree clusters;
    for (const auto& c : req.clusters)
        if (c.free_slots > 0)
            clusters.emplace(c.free_slots, c.id);
    const auto& q = req.queue;
    for (std::size_t i = 0; i < q.size() && !clusters.empty(); ++i) {
        auto it = clusters.lower_bound({q[i].cpus, ClusterId{0}});
        if (it == clusters.end())
            continue;
        auto [free, id] = *it;
        clusters.erase(it);
        free -= q[i].cpus;
        out.assignments.push_back({i, q[i].id, id});
        if (free > 0)
            clusters.emplace(free, id);
    }
    return out;
}

Placement allocate(AllocationPolicy policy, const PlacementRequest& req) {
    switch (policy) {
    case AllocationPolicy::FillWorstFit: return fill_worst_fit(req);
    case AllocationPolicy::WorstFit: return worst_fit(req);
    case AllocationPolicy::BestFit: return best_fit(req);
    }
    return {};
}

std::string to_string(AllocationPolicy policy) {
    switch (policy) {
    case AllocationPolicy::FillWorstFit: return "fillworstfit";
    case AllocationPolicy::WorstFit: return "worstfit";
    case AllocationPolicy::BestFit: return "bestfit";
    }
    return "fillworstfit";
}

AllocationPolicy allocation_policy_from_string(const std::string& name) {
    if (name == "fillworstfit") return AllocationPolicy::FillWorstFit;
    if (name == "worstfit") return AllocationPolicy::WorstFit;
    if (name == "bestfit") return AllocationPolicy::BestFit;
    throw ValidationError(fmt::format("unknown allocation policy '{}'", name));
}

} // namespace asflow
