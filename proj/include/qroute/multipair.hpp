#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qroute/routing.hpp"

namespace qroute {

enum class QueueOrder {
    ascending_utility,   // the greedy allocator
    descending_utility,  // inverted order, for contrast
    random,              // seeded uniform order
};

struct AllocationConfig {
    double alpha_star = 0.5;
    double beta_star = 0.5;
    RouterKind router = RouterKind::q_path;
    RouterOptions router_options;
    std::size_t edge_count = 1;
    int channel_capacity = 1;
    QueueOrder order = QueueOrder::ascending_utility;
    std::uint64_t seed = 0;

    double alpha() const;  // alpha* / (2|E|)
    double beta() const;   // beta* / (|E| * C_channel)

    static AllocationConfig for_graph(const NetworkGraph& graph, double alpha_star,
                                      double beta_star, RouterKind router);
};

/// Sum of node degrees over every node on the path, endpoints included.
int degree_of_freedom(const Path& path, const NetworkGraph& graph);

/// Entangled pairs one connection consumes: sum of (rounds + 1).
int resource_consumption(const Path& path, const PurificationDecision& decision);

double utility(const Path& path, const PurificationDecision& decision, const NetworkGraph& graph,
               const AllocationConfig& config);

struct RequestOutcome {
    RoutingRequest request;
    std::vector<RoutingSolution> accepted;
    // Established connections that miss their threshold (baseline only).
    std::vector<RoutingSolution> violating;
    double throughput = 0.0;
    int reroutes = 0;

    bool denied() const { return accepted.empty(); }
};

struct AllocationResult {
    std::vector<RequestOutcome> requests;
    std::vector<int> consumed;  // pairs taken per edge
    double total_throughput = 0.0;
    double mean_fidelity = 0.0;  // weighted by served connections
    double utilization = 0.0;    // consumed / total pairs
    std::size_t denied_count = 0;
    long long served_connections = 0;
    long long violating_connections = 0;
};

/// Greedy multi-pair allocation: candidate solutions from the configured
/// router are served in utility order on one shared residual graph; an entry
/// that no longer fits triggers a re-route on what is left.
///
/// Each request's candidates keep the order its router produced them in; the
/// queue compares requests by the utility of their next pending candidate, so
/// a single request reproduces the router's output exactly.
AllocationResult allocate(const NetworkGraph& graph, const std::vector<RoutingRequest>& requests,
                          const AllocationConfig& config);

/// allocate() with a seeded uniform random queue order.
AllocationResult allocate_random(const NetworkGraph& graph,
                                 const std::vector<RoutingRequest>& requests,
                                 AllocationConfig config, std::uint64_t seed);

/// Purify-before-route comparator: every edge is pumped up-front to the
/// strictest threshold, requests take min-hop paths, and contended edges are
/// shared in proportion to demand. Connections that end up below their
/// threshold are reported as violating and earn no throughput.
AllocationResult baseline_advance_purification(const NetworkGraph& graph,
                                               const std::vector<RoutingRequest>& requests);

/// Routes requests one after another on a shared residual graph.
AllocationResult route_sequentially(const NetworkGraph& graph,
                                    const std::vector<RoutingRequest>& requests, RouterKind router,
                                    const RouterOptions& options = {});

}  // namespace qroute
