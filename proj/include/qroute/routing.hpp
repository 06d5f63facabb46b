#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qroute/pathfinding.hpp"
#include "qroute/purification.hpp"
#include "qroute/topology.hpp"

namespace qroute {

struct RoutingRequest {
    NodeId source{};
    NodeId destination{};
    int demand = 1;          // end-to-end connections wanted
    double threshold = 0.8;  // minimum end-to-end fidelity
};

void validate(const RoutingRequest& request, const NetworkGraph& graph);

struct RoutingSolution {
    Path path;
    PurificationDecision decision;
    int width = 0;  // connections actually served on this path
    double end_to_end_fidelity = 0.0;
    std::vector<double> per_edge_expected;  // t^EXT per hop
    double expected_throughput = 0.0;
    int total_cost = 0;  // entangled pairs consumed per connection
    int emitted_at_cost = 0;  // Q-PATH iteration that released it
};

/// Remaining pairs per edge of a base graph.
class ResidualGraph {
public:
    explicit ResidualGraph(const NetworkGraph& base);

    const NetworkGraph& base() const { return *base_; }
    int remaining(EdgeId e) const { return remaining_[index(e)]; }
    std::span<const int> remaining() const { return remaining_; }
    long long consumed_total() const;

    /// Throws std::logic_error if `pairs` exceeds what is left.
    void consume(EdgeId e, int pairs);

    /// Edges with at least one pair left.
    EdgeMask available_mask() const;

private:
    const NetworkGraph* base_;
    std::vector<int> remaining_;
};

struct RouterOptions {
    std::size_t path_limit = kDefaultPathLimit;  // Q-PATH paths per hop count
};

/// Path hops with the capacities left in `residual`.
std::vector<PathEdge> residual_path_edges(const Path& path, const ResidualGraph& residual);

/// min over hops of floor(remaining / (rounds + 1)); 0 when unservable.
int solution_width(const Path& path, const PurificationDecision& decision,
                   const ResidualGraph& residual);

struct ExpectedThroughput {
    std::vector<double> per_edge;
    double total = 0.0;
};

ExpectedThroughput expected_throughput(const Path& path, const PurificationDecision& decision,
                                       int served, const NetworkGraph& graph);

/// Subtracts served * (rounds + 1) pairs on every hop.
void consume_solution(const Path& path, const PurificationDecision& decision, int served,
                      ResidualGraph& residual);

/// Assembles a solution record; does not touch the residual graph.
RoutingSolution make_solution(const NetworkGraph& graph, Path path,
                              PurificationDecision decision, int served);

/// Edges usable for `threshold`: pairs left and a fully-purified fidelity that
/// reaches the threshold with the remaining pairs.
EdgeMask feasible_edge_mask(const ResidualGraph& residual, double threshold);

/// Connections still owed given the expected throughput delivered so far.
int remaining_demand(int demand, double delivered);

/// Iterative minimum-cost router. Solutions come out in non-decreasing
/// total_cost order; the first has the minimum pair cost of any
/// fidelity-feasible (path, decision). Consumes from `residual`.
std::vector<RoutingSolution> q_path(const NetworkGraph& graph, const RoutingRequest& request,
                                    ResidualGraph& residual, const RouterOptions& options = {});

/// Per-hop rounds so that every hop meets (threshold)^(1/l). Hops that cannot
/// reach the average are pinned at their maximum and the average is
/// recomputed over the rest. nullopt when the path cannot meet `threshold`.
std::optional<PurificationDecision> average_fidelity_decision(std::span<const PathEdge> path,
                                                              double threshold);

/// Best-quality-path router: repeatedly serves the highest fidelity-product
/// path on what is left. Consumes from `residual`.
std::vector<RoutingSolution> q_leap(const NetworkGraph& graph, const RoutingRequest& request,
                                    ResidualGraph& residual);

enum class RouterKind { q_path, q_leap };

std::vector<RoutingSolution> route(RouterKind kind, const NetworkGraph& graph,
                                   const RoutingRequest& request, ResidualGraph& residual,
                                   const RouterOptions& options = {});

double total_expected_throughput(const std::vector<RoutingSolution>& solutions);

}  // namespace qroute
