#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "qroute/topology.hpp"

namespace qroute {

/// Simple path; `edges[i]` joins `nodes[i]` and `nodes[i + 1]`.
struct Path {
    std::vector<NodeId> nodes;
    std::vector<EdgeId> edges;

    std::size_t hop_count() const { return edges.size(); }
    friend bool operator==(const Path&, const Path&) = default;
};

/// Builds the edge list for a node sequence; throws if two consecutive nodes
/// are not adjacent or a node repeats.
Path make_path(const NetworkGraph& graph, std::vector<NodeId> nodes);

/// Product of initial fidelities along the path.
double path_fidelity(const NetworkGraph& graph, const Path& path);

/// Subset of edges a search may use. A default-constructed mask allows all.
class EdgeMask {
public:
    EdgeMask() = default;
    explicit EdgeMask(std::vector<char> allowed) : allowed_(std::move(allowed)) {}

    bool allows(EdgeId e) const { return allowed_.empty() || allowed_[index(e)] != 0; }

private:
    std::vector<char> allowed_;
};

std::optional<std::size_t> min_hops(const NetworkGraph& graph, NodeId source,
                                    NodeId destination, const EdgeMask& mask = {});

/// Highest fidelity-product path, found by Dijkstra over -log(fidelity).
/// Near-equal products (1e-12 relative) prefer fewer hops, then the smaller
/// predecessor id.
std::optional<Path> best_fidelity_path(const NetworkGraph& graph, NodeId source,
                                       NodeId destination, const EdgeMask& mask = {});

inline constexpr std::size_t kDefaultPathLimit = 64;

/// Yen's k-shortest loopless paths under unit edge weights, emitted in
/// (hop count, lexicographic node sequence) order. At most `per_hop_limit`
/// paths are accepted per hop count (0 means unlimited); paths beyond the cap
/// are dropped without spawning deviations.
class HopOrderedPaths {
public:
    HopOrderedPaths(const NetworkGraph& graph, NodeId source, NodeId destination,
                    EdgeMask mask = {}, std::size_t per_hop_limit = kDefaultPathLimit);

    /// Paths with exactly `hops` edges. Calls must use non-decreasing `hops`.
    std::vector<Path> take(std::size_t hops);

    /// Hop count of the next candidate, or nullopt once enumeration is done.
    std::optional<std::size_t> next_hop_count() const;

private:
    struct CandidateOrder {
        bool operator()(const Path& a, const Path& b) const;
    };

    std::optional<Path> shortest_spur(NodeId from, const std::vector<char>& blocked_nodes,
                                      const std::vector<char>& blocked_edges) const;
    void accept(Path path);

    const NetworkGraph* graph_;
    NodeId source_;
    NodeId destination_;
    EdgeMask mask_;
    std::size_t per_hop_limit_;
    std::set<Path, CandidateOrder> accepted_;
    // Root prefix -> outgoing edges already used by accepted paths with that root.
    std::map<std::vector<NodeId>, std::vector<EdgeId>> branches_;
    std::vector<std::size_t> accepted_per_hop_;
    std::set<Path, CandidateOrder> candidates_;
};

/// Simple paths whose summed edge weight stays within `budget`, grouped by
/// exact hop count and emitted in lexicographic node order, at most
/// `per_hop_limit` per hop count (0 means unlimited). Weights must be
/// non-negative. A depth-first search pruned by the hop distance and the
/// weight distance to the destination, so only paths that can fit the budget
/// are ever counted toward the limit.
class WeightBoundedPaths {
public:
    WeightBoundedPaths(const NetworkGraph& graph, NodeId source, NodeId destination,
                       EdgeMask mask, std::vector<double> weights, double budget,
                       std::size_t per_hop_limit = kDefaultPathLimit);

    /// Paths with exactly `hops` edges. Any order of calls is allowed.
    std::vector<Path> take(std::size_t hops) const;

    /// No path within budget has more hops than this; nullopt when the
    /// destination is out of reach.
    std::optional<std::size_t> max_hops() const { return max_hops_; }
    std::optional<std::size_t> min_hops() const { return min_hops_; }

    /// Node expansions allowed per take() before the search gives up on a hop
    /// count; keeps pathological long-hop classes from running away.
    static constexpr std::size_t kExpansionCap = 20'000;

private:
    const NetworkGraph* graph_;
    NodeId source_;
    NodeId destination_;
    EdgeMask mask_;
    std::vector<double> weights_;
    double budget_;
    std::size_t per_hop_limit_;
    std::vector<std::size_t> hops_to_destination_;
    std::vector<double> weight_to_destination_;
    std::optional<std::size_t> min_hops_;
    std::optional<std::size_t> max_hops_;
};

/// Every simple path with exactly `hops` edges, up to `limit`, in
/// lexicographic order.
std::vector<Path> paths_with_hops(const NetworkGraph& graph, NodeId source, NodeId destination,
                                  std::size_t hops, std::size_t limit = kDefaultPathLimit,
                                  const EdgeMask& mask = {});

}  // namespace qroute
