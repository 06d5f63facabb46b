#include "qroute/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace qroute {

Path make_path(const NetworkGraph& graph, std::vector<NodeId> nodes) {
    Path path;
    std::vector<char> seen(graph.node_count(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (index(nodes[i]) >= graph.node_count()) throw std::invalid_argument("node out of range");
        if (seen[index(nodes[i])]) throw std::invalid_argument("path repeats a node");
        seen[index(nodes[i])] = 1;
        if (i > 0) {
            auto e = graph.find_edge(nodes[i - 1], nodes[i]);
            if (!e) throw std::invalid_argument("path uses a missing edge");
            path.edges.push_back(*e);
        }
    }
    path.nodes = std::move(nodes);
    return path;
}

double path_fidelity(const NetworkGraph& graph, const Path& path) {
    double product = 1.0;
    for (EdgeId e : path.edges) product *= graph.edge(e).initial_fidelity;
    return product;
}

std::optional<std::size_t> min_hops(const NetworkGraph& graph, NodeId source,
                                    NodeId destination, const EdgeMask& mask) {
    if (source == destination) throw std::invalid_argument("source equals destination");
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> depth(graph.node_count(), unseen);
    std::queue<NodeId> frontier;
    depth[index(source)] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
        const NodeId n = frontier.front();
        frontier.pop();
        for (const auto& inc : graph.neighbors(n)) {
            if (!mask.allows(inc.edge) || depth[index(inc.neighbor)] != unseen) continue;
            depth[index(inc.neighbor)] = depth[index(n)] + 1;
            if (inc.neighbor == destination) return depth[index(inc.neighbor)];
            frontier.push(inc.neighbor);
        }
    }
    return std::nullopt;
}

namespace {

constexpr double kRelativeTie = 1e-12;

struct Label {
    double cost = std::numeric_limits<double>::infinity();  // sum of -log(fidelity)
    std::size_t hops = 0;
    std::size_t predecessor = std::numeric_limits<std::size_t>::max();
};

// Strict "a is better than b" with a relative tolerance on cost.
bool better(const Label& a, const Label& b) {
    if (std::isinf(b.cost)) return !std::isinf(a.cost);
    const double scale = std::max({1.0, std::abs(a.cost), std::abs(b.cost)});
    if (a.cost < b.cost - kRelativeTie * scale) return true;
    if (a.cost > b.cost + kRelativeTie * scale) return false;
    if (a.hops != b.hops) return a.hops < b.hops;
    return a.predecessor < b.predecessor;
}

}  // namespace

std::optional<Path> best_fidelity_path(const NetworkGraph& graph, NodeId source,
                                       NodeId destination, const EdgeMask& mask) {
    if (source == destination) throw std::invalid_argument("source equals destination");
    const std::size_t n = graph.node_count();
    std::vector<Label> labels(n);
    std::vector<EdgeId> via(n);
    std::vector<char> settled(n, 0);
    labels[index(source)].cost = 0.0;

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.push({0.0, index(source)});
    while (!heap.empty()) {
        const auto [cost, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        if (u == index(destination)) break;
        for (const auto& inc : graph.neighbors(node_id(u))) {
            const std::size_t v = index(inc.neighbor);
            if (!mask.allows(inc.edge) || settled[v]) continue;
            Label candidate;
            candidate.cost = labels[u].cost - std::log(graph.edge(inc.edge).initial_fidelity);
            candidate.hops = labels[u].hops + 1;
            candidate.predecessor = u;
            if (better(candidate, labels[v])) {
                labels[v] = candidate;
                via[v] = inc.edge;
                heap.push({candidate.cost, v});
            }
        }
    }
    if (!settled[index(destination)]) return std::nullopt;

    Path path;
    for (std::size_t at = index(destination); at != index(source); at = labels[at].predecessor) {
        path.nodes.push_back(node_id(at));
        path.edges.push_back(via[at]);
    }
    path.nodes.push_back(source);
    std::reverse(path.nodes.begin(), path.nodes.end());
    std::reverse(path.edges.begin(), path.edges.end());
    return path;
}

bool HopOrderedPaths::CandidateOrder::operator()(const Path& a, const Path& b) const {
    if (a.hop_count() != b.hop_count()) return a.hop_count() < b.hop_count();
    return std::lexicographical_compare(
        a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
        [](NodeId x, NodeId y) { return index(x) < index(y); });
}

HopOrderedPaths::HopOrderedPaths(const NetworkGraph& graph, NodeId source, NodeId destination,
                                 EdgeMask mask, std::size_t per_hop_limit)
    : graph_(&graph),
      source_(source),
      destination_(destination),
      mask_(std::move(mask)),
      per_hop_limit_(per_hop_limit) {
    if (source == destination) throw std::invalid_argument("source equals destination");
    const std::vector<char> no_nodes(graph.node_count(), 0);
    const std::vector<char> no_edges(graph.edge_count(), 0);
    if (auto first = shortest_spur(source, no_nodes, no_edges)) candidates_.insert(*first);
}

std::optional<Path> HopOrderedPaths::shortest_spur(NodeId from,
                                                   const std::vector<char>& blocked_nodes,
                                                   const std::vector<char>& blocked_edges) const {
    const NetworkGraph& g = *graph_;
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(g.node_count(), unseen);
    std::deque<NodeId> frontier{destination_};
    dist[index(destination_)] = 0;
    while (!frontier.empty() && dist[index(from)] == unseen) {
        const NodeId n = frontier.front();
        frontier.pop_front();
        for (const auto& inc : g.neighbors(n)) {
            const std::size_t m = index(inc.neighbor);
            if (dist[m] != unseen || blocked_nodes[m] || blocked_edges[index(inc.edge)] ||
                !mask_.allows(inc.edge)) {
                continue;
            }
            dist[m] = dist[index(n)] + 1;
            frontier.push_back(inc.neighbor);
        }
    }
    if (dist[index(from)] == unseen) return std::nullopt;

    // Walk downhill taking the smallest neighbour id: lexicographically first
    // among the shortest completions.
    Path spur;
    spur.nodes.push_back(from);
    NodeId at = from;
    while (at != destination_) {
        for (const auto& inc : g.neighbors(at)) {
            const std::size_t m = index(inc.neighbor);
            if (dist[m] + 1 == dist[index(at)] && !blocked_nodes[m] &&
                !blocked_edges[index(inc.edge)] && mask_.allows(inc.edge)) {
                spur.nodes.push_back(inc.neighbor);
                spur.edges.push_back(inc.edge);
                at = inc.neighbor;
                break;
            }
        }
    }
    return spur;
}

void HopOrderedPaths::accept(Path path) {
    const NetworkGraph& g = *graph_;
    std::vector<char> blocked_nodes(g.node_count(), 0);
    std::vector<char> blocked_edges(g.edge_count(), 0);
    accepted_.insert(path);
    std::vector<NodeId> root;
    for (std::size_t k = 0; k < path.edges.size(); ++k) {
        root.push_back(path.nodes[k]);
        branches_[root].push_back(path.edges[k]);
    }

    root.clear();
    for (std::size_t spur_at = 0; spur_at + 1 < path.nodes.size(); ++spur_at) {
        root.push_back(path.nodes[spur_at]);
        const auto& used = branches_[root];
        for (EdgeId e : used) blocked_edges[index(e)] = 1;
        if (spur_at > 0) blocked_nodes[index(path.nodes[spur_at - 1])] = 1;

        auto spur = shortest_spur(path.nodes[spur_at], blocked_nodes, blocked_edges);
        for (EdgeId e : used) blocked_edges[index(e)] = 0;
        if (!spur) continue;
        Path candidate;
        candidate.nodes.assign(path.nodes.begin(), path.nodes.begin() + spur_at);
        candidate.edges.assign(path.edges.begin(), path.edges.begin() + spur_at);
        candidate.nodes.insert(candidate.nodes.end(), spur->nodes.begin(), spur->nodes.end());
        candidate.edges.insert(candidate.edges.end(), spur->edges.begin(), spur->edges.end());
        if (CandidateOrder{}(candidate, path) || accepted_.contains(candidate)) continue;
        candidates_.insert(std::move(candidate));
    }
}

std::optional<std::size_t> HopOrderedPaths::next_hop_count() const {
    if (candidates_.empty()) return std::nullopt;
    return candidates_.begin()->hop_count();
}

std::vector<Path> HopOrderedPaths::take(std::size_t hops) {
    std::vector<Path> out;
    while (!candidates_.empty() && candidates_.begin()->hop_count() <= hops) {
        Path next = std::move(candidates_.extract(candidates_.begin()).value());
        const std::size_t h = next.hop_count();
        if (accepted_per_hop_.size() <= h) accepted_per_hop_.resize(h + 1, 0);
        if (per_hop_limit_ != 0 && accepted_per_hop_[h] >= per_hop_limit_) continue;
        ++accepted_per_hop_[h];
        if (h == hops) out.push_back(next);
        accept(std::move(next));
    }
    return out;
}

std::vector<Path> paths_with_hops(const NetworkGraph& graph, NodeId source, NodeId destination,
                                  std::size_t hops, std::size_t limit, const EdgeMask& mask) {
    if (hops < 1) throw std::invalid_argument("hops must be at least 1");
    HopOrderedPaths paths(graph, source, destination, mask, limit);
    return paths.take(hops);
}

WeightBoundedPaths::WeightBoundedPaths(const NetworkGraph& graph, NodeId source,
                                       NodeId destination, EdgeMask mask,
                                       std::vector<double> weights, double budget,
                                       std::size_t per_hop_limit)
    : graph_(&graph),
      source_(source),
      destination_(destination),
      mask_(std::move(mask)),
      weights_(std::move(weights)),
      budget_(budget),
      per_hop_limit_(per_hop_limit) {
    if (source == destination) throw std::invalid_argument("source equals destination");
    if (weights_.size() != graph.edge_count()) {
        throw std::invalid_argument("one weight per edge is required");
    }
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("edge weights must be non-negative");
    }
    // Slack so products that land exactly on the threshold are not lost.
    budget_ += 1e-12 * std::max(1.0, std::abs(budget_));

    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    const std::size_t n = graph.node_count();
    hops_to_destination_.assign(n, unseen);
    std::queue<NodeId> frontier;
    hops_to_destination_[index(destination)] = 0;
    frontier.push(destination);
    while (!frontier.empty()) {
        const NodeId u = frontier.front();
        frontier.pop();
        for (const auto& inc : graph.neighbors(u)) {
            if (!mask_.allows(inc.edge) || hops_to_destination_[index(inc.neighbor)] != unseen) {
                continue;
            }
            hops_to_destination_[index(inc.neighbor)] = hops_to_destination_[index(u)] + 1;
            frontier.push(inc.neighbor);
        }
    }

    weight_to_destination_.assign(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    weight_to_destination_[index(destination)] = 0.0;
    heap.push({0.0, index(destination)});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > weight_to_destination_[u]) continue;
        for (const auto& inc : graph.neighbors(node_id(u))) {
            if (!mask_.allows(inc.edge)) continue;
            const double nd = d + weights_[index(inc.edge)];
            if (nd < weight_to_destination_[index(inc.neighbor)]) {
                weight_to_destination_[index(inc.neighbor)] = nd;
                heap.push({nd, index(inc.neighbor)});
            }
        }
    }

    if (hops_to_destination_[index(source)] == unseen ||
        weight_to_destination_[index(source)] > budget_) {
        return;
    }
    min_hops_ = hops_to_destination_[index(source)];
    // The h lightest usable edges bound the weight of any h-hop path.
    std::vector<double> usable;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        if (mask_.allows(edge_id(e))) usable.push_back(weights_[e]);
    }
    std::sort(usable.begin(), usable.end());
    std::size_t hops = 0;
    double total = 0.0;
    for (double w : usable) {
        total += w;
        if (total > budget_) break;
        ++hops;
    }
    max_hops_ = std::min(hops, n - 1);
}

std::vector<Path> WeightBoundedPaths::take(std::size_t hops) const {
    std::vector<Path> out;
    if (!min_hops_ || hops < *min_hops_ || hops > *max_hops_) return out;
    const NetworkGraph& g = *graph_;
    std::vector<char> on_path(g.node_count(), 0);
    std::vector<NodeId> nodes{source_};
    std::vector<EdgeId> edges;
    std::size_t expansions = 0;
    on_path[index(source_)] = 1;

    // Explicit stack of (node, next neighbour slot, weight so far).
    struct Frame {
        NodeId node;
        std::size_t next;
        double weight;
    };
    std::vector<Frame> stack{{source_, 0, 0.0}};
    while (!stack.empty()) {
        if (per_hop_limit_ != 0 && out.size() >= per_hop_limit_) break;
        if (++expansions > kExpansionCap) break;
        Frame& top = stack.back();
        const auto adjacent = g.neighbors(top.node);
        const std::size_t depth = stack.size() - 1;
        bool descended = false;
        while (top.next < adjacent.size()) {
            const Incidence inc = adjacent[top.next++];
            if (!mask_.allows(inc.edge) || on_path[index(inc.neighbor)]) continue;
            const std::size_t left = hops - depth - 1;
            const double weight = top.weight + weights_[index(inc.edge)];
            if (inc.neighbor == destination_) {
                if (left == 0 && weight <= budget_) {
                    Path p;
                    p.nodes = nodes;
                    p.nodes.push_back(destination_);
                    p.edges = edges;
                    p.edges.push_back(inc.edge);
                    out.push_back(std::move(p));
                    if (per_hop_limit_ != 0 && out.size() >= per_hop_limit_) break;
                }
                continue;
            }
            if (left == 0 || hops_to_destination_[index(inc.neighbor)] > left) continue;
            if (weight + weight_to_destination_[index(inc.neighbor)] > budget_) continue;
            on_path[index(inc.neighbor)] = 1;
            nodes.push_back(inc.neighbor);
            edges.push_back(inc.edge);
            stack.push_back({inc.neighbor, 0, weight});
            descended = true;
            break;
        }
        if (descended) continue;
        on_path[index(stack.back().node)] = stack.size() == 1 ? 1 : 0;
        stack.pop_back();
        if (!stack.empty()) {
            nodes.pop_back();
            edges.pop_back();
        }
    }
    return out;
}

}  // namespace qroute
