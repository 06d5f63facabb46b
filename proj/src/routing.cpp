#include "qroute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace qroute {

void validate(const RoutingRequest& request, const NetworkGraph& graph) {
    if (index(request.source) >= graph.node_count() ||
        index(request.destination) >= graph.node_count()) {
        throw std::invalid_argument("request endpoint out of range");
    }
    if (request.source == request.destination) {
        throw std::invalid_argument("request source equals destination");
    }
    if (request.demand < 1) throw std::invalid_argument("demand must be at least 1");
    if (!(request.threshold >= 0.5 && request.threshold < 1.0)) {
        throw std::invalid_argument("threshold must lie in [0.5, 1)");
    }
}

ResidualGraph::ResidualGraph(const NetworkGraph& base) : base_(&base) {
    remaining_.reserve(base.edge_count());
    for (const auto& e : base.edges()) remaining_.push_back(e.capacity);
}

long long ResidualGraph::consumed_total() const {
    long long consumed = 0;
    for (std::size_t i = 0; i < remaining_.size(); ++i) {
        consumed += base_->edge(edge_id(i)).capacity - remaining_[i];
    }
    return consumed;
}

void ResidualGraph::consume(EdgeId e, int pairs) {
    if (pairs < 0 || pairs > remaining_[index(e)]) {
        throw std::logic_error("consuming " + std::to_string(pairs) + " pairs from edge " +
                               std::to_string(index(e)) + " with " +
                               std::to_string(remaining_[index(e)]) + " left");
    }
    remaining_[index(e)] -= pairs;
}

EdgeMask ResidualGraph::available_mask() const {
    std::vector<char> allowed(remaining_.size());
    for (std::size_t i = 0; i < remaining_.size(); ++i) allowed[i] = remaining_[i] > 0;
    return EdgeMask(std::move(allowed));
}

std::vector<PathEdge> residual_path_edges(const Path& path, const ResidualGraph& residual) {
    std::vector<PathEdge> hops;
    hops.reserve(path.edges.size());
    for (EdgeId e : path.edges) {
        hops.push_back({residual.base().edge(e).initial_fidelity, residual.remaining(e)});
    }
    return hops;
}

int solution_width(const Path& path, const PurificationDecision& decision,
                   const ResidualGraph& residual) {
    if (decision.rounds.size() != path.edges.size()) {
        throw std::invalid_argument("decision does not cover the path");
    }
    int width = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        width = std::min(width, residual.remaining(path.edges[i]) / (decision.rounds[i] + 1));
    }
    return path.edges.empty() ? 0 : width;
}

ExpectedThroughput expected_throughput(const Path& path, const PurificationDecision& decision,
                                       int served, const NetworkGraph& graph) {
    ExpectedThroughput out;
    out.total = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        const double p = cumulative_success_probability(
            graph.edge(path.edges[i]).initial_fidelity, decision.rounds[i]);
        out.per_edge.push_back(p * served);
        out.total = std::min(out.total, out.per_edge.back());
    }
    if (out.per_edge.empty()) out.total = 0.0;
    return out;
}

void consume_solution(const Path& path, const PurificationDecision& decision, int served,
                      ResidualGraph& residual) {
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        residual.consume(path.edges[i], served * (decision.rounds[i] + 1));
    }
}

RoutingSolution make_solution(const NetworkGraph& graph, Path path,
                              PurificationDecision decision, int served) {
    RoutingSolution s;
    s.width = served;
    s.end_to_end_fidelity = 1.0;
    s.total_cost = 0;
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        s.end_to_end_fidelity *=
            pumped_fidelity(graph.edge(path.edges[i]).initial_fidelity, decision.rounds[i]);
        s.total_cost += decision.rounds[i] + 1;
    }
    auto t = expected_throughput(path, decision, served, graph);
    s.per_edge_expected = std::move(t.per_edge);
    s.expected_throughput = t.total;
    s.path = std::move(path);
    s.decision = std::move(decision);
    return s;
}

namespace {

std::vector<char> feasible_edges(const ResidualGraph& residual, double threshold) {
    const NetworkGraph& g = residual.base();
    std::vector<char> allowed(g.edge_count(), 0);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const int left = residual.remaining(edge_id(i));
        if (left < 1) continue;
        const double f0 = g.edge(edge_id(i)).initial_fidelity;
        // Pump only as far as needed instead of filling the whole table.
        double current = f0;
        for (int round = 0; current < threshold && round < left - 1; ++round) {
            current = purify_pair(f0, current);
        }
        allowed[i] = current >= threshold;
    }
    return allowed;
}

void check_guarantee(const RoutingSolution& s, const RoutingRequest& request) {
    if (s.end_to_end_fidelity < request.threshold) {
        throw std::logic_error("router emitted a solution below its fidelity threshold");
    }
}

}  // namespace

// -log of the best fidelity each edge reaches with the pairs it has left; a
// path can meet `threshold` only if these sum to at most -log(threshold).
std::vector<double> purified_log_weights(const ResidualGraph& residual) {
    const NetworkGraph& g = residual.base();
    std::vector<double> weights(g.edge_count(), 0.0);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const int left = residual.remaining(edge_id(i));
        if (left < 1) continue;
        const double best =
            PurificationCostTable(g.edge(edge_id(i)).initial_fidelity, left).max_fidelity();
        weights[i] = best >= 1.0 ? 0.0 : -std::log(best);
    }
    return weights;
}

EdgeMask feasible_edge_mask(const ResidualGraph& residual, double threshold) {
    return EdgeMask(feasible_edges(residual, threshold));
}

int remaining_demand(int demand, double delivered) {
    const double owed = static_cast<double>(demand) - std::ceil(delivered - 1e-9);
    return owed <= 0.0 ? 0 : static_cast<int>(owed);
}

std::vector<RoutingSolution> q_path(const NetworkGraph& graph, const RoutingRequest& request,
                                    ResidualGraph& residual, const RouterOptions& options) {
    validate(request, graph);
    const EdgeMask mask = feasible_edge_mask(residual, request.threshold);
    const auto shortest = min_hops(graph, request.source, request.destination, mask);
    if (!shortest) return {};

    struct Queued {
        int cost;
        std::size_t seq;
        Path path;
        PurificationDecision decision;
    };
    const auto later = [](const Queued& a, const Queued& b) {
        return a.cost != b.cost ? a.cost > b.cost : a.seq > b.seq;
    };
    std::priority_queue<Queued, std::vector<Queued>, decltype(later)> queue(later);
    std::size_t seq = 0;

    // Only fidelity-capable paths are enumerated, so the per-hop limit counts
    // paths the purification decision can actually use.
    const WeightBoundedPaths candidates(graph, request.source, request.destination, mask,
                                        purified_log_weights(residual),
                                        -std::log(request.threshold), options.path_limit);
    if (!candidates.max_hops()) return {};
    const std::size_t hop_bound = *candidates.max_hops();
    std::size_t next_class = *candidates.min_hops();
    const long long cost_bound =
        static_cast<long long>(graph.edge_count()) * std::max(1, graph.max_capacity());

    std::vector<RoutingSolution> out;
    double delivered = 0.0;
    long long min_cost = static_cast<long long>(*shortest);
    while (min_cost <= cost_bound) {
        // Path selection and purification decision for this cost level.
        std::vector<Path> level;
        if (next_class <= hop_bound && static_cast<long long>(next_class) == min_cost) {
            level = candidates.take(next_class++);
        }
        for (Path& p : level) {
            auto hops = residual_path_edges(p, residual);
            if (std::any_of(hops.begin(), hops.end(), [](const PathEdge& h) { return h.capacity < 1; })) {
                continue;
            }
            auto decision = greedy_purification_decision(hops, request.threshold);
            if (!decision) continue;
            const int cost = static_cast<int>(p.hop_count()) + decision->total_rounds();
            queue.push({cost, seq++, std::move(p), std::move(*decision)});
        }

        // Release everything whose actual cost has been reached.
        while (!queue.empty() && queue.top().cost <= min_cost) {
            Queued top = queue.top();
            queue.pop();
            const int width = solution_width(top.path, top.decision, residual);
            if (width < 1) continue;
            const int served = std::min(width, remaining_demand(request.demand, delivered));
            consume_solution(top.path, top.decision, served, residual);
            RoutingSolution s =
                make_solution(graph, std::move(top.path), std::move(top.decision), served);
            s.emitted_at_cost = static_cast<int>(min_cost);
            check_guarantee(s, request);
            delivered += s.expected_throughput;
            out.push_back(std::move(s));
            if (delivered >= request.demand || remaining_demand(request.demand, delivered) == 0) {
                return out;
            }
        }

        // Skip cost levels with nothing to enumerate or release.
        long long next = std::numeric_limits<long long>::max();
        if (next_class <= hop_bound) next = static_cast<long long>(next_class);
        if (!queue.empty()) next = std::min<long long>(next, queue.top().cost);
        if (next == std::numeric_limits<long long>::max()) break;
        min_cost = std::max(min_cost + 1, next);
    }
    return out;
}

std::optional<PurificationDecision> average_fidelity_decision(std::span<const PathEdge> path,
                                                              double threshold) {
    if (path.empty()) throw std::invalid_argument("path must have at least one edge");
    std::vector<PurificationCostTable> tables;
    tables.reserve(path.size());
    for (const auto& hop : path) tables.emplace_back(hop.initial_fidelity, hop.capacity);

    std::vector<char> pinned(path.size(), 0);
    double target = 0.0;
    while (true) {
        double pinned_product = 1.0;
        std::size_t free = 0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (pinned[i]) {
                pinned_product *= tables[i].max_fidelity();
            } else {
                ++free;
            }
        }
        if (free == 0) break;
        target = std::pow(threshold / pinned_product, 1.0 / static_cast<double>(free));
        if (target >= 1.0) return std::nullopt;
        bool changed = false;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (!pinned[i] && tables[i].max_fidelity() < target) {
                pinned[i] = 1;
                changed = true;
            }
        }
        if (!changed) break;
    }

    PurificationDecision decision{std::vector<int>(path.size(), 0)};
    for (std::size_t i = 0; i < path.size(); ++i) {
        decision.rounds[i] = pinned[i] ? tables[i].max_round() : *tables[i].min_rounds_reaching(target);
    }

    // (threshold^(1/l))^l can round just below threshold; top up greedily.
    const auto product = [&] {
        double p = 1.0;
        for (std::size_t i = 0; i < path.size(); ++i) p *= tables[i].fidelity(decision.rounds[i]);
        return p;
    };
    while (product() < threshold) {
        std::optional<std::size_t> best;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            const int next = decision.rounds[i] + 1;
            if (next <= tables[i].max_round() && tables[i].improvement(next) > best_gain) {
                best_gain = tables[i].improvement(next);
                best = i;
            }
        }
        if (!best) return std::nullopt;
        ++decision.rounds[*best];
    }
    return decision;
}

std::vector<RoutingSolution> q_leap(const NetworkGraph& graph, const RoutingRequest& request,
                                    ResidualGraph& residual) {
    validate(request, graph);
    const std::vector<char> feasible = feasible_edges(residual, request.threshold);
    std::vector<RoutingSolution> out;
    double delivered = 0.0;
    for (int j = 0; j < request.demand; ++j) {
        std::vector<char> allowed(feasible.size());
        for (std::size_t i = 0; i < feasible.size(); ++i) {
            allowed[i] = feasible[i] && residual.remaining(edge_id(i)) > 0;
        }
        auto path = best_fidelity_path(graph, request.source, request.destination,
                                       EdgeMask(std::move(allowed)));
        if (!path) break;
        auto decision =
            average_fidelity_decision(residual_path_edges(*path, residual), request.threshold);
        if (!decision) break;
        const int width = solution_width(*path, *decision, residual);
        if (width < 1) break;
        const int served = std::min(width, remaining_demand(request.demand, delivered));
        consume_solution(*path, *decision, served, residual);
        RoutingSolution s = make_solution(graph, std::move(*path), std::move(*decision), served);
        check_guarantee(s, request);
        delivered += s.expected_throughput;
        out.push_back(std::move(s));
        if (delivered >= request.demand || remaining_demand(request.demand, delivered) == 0) break;
    }
    return out;
}

std::vector<RoutingSolution> route(RouterKind kind, const NetworkGraph& graph,
                                   const RoutingRequest& request, ResidualGraph& residual,
                                   const RouterOptions& options) {
    switch (kind) {
        case RouterKind::q_path:
            return q_path(graph, request, residual, options);
        case RouterKind::q_leap:
            return q_leap(graph, request, residual);
    }
    throw std::invalid_argument("unknown router");
}

double total_expected_throughput(const std::vector<RoutingSolution>& solutions) {
    double total = 0.0;
    for (const auto& s : solutions) total += s.expected_throughput;
    return total;
}

}  // namespace qroute
