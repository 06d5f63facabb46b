#include "qroute/multipair.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

namespace qroute {

double AllocationConfig::alpha() const {
    return alpha_star / (2.0 * static_cast<double>(edge_count));
}

double AllocationConfig::beta() const {
    return beta_star / (static_cast<double>(edge_count) * channel_capacity);
}

AllocationConfig AllocationConfig::for_graph(const NetworkGraph& graph, double alpha_star,
                                             double beta_star, RouterKind router) {
    AllocationConfig config;
    config.alpha_star = alpha_star;
    config.beta_star = beta_star;
    config.router = router;
    config.edge_count = std::max<std::size_t>(1, graph.edge_count());
    config.channel_capacity = std::max(1, graph.max_capacity());
    return config;
}

int degree_of_freedom(const Path& path, const NetworkGraph& graph) {
    int total = 0;
    for (NodeId n : path.nodes) total += static_cast<int>(graph.degree(n));
    return total;
}

int resource_consumption(const Path& path, const PurificationDecision& decision) {
    if (decision.rounds.size() != path.edges.size()) {
        throw std::invalid_argument("decision does not cover the path");
    }
    return decision.total_rounds() + static_cast<int>(path.hop_count());
}

double utility(const Path& path, const PurificationDecision& decision, const NetworkGraph& graph,
               const AllocationConfig& config) {
    return config.alpha() * degree_of_freedom(path, graph) +
           config.beta() * resource_consumption(path, decision);
}

namespace {

void finalize(AllocationResult& result, const NetworkGraph& graph) {
    result.total_throughput = 0.0;
    result.served_connections = 0;
    result.violating_connections = 0;
    result.denied_count = 0;
    double fidelity_sum = 0.0;
    for (auto& outcome : result.requests) {
        outcome.throughput = total_expected_throughput(outcome.accepted);
        result.total_throughput += outcome.throughput;
        for (const auto& s : outcome.accepted) {
            result.served_connections += s.width;
            fidelity_sum += s.end_to_end_fidelity * s.width;
        }
        for (const auto& s : outcome.violating) result.violating_connections += s.width;
        if (outcome.denied()) ++result.denied_count;
    }
    result.mean_fidelity =
        result.served_connections > 0 ? fidelity_sum / result.served_connections : 0.0;
    const long long total = graph.total_capacity();
    const long long used = std::accumulate(result.consumed.begin(), result.consumed.end(), 0LL);
    result.utilization = total > 0 ? static_cast<double>(used) / static_cast<double>(total) : 0.0;
}

std::vector<int> consumed_pairs(const ResidualGraph& residual) {
    const NetworkGraph& g = residual.base();
    std::vector<int> consumed(g.edge_count());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        consumed[i] = g.edge(edge_id(i)).capacity - residual.remaining(edge_id(i));
    }
    return consumed;
}

struct Pending {
    Path path;
    PurificationDecision decision;
    double key = 0.0;
};

// Random order shuffles every candidate, not just the interleaving of
// requests, so each request's own queue is kept sorted by its random keys.
void order_queue(std::deque<Pending>& queue, QueueOrder order) {
    if (order != QueueOrder::random) return;
    std::stable_sort(queue.begin(), queue.end(),
                     [](const Pending& a, const Pending& b) { return a.key < b.key; });
}

class OrderKeys {
public:
    OrderKeys(const NetworkGraph& graph, const AllocationConfig& config)
        : graph_(graph), config_(config), rng_(config.seed) {}

    double key(const Path& path, const PurificationDecision& decision) {
        switch (config_.order) {
            case QueueOrder::ascending_utility:
                return utility(path, decision, graph_, config_);
            case QueueOrder::descending_utility:
                return -utility(path, decision, graph_, config_);
            case QueueOrder::random:
                return unit_(rng_);
        }
        return 0.0;
    }

private:
    const NetworkGraph& graph_;
    const AllocationConfig& config_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace

AllocationResult allocate(const NetworkGraph& graph, const std::vector<RoutingRequest>& requests,
                          const AllocationConfig& config) {
    for (const auto& r : requests) validate(r, graph);
    OrderKeys keys(graph, config);

    // Routing path predetermination on the untouched graph.
    std::vector<std::deque<Pending>> pending(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        ResidualGraph scratch(graph);
        for (auto& s : route(config.router, graph, requests[i], scratch, config.router_options)) {
            const double k = keys.key(s.path, s.decision);
            pending[i].push_back({std::move(s.path), std::move(s.decision), k});
        }
        order_queue(pending[i], config.order);
    }

    AllocationResult result;
    result.requests.resize(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) result.requests[i].request = requests[i];
    std::vector<double> delivered(requests.size(), 0.0);
    ResidualGraph residual(graph);

    while (true) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            if (pending[i].empty()) continue;
            if (!pick || pending[i].front().key < pending[*pick].front().key) pick = i;
        }
        if (!pick) break;
        const std::size_t i = *pick;
        Pending entry = std::move(pending[i].front());
        pending[i].pop_front();
        RequestOutcome& outcome = result.requests[i];
        const RoutingRequest& request = requests[i];

        const int width = solution_width(entry.path, entry.decision, residual);
        if (width >= 1) {
            const int served = std::min(width, remaining_demand(request.demand, delivered[i]));
            consume_solution(entry.path, entry.decision, served, residual);
            RoutingSolution s =
                make_solution(graph, std::move(entry.path), std::move(entry.decision), served);
            if (s.end_to_end_fidelity < request.threshold) {
                throw std::logic_error("allocation accepted a solution below its threshold");
            }
            delivered[i] += s.expected_throughput;
            outcome.accepted.push_back(std::move(s));
            if (delivered[i] >= request.demand ||
                remaining_demand(request.demand, delivered[i]) == 0) {
                pending[i].clear();
            }
            continue;
        }

        // Re-route on the residual graph; at most R_i times per request. The
        // fresh candidates supersede whatever this request still had queued,
        // and a re-route that finds nothing new ends the request.
        if (outcome.reroutes >= request.demand) {
            pending[i].clear();
            continue;
        }
        ++outcome.reroutes;
        RoutingRequest rest = request;
        rest.demand = remaining_demand(request.demand, delivered[i]);
        pending[i].clear();
        if (rest.demand < 1) continue;
        ResidualGraph scratch = residual;
        for (auto& s : route(config.router, graph, rest, scratch, config.router_options)) {
            if (s.path == entry.path) continue;
            const double k = keys.key(s.path, s.decision);
            pending[i].push_back({std::move(s.path), std::move(s.decision), k});
        }
        order_queue(pending[i], config.order);
    }

    result.consumed = consumed_pairs(residual);
    finalize(result, graph);
    return result;
}

AllocationResult allocate_random(const NetworkGraph& graph,
                                 const std::vector<RoutingRequest>& requests,
                                 AllocationConfig config, std::uint64_t seed) {
    config.order = QueueOrder::random;
    config.seed = seed;
    return allocate(graph, requests, config);
}

AllocationResult baseline_advance_purification(const NetworkGraph& graph,
                                               const std::vector<RoutingRequest>& requests) {
    for (const auto& r : requests) validate(r, graph);
    AllocationResult result;
    result.requests.resize(requests.size());
    result.consumed.assign(graph.edge_count(), 0);
    for (std::size_t i = 0; i < requests.size(); ++i) result.requests[i].request = requests[i];
    if (requests.empty()) {
        finalize(result, graph);
        return result;
    }

    double target = 0.0;
    for (const auto& r : requests) target = std::max(target, r.threshold);

    // Up-front purification of every channel to the strictest threshold.
    std::vector<int> rounds(graph.edge_count(), 0);
    std::vector<int> purified_capacity(graph.edge_count(), 0);
    std::vector<char> usable(graph.edge_count(), 0);
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const Edge& edge = graph.edge(edge_id(e));
        auto n = PurificationCostTable(edge.initial_fidelity, edge.capacity).min_rounds_reaching(target);
        if (!n) continue;
        rounds[e] = *n;
        purified_capacity[e] = edge.capacity / (*n + 1);
        usable[e] = purified_capacity[e] >= 1;
        // Purified pairs are spent whether or not a route uses them.
        if (*n > 0) result.consumed[e] = purified_capacity[e] * (*n + 1);
    }
    const EdgeMask mask(usable);

    std::vector<std::optional<Path>> paths(requests.size());
    std::vector<std::vector<std::size_t>> users(graph.edge_count());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        const auto hops = min_hops(graph, r.source, r.destination, mask);
        if (!hops) continue;
        auto found = paths_with_hops(graph, r.source, r.destination, *hops, 1, mask);
        if (found.empty()) continue;
        paths[i] = std::move(found.front());
        for (EdgeId e : paths[i]->edges) users[index(e)].push_back(i);
    }

    // Proportional share: floors first, then the remainder one pair at a time
    // to the largest demands.
    std::vector<int> grant(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) grant[i] = requests[i].demand;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        auto& list = users[e];
        if (list.empty()) continue;
        long long wanted = 0;
        for (auto i : list) wanted += requests[i].demand;
        const int cap = purified_capacity[e];
        if (wanted <= cap) continue;
        std::vector<int> share(list.size());
        int given = 0;
        for (std::size_t k = 0; k < list.size(); ++k) {
            share[k] = static_cast<int>(static_cast<long long>(cap) * requests[list[k]].demand / wanted);
            given += share[k];
        }
        std::vector<std::size_t> order(list.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return requests[list[a]].demand > requests[list[b]].demand;
        });
        for (std::size_t k = 0; given < cap; k = (k + 1) % order.size()) {
            if (share[order[k]] < requests[list[order[k]]].demand) {
                ++share[order[k]];
                ++given;
            }
        }
        for (std::size_t k = 0; k < list.size(); ++k) {
            grant[list[k]] = std::min(grant[list[k]], share[k]);
        }
    }

    for (std::size_t i = 0; i < requests.size(); ++i) {
        if (!paths[i] || grant[i] < 1) continue;
        PurificationDecision decision;
        for (EdgeId e : paths[i]->edges) decision.rounds.push_back(rounds[index(e)]);
        for (std::size_t k = 0; k < paths[i]->edges.size(); ++k) {
            const std::size_t e = index(paths[i]->edges[k]);
            if (decision.rounds[k] == 0) result.consumed[e] += grant[i];
        }
        RoutingSolution s = make_solution(graph, std::move(*paths[i]), std::move(decision), grant[i]);
        if (s.end_to_end_fidelity >= requests[i].threshold) {
            result.requests[i].accepted.push_back(std::move(s));
        } else {
            result.requests[i].violating.push_back(std::move(s));
        }
    }
    finalize(result, graph);
    return result;
}

AllocationResult route_sequentially(const NetworkGraph& graph,
                                    const std::vector<RoutingRequest>& requests, RouterKind router,
                                    const RouterOptions& options) {
    AllocationResult result;
    ResidualGraph residual(graph);
    for (const auto& r : requests) {
        RequestOutcome outcome;
        outcome.request = r;
        outcome.accepted = route(router, graph, r, residual, options);
        result.requests.push_back(std::move(outcome));
    }
    result.consumed = consumed_pairs(residual);
    finalize(result, graph);
    return result;
}

}  // namespace qroute
