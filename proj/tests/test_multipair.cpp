#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "qroute/multipair.hpp"
#include "support.hpp"

using namespace qroute;
using support::nodes;

namespace {

RoutingRequest request(int s, int d, int demand, double threshold) {
    return {node_id(static_cast<std::size_t>(s)), node_id(static_cast<std::size_t>(d)), demand,
            threshold};
}

// Two requests share the r1-r2 bottleneck; only the second has a detour.
// 0=s1 1=r1 2=r2 3=d1 4=s2 5=d2 6=a 7=b 8=c
NetworkGraph bottleneck_fixture() {
    NetworkGraph g(9);
    const auto add = [&](int u, int v) {
        g.add_edge(node_id(static_cast<std::size_t>(u)), node_id(static_cast<std::size_t>(v)), 1, 0.99);
    };
    add(0, 1);
    add(1, 2);
    add(2, 3);
    add(4, 1);
    add(2, 5);
    add(4, 6);
    add(6, 7);
    add(7, 8);
    add(8, 5);
    return g;
}

AllocationConfig config_for(const NetworkGraph& g, QueueOrder order,
                            RouterKind router = RouterKind::q_path) {
    auto c = AllocationConfig::for_graph(g, 0.5, 0.5, router);
    c.order = order;
    return c;
}

void expect_conserved(const NetworkGraph& g, const AllocationResult& r) {
    std::vector<long long> used(g.edge_count(), 0);
    for (const auto& o : r.requests) {
        for (const auto& s : o.accepted) {
            EXPECT_GE(s.end_to_end_fidelity, o.request.threshold);
            for (std::size_t i = 0; i < s.path.edges.size(); ++i) {
                used[index(s.path.edges[i])] += static_cast<long long>(s.width) * (s.decision.rounds[i] + 1);
            }
        }
    }
    ASSERT_EQ(r.consumed.size(), g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        EXPECT_EQ(used[e], r.consumed[e]);
        EXPECT_LE(r.consumed[e], g.edge(edge_id(e)).capacity);
    }
    EXPECT_GE(r.utilization, 0.0);
    EXPECT_LE(r.utilization, 1.0);
}

TEST(Weights, NormalisedByGraphSize) {
    AllocationConfig c;
    c.edge_count = 122;
    c.channel_capacity = 50;
    EXPECT_NEAR(c.alpha(), 0.5 / 244.0, 1e-15);
    EXPECT_NEAR(c.beta(), 0.5 / 6100.0, 1e-15);
    EXPECT_NEAR(c.alpha() * 10 + c.beta() * 3, 0.020738, 1e-6);
    const NetworkGraph g = bottleneck_fixture();
    const auto f = AllocationConfig::for_graph(g, 1.0, 0.0, RouterKind::q_leap);
    EXPECT_EQ(f.edge_count, 9u);
    EXPECT_EQ(f.channel_capacity, 1);
    EXPECT_EQ(f.router, RouterKind::q_leap);
}

TEST(DegreeOfFreedom, SumsEveryNodeOnPath) {
    NetworkGraph tri(3);
    tri.add_edge(node_id(0), node_id(1), 1, 0.8);
    tri.add_edge(node_id(1), node_id(2), 1, 0.8);
    tri.add_edge(node_id(0), node_id(2), 1, 0.8);
    EXPECT_EQ(degree_of_freedom(make_path(tri, nodes({0, 1})), tri), 4);

    NetworkGraph pair(2);
    pair.add_edge(node_id(0), node_id(1), 1, 0.8);
    EXPECT_EQ(degree_of_freedom(make_path(pair, nodes({0, 1})), pair), 2);

    // Degrees along 0-1-2 are 2, 3, 2.
    NetworkGraph five(5);
    five.add_edge(node_id(0), node_id(1), 1, 0.8);
    five.add_edge(node_id(1), node_id(2), 1, 0.8);
    five.add_edge(node_id(0), node_id(3), 1, 0.8);
    five.add_edge(node_id(1), node_id(4), 1, 0.8);
    five.add_edge(node_id(2), node_id(3), 1, 0.8);
    EXPECT_EQ(degree_of_freedom(make_path(five, nodes({0, 1, 2})), five), 7);
}

TEST(ResourceConsumption, CountsPairsPerConnection) {
    NetworkGraph g(4);
    g.add_edge(node_id(0), node_id(1), 3, 0.8);
    g.add_edge(node_id(1), node_id(2), 3, 0.8);
    g.add_edge(node_id(2), node_id(3), 3, 0.8);
    EXPECT_EQ(resource_consumption(make_path(g, nodes({0, 1, 2})), {{0, 0}}), 2);
    EXPECT_EQ(resource_consumption(make_path(g, nodes({0, 1, 2, 3})), {{0, 0, 0}}), 3);
    EXPECT_EQ(resource_consumption(make_path(g, nodes({0, 1})), {{2}}), 3);
    EXPECT_THROW(resource_consumption(make_path(g, nodes({0, 1})), {{2, 1}}), std::invalid_argument);
}

TEST(Utility, SingleFactorWeights) {
    const NetworkGraph g = bottleneck_fixture();
    const Path p = make_path(g, nodes({0, 1, 2, 3}));
    const PurificationDecision d{{0, 0, 0}};
    auto only_g = AllocationConfig::for_graph(g, 1.0, 0.0, RouterKind::q_path);
    auto only_s = AllocationConfig::for_graph(g, 0.0, 1.0, RouterKind::q_path);
    EXPECT_NEAR(utility(p, d, g, only_g), only_g.alpha() * 8, 1e-15);
    EXPECT_NEAR(utility(p, d, g, only_s), only_s.beta() * 3, 1e-15);
}

TEST(Allocate, AscendingOrderServesBoth) {
    const NetworkGraph g = bottleneck_fixture();
    const std::vector<RoutingRequest> reqs{request(0, 3, 1, 0.9), request(4, 5, 1, 0.9)};
    const auto up = allocate(g, reqs, config_for(g, QueueOrder::ascending_utility));
    EXPECT_DOUBLE_EQ(up.total_throughput, 2.0);
    EXPECT_EQ(up.denied_count, 0u);
    EXPECT_EQ(up.requests[1].reroutes, 1);
    ASSERT_EQ(up.requests[1].accepted.size(), 1u);
    EXPECT_EQ(up.requests[1].accepted[0].path.nodes, nodes({4, 6, 7, 8, 5}));
    expect_conserved(g, up);

    const auto down = allocate(g, reqs, config_for(g, QueueOrder::descending_utility));
    EXPECT_DOUBLE_EQ(down.total_throughput, 1.0);
    EXPECT_EQ(down.denied_count, 1u);
    EXPECT_TRUE(down.requests[0].denied());
    expect_conserved(g, down);
}

TEST(Allocate, SingleRequestMatchesRouter) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> th(0.6, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + trial % 5;
        const auto small = oracle::random_connected(rng, n, 0.4, 6, 0.6, 0.99);
        const NetworkGraph g = support::to_network(small);
        const RoutingRequest req = request(0, n - 1, 10, th(rng));
        for (RouterKind kind : {RouterKind::q_path, RouterKind::q_leap}) {
            ResidualGraph r(g);
            const auto alone = route(kind, g, req, r);
            const auto res = allocate(g, {req}, config_for(g, QueueOrder::ascending_utility, kind));
            ASSERT_EQ(res.requests[0].accepted.size(), alone.size());
            for (std::size_t i = 0; i < alone.size(); ++i) {
                EXPECT_EQ(res.requests[0].accepted[i].path, alone[i].path);
                EXPECT_EQ(res.requests[0].accepted[i].decision, alone[i].decision);
                EXPECT_EQ(res.requests[0].accepted[i].width, alone[i].width);
            }
            EXPECT_NEAR(res.total_throughput, total_expected_throughput(alone), 1e-12);
        }
    }
}

TEST(Allocate, RandomOrderMatchesForOneCandidate) {
    std::mt19937_64 rng(32);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + trial % 5;
        const auto small = oracle::random_connected(rng, n, 0.4, 6, 0.6, 0.99);
        const NetworkGraph g = support::to_network(small);
        const RoutingRequest req = request(0, n - 1, 1, 0.7);
        ResidualGraph r(g);
        if (q_path(g, req, r).size() != 1) continue;
        ++checked;
        const auto a = allocate(g, {req}, config_for(g, QueueOrder::ascending_utility));
        const auto b = allocate_random(g, {req}, config_for(g, QueueOrder::ascending_utility), 99);
        EXPECT_DOUBLE_EQ(a.total_throughput, b.total_throughput);
        EXPECT_EQ(a.consumed, b.consumed);
    }
    EXPECT_GT(checked, 50);
}

TEST(Allocate, RandomOrderIsSeeded) {
    std::mt19937_64 rng(33);
    const auto small = oracle::random_connected(rng, 12, 0.3, 3, 0.7, 0.99);
    const NetworkGraph g = support::to_network(small);
    const std::vector<RoutingRequest> reqs{request(0, 11, 5, 0.7), request(1, 10, 5, 0.7),
                                           request(2, 9, 5, 0.7)};
    const auto c = config_for(g, QueueOrder::ascending_utility);
    const auto a = allocate_random(g, reqs, c, 5);
    const auto b = allocate_random(g, reqs, c, 5);
    EXPECT_EQ(a.consumed, b.consumed);
    EXPECT_DOUBLE_EQ(a.total_throughput, b.total_throughput);
}

TEST(Allocate, InvariantsOnRandomInstances) {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> th(0.6, 0.9);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 6 + trial % 5;
        const auto small = oracle::random_connected(rng, n, 0.35, 4, 0.6, 0.99);
        const NetworkGraph g = support::to_network(small);
        std::vector<RoutingRequest> reqs;
        for (int k = 0; k < 3; ++k) reqs.push_back(request(k, n - 1 - k, 4, th(rng)));
        for (RouterKind kind : {RouterKind::q_path, RouterKind::q_leap}) {
            for (QueueOrder order : {QueueOrder::ascending_utility, QueueOrder::descending_utility,
                                     QueueOrder::random}) {
                const auto res = allocate(g, reqs, config_for(g, order, kind));
                expect_conserved(g, res);
                for (const auto& o : res.requests) {
                    EXPECT_LE(o.reroutes, o.request.demand);
                    EXPECT_TRUE(o.violating.empty());
                }
            }
        }
        expect_conserved(g, route_sequentially(g, reqs, RouterKind::q_path));
    }
}

TEST(Allocate, RejectsInvalidRequests) {
    const NetworkGraph g = bottleneck_fixture();
    EXPECT_THROW(allocate(g, {request(0, 0, 1, 0.8)}, config_for(g, QueueOrder::random)),
                 std::invalid_argument);
}

TEST(Baseline, SingleEdgeMatchesQPath) {
    NetworkGraph g(2);
    g.add_edge(node_id(0), node_id(1), 5, 0.9);
    const auto base = baseline_advance_purification(g, {request(0, 1, 3, 0.85)});
    ResidualGraph r(g);
    const auto qp = q_path(g, request(0, 1, 3, 0.85), r);
    EXPECT_DOUBLE_EQ(base.total_throughput, total_expected_throughput(qp));
    EXPECT_DOUBLE_EQ(base.total_throughput, 3.0);
}

TEST(Baseline, ThreeHopsMissThreshold) {
    NetworkGraph g(4);
    g.add_edge(node_id(0), node_id(1), 5, 0.85);
    g.add_edge(node_id(1), node_id(2), 5, 0.85);
    g.add_edge(node_id(2), node_id(3), 5, 0.85);
    const auto base = baseline_advance_purification(g, {request(0, 3, 2, 0.85)});
    ASSERT_EQ(base.requests[0].violating.size(), 1u);
    EXPECT_NEAR(base.requests[0].violating[0].end_to_end_fidelity, 0.614125, 1e-6);
    EXPECT_EQ(base.violating_connections, 2);
    EXPECT_DOUBLE_EQ(base.total_throughput, 0.0);
    EXPECT_TRUE(base.requests[0].denied());
}

TEST(Baseline, PurifiesToStrictestThreshold) {
    NetworkGraph g(2);
    g.add_edge(node_id(0), node_id(1), 9, 0.8);
    // 0.95 needs two rounds on 0.8, leaving floor(9 / 3) = 3 purified pairs.
    const auto base = baseline_advance_purification(g, {request(0, 1, 5, 0.95)});
    ASSERT_EQ(base.requests[0].accepted.size(), 1u);
    EXPECT_EQ(base.requests[0].accepted[0].decision.rounds, std::vector<int>{2});
    EXPECT_EQ(base.requests[0].accepted[0].width, 3);
    EXPECT_EQ(base.consumed[0], 9);
    EXPECT_DOUBLE_EQ(base.utilization, 1.0);
}

TEST(Baseline, ProportionalShareOnContendedEdge) {
    NetworkGraph g(4);
    g.add_edge(node_id(0), node_id(1), 10, 0.95);
    g.add_edge(node_id(2), node_id(0), 20, 0.95);
    g.add_edge(node_id(3), node_id(0), 20, 0.95);
    // Both requests cross edge 0-1 (capacity 10) with demands 4 and 7: floors
    // give 3 and 6, and the spare pair goes to the larger demand.
    const auto base = baseline_advance_purification(g, {request(2, 1, 4, 0.9), request(3, 1, 7, 0.9)});
    ASSERT_EQ(base.requests[0].accepted.size(), 1u);
    ASSERT_EQ(base.requests[1].accepted.size(), 1u);
    EXPECT_EQ(base.requests[0].accepted[0].width, 3);
    EXPECT_EQ(base.requests[1].accepted[0].width, 7);
    EXPECT_EQ(base.consumed[0], 10);
    EXPECT_FALSE(base.requests[0].denied());
}

TEST(Baseline, ConsumptionWithinCapacity) {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> th(0.6, 0.95);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + trial % 5;
        const auto small = oracle::random_connected(rng, n, 0.35, 8, 0.6, 0.99);
        const NetworkGraph g = support::to_network(small);
        const auto res = baseline_advance_purification(
            g, {request(0, n - 1, 5, th(rng)), request(1, n - 2, 5, th(rng))});
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            EXPECT_LE(res.consumed[e], g.edge(edge_id(e)).capacity);
        }
        EXPECT_LE(res.utilization, 1.0);
        for (const auto& o : res.requests) {
            for (const auto& s : o.accepted) EXPECT_GE(s.end_to_end_fidelity, o.request.threshold);
            for (const auto& s : o.violating) EXPECT_LT(s.end_to_end_fidelity, o.request.threshold);
        }
    }
}

}  // namespace
