#pragma once

#include <vector>

#include "oracles.hpp"
#include "qroute/topology.hpp"

namespace support {

inline qroute::NetworkGraph to_network(const oracle::SmallGraph& g) {
    qroute::NetworkGraph out(static_cast<std::size_t>(g.nodes));
    for (std::size_t e = 0; e < g.ends.size(); ++e) {
        out.add_edge(qroute::node_id(static_cast<std::size_t>(g.ends[e].first)),
                     qroute::node_id(static_cast<std::size_t>(g.ends[e].second)), g.capacity[e],
                     g.fidelity[e]);
    }
    return out;
}

inline std::vector<qroute::NodeId> nodes(std::initializer_list<int> ids) {
    std::vector<qroute::NodeId> out;
    for (int i : ids) out.push_back(qroute::node_id(static_cast<std::size_t>(i)));
    return out;
}

}  // namespace support
