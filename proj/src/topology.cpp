#include "qroute/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "qroute/purification.hpp"

namespace qroute {

double distance_km(const Point& a, const Point& b) {
    return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

NetworkGraph::NetworkGraph(std::size_t node_count) : adjacency_(node_count) {}

NetworkGraph::NetworkGraph(std::vector<Point> coordinates)
    : adjacency_(coordinates.size()), coordinates_(std::move(coordinates)) {}

EdgeId NetworkGraph::add_edge(NodeId u, NodeId v, int capacity, double initial_fidelity) {
    if (index(u) >= node_count() || index(v) >= node_count()) {
        throw std::invalid_argument("edge endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(index(u)));
    if (find_edge(u, v)) {
        throw std::invalid_argument("duplicate edge " + std::to_string(index(u)) + "-" +
                                    std::to_string(index(v)));
    }
    if (capacity < 1) throw std::invalid_argument("capacity must be at least 1");
    if (!(initial_fidelity >= 0.5 && initial_fidelity < 1.0)) {
        throw std::invalid_argument("fidelity must lie in [0.5, 1)");
    }
    const EdgeId id = edge_id(edges_.size());
    edges_.push_back({u, v, capacity, initial_fidelity});
    const auto insert_sorted = [](std::vector<Incidence>& list, Incidence inc) {
        auto pos = std::lower_bound(list.begin(), list.end(), inc, [](const auto& a, const auto& b) {
            return index(a.neighbor) < index(b.neighbor);
        });
        list.insert(pos, inc);
    };
    insert_sorted(adjacency_[index(u)], {v, id});
    insert_sorted(adjacency_[index(v)], {u, id});
    return id;
}

std::optional<EdgeId> NetworkGraph::find_edge(NodeId a, NodeId b) const {
    if (index(a) >= node_count() || index(b) >= node_count()) return std::nullopt;
    const auto& list = adjacency_[index(a)];
    auto pos = std::lower_bound(list.begin(), list.end(), b, [](const Incidence& inc, NodeId n) {
        return index(inc.neighbor) < index(n);
    });
    if (pos != list.end() && pos->neighbor == b) return pos->edge;
    return std::nullopt;
}

bool NetworkGraph::is_connected() const {
    if (node_count() == 0) return true;
    std::vector<char> seen(node_count(), 0);
    std::queue<NodeId> frontier;
    frontier.push(node_id(0));
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const NodeId n = frontier.front();
        frontier.pop();
        for (const auto& inc : neighbors(n)) {
            if (!seen[index(inc.neighbor)]) {
                seen[index(inc.neighbor)] = 1;
                ++reached;
                frontier.push(inc.neighbor);
            }
        }
    }
    return reached == node_count();
}

int NetworkGraph::max_capacity() const {
    int best = 0;
    for (const auto& e : edges_) best = std::max(best, e.capacity);
    return best;
}

long long NetworkGraph::total_capacity() const {
    long long total = 0;
    for (const auto& e : edges_) total += e.capacity;
    return total;
}

NetworkGraph NetworkGraph::with_uniform_capacity(int capacity) const {
    if (capacity < 1) throw std::invalid_argument("capacity must be at least 1");
    NetworkGraph copy = *this;
    for (auto& e : copy.edges_) e.capacity = capacity;
    return copy;
}

NetworkGraph NetworkGraph::with_fidelities(std::span<const double> fidelities) const {
    if (fidelities.size() != edges_.size()) {
        throw std::invalid_argument("fidelity count does not match edge count");
    }
    NetworkGraph copy = *this;
    for (std::size_t i = 0; i < fidelities.size(); ++i) {
        if (!(fidelities[i] >= 0.5 && fidelities[i] < 1.0)) {
            throw std::invalid_argument("fidelity must lie in [0.5, 1)");
        }
        copy.edges_[i].initial_fidelity = fidelities[i];
    }
    return copy;
}

bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    if (a.coordinates_.size() != b.coordinates_.size()) return false;
    for (std::size_t i = 0; i < a.coordinates_.size(); ++i) {
        if (a.coordinates_[i].x_km != b.coordinates_[i].x_km ||
            a.coordinates_[i].y_km != b.coordinates_[i].y_km) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
        const Edge& x = a.edges_[i];
        const Edge& y = b.edges_[i];
        if (x.u != y.u || x.v != y.v || x.capacity != y.capacity ||
            x.initial_fidelity != y.initial_fidelity) {
            return false;
        }
    }
    return true;
}

TopologyError::TopologyError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

double sample_fidelity(std::mt19937_64& rng, double mean, double stddev) {
    std::normal_distribution<double> normal(mean, stddev);
    return std::clamp(normal(rng), kMinSampledFidelity, kMaxSampledFidelity);
}

std::vector<double> draw_fidelities(std::size_t count, double mean, double stddev,
                                    std::mt19937_64& rng) {
    std::vector<double> out;
    out.reserve(count);
    std::normal_distribution<double> normal(mean, stddev);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(std::clamp(normal(rng), kMinSampledFidelity, kMaxSampledFidelity));
    }
    return out;
}

namespace {

NetworkGraph waxman_attempt(const TopologyConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, config.area_side_km);
    std::vector<Point> points(config.node_count);
    for (auto& p : points) {
        p.x_km = coord(rng);
        p.y_km = coord(rng);
    }
    double longest = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            longest = std::max(longest, distance_km(points[i], points[j]));
        }
    }
    NetworkGraph graph(points);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(config.fidelity_mean, config.fidelity_stddev);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = distance_km(points[i], points[j]);
            // Coincident points give d == L == 0; exp(0) == 1 connects them.
            const double scaled = longest > 0.0 ? d / (longest * config.gamma) : 0.0;
            const double p = config.kappa * std::exp(-scaled);
            if (unit(rng) < p) {
                const double f =
                    std::clamp(normal(rng), kMinSampledFidelity, kMaxSampledFidelity);
                graph.add_edge(node_id(i), node_id(j), config.capacity, f);
            }
        }
    }
    return graph;
}

}  // namespace

NetworkGraph generate_waxman(const TopologyConfig& config) {
    if (config.node_count < 2) throw std::invalid_argument("node_count must be at least 2");
    if (!(config.kappa > 0.0 && config.kappa <= 1.0)) {
        throw std::invalid_argument("kappa must lie in (0, 1]");
    }
    if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1]");
    }
    if (config.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
    if (!(config.area_side_km >= 0.0)) throw std::invalid_argument("area side must be >= 0");
    if (!(config.fidelity_stddev >= 0.0)) throw std::invalid_argument("stddev must be >= 0");
    for (int attempt = 0; attempt < kWaxmanMaxAttempts; ++attempt) {
        NetworkGraph graph =
            waxman_attempt(config, config.rng_seed + static_cast<std::uint64_t>(attempt));
        if (graph.is_connected()) return graph;
    }
    throw std::runtime_error("no connected Waxman graph within " +
                             std::to_string(kWaxmanMaxAttempts) + " attempts");
}

namespace {

struct PendingEdge {
    std::size_t u;
    std::size_t v;
    int capacity;
    double fidelity;
    std::size_t line;
};

template <typename T>
T read_field(std::istringstream& fields, const char* name, std::size_t line) {
    T value{};
    if (!(fields >> value)) throw TopologyError(std::string("missing or malformed ") + name, line);
    return value;
}

}  // namespace

NetworkGraph parse_topology(std::istream& in) {
    std::vector<std::pair<std::size_t, Point>> nodes;
    std::vector<PendingEdge> edges;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream fields(raw);
        std::string tag;
        if (!(fields >> tag)) continue;
        if (tag == "N") {
            const auto id = read_field<long long>(fields, "node id", line_no);
            if (id < 0) throw TopologyError("negative node id", line_no);
            Point p;
            p.x_km = read_field<double>(fields, "x coordinate", line_no);
            p.y_km = read_field<double>(fields, "y coordinate", line_no);
            nodes.emplace_back(static_cast<std::size_t>(id), p);
        } else if (tag == "E") {
            const auto u = read_field<long long>(fields, "edge endpoint", line_no);
            const auto v = read_field<long long>(fields, "edge endpoint", line_no);
            const auto capacity = read_field<int>(fields, "capacity", line_no);
            const auto fidelity = read_field<double>(fields, "fidelity", line_no);
            if (u < 0 || v < 0) throw TopologyError("negative node id", line_no);
            edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), capacity,
                             fidelity, line_no});
        } else {
            throw TopologyError("unknown record '" + tag + "'", line_no);
        }
        std::string extra;
        if (fields >> extra) throw TopologyError("trailing field '" + extra + "'", line_no);
    }

    std::vector<Point> coords(nodes.size());
    std::vector<char> seen(nodes.size(), 0);
    for (const auto& [id, p] : nodes) {
        if (id >= nodes.size()) {
            throw TopologyError("node ids must be contiguous from 0", 0);
        }
        if (seen[id]) throw TopologyError("duplicate node " + std::to_string(id), 0);
        seen[id] = 1;
        coords[id] = p;
    }
    NetworkGraph graph(std::move(coords));
    for (const auto& e : edges) {
        if (e.u >= graph.node_count() || e.v >= graph.node_count()) {
            throw TopologyError("edge references undeclared node", e.line);
        }
        try {
            graph.add_edge(node_id(e.u), node_id(e.v), e.capacity, e.fidelity);
        } catch (const std::invalid_argument& err) {
            throw TopologyError(err.what(), e.line);
        }
    }
    return graph;
}

NetworkGraph load_topology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open " + path.string(), 0);
    return parse_topology(in);
}

void save_topology(const NetworkGraph& graph, std::ostream& out) {
    out << "# nodes " << graph.node_count() << ", edges " << graph.edge_count() << '\n';
    const auto coords = graph.coordinates();
    out << std::setprecision(17);
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const Point p = coords.empty() ? Point{} : coords[i];
        out << "N " << i << ' ' << p.x_km << ' ' << p.y_km << '\n';
    }
    for (const auto& e : graph.edges()) {
        out << "E " << index(e.u) << ' ' << index(e.v) << ' ' << e.capacity << ' '
            << e.initial_fidelity << '\n';
    }
}

void save_topology(const NetworkGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw TopologyError("cannot write " + path.string(), 0);
    save_topology(graph, out);
    if (!out) throw TopologyError("write failed for " + path.string(), 0);
}

double max_purified_fidelity(const Edge& edge) {
    return PurificationCostTable(edge.initial_fidelity, edge.capacity).max_fidelity();
}

NetworkGraph prune_infeasible_edges(const NetworkGraph& graph, double threshold) {
    NetworkGraph pruned(graph.node_count());
    if (graph.has_coordinates()) {
        pruned = NetworkGraph(std::vector<Point>(graph.coordinates().begin(),
                                                 graph.coordinates().end()));
    }
    for (const auto& e : graph.edges()) {
        if (max_purified_fidelity(e) >= threshold) {
            pruned.add_edge(e.u, e.v, e.capacity, e.initial_fidelity);
        }
    }
    return pruned;
}

}  // namespace qroute
