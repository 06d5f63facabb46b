#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qroute {

enum class NodeId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

constexpr std::size_t index(NodeId n) { return static_cast<std::size_t>(n); }
constexpr std::size_t index(EdgeId e) { return static_cast<std::size_t>(e); }
constexpr NodeId node_id(std::size_t i) { return static_cast<NodeId>(i); }
constexpr EdgeId edge_id(std::size_t i) { return static_cast<EdgeId>(i); }

// Lowest and highest fidelity a sampled channel may take.
inline constexpr double kMinSampledFidelity = 0.5;
inline constexpr double kMaxSampledFidelity = 0.99;

struct Point {
    double x_km = 0.0;
    double y_km = 0.0;
};

double distance_km(const Point& a, const Point& b);

/// Undirected quantum channel holding `capacity` entangled pairs per slot,
/// each generated with fidelity `initial_fidelity`.
struct Edge {
    NodeId u{};
    NodeId v{};
    int capacity = 1;
    double initial_fidelity = 0.5;

    NodeId other(NodeId n) const { return n == u ? v : u; }
};

struct Incidence {
    NodeId neighbor{};
    EdgeId edge{};
};

/// Immutable-after-construction capacitated graph. Adjacency lists are kept
/// sorted by neighbour id so every search over the graph is deterministic.
class NetworkGraph {
public:
    NetworkGraph() = default;
    explicit NetworkGraph(std::size_t node_count);
    explicit NetworkGraph(std::vector<Point> coordinates);

    /// Throws std::invalid_argument on self-loops, duplicates, capacity < 1
    /// or a fidelity outside [0.5, 1).
    EdgeId add_edge(NodeId u, NodeId v, int capacity, double initial_fidelity);

    std::size_t node_count() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const Edge& edge(EdgeId e) const { return edges_[index(e)]; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const Incidence> neighbors(NodeId n) const { return adjacency_[index(n)]; }
    std::size_t degree(NodeId n) const { return adjacency_[index(n)].size(); }
    std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;

    bool has_coordinates() const { return !coordinates_.empty(); }
    std::span<const Point> coordinates() const { return coordinates_; }

    bool is_connected() const;
    int max_capacity() const;
    long long total_capacity() const;

    NetworkGraph with_uniform_capacity(int capacity) const;
    NetworkGraph with_fidelities(std::span<const double> fidelities) const;

    friend bool operator==(const NetworkGraph& a, const NetworkGraph& b);

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::vector<Point> coordinates_;
};

/// Parse failure carrying the offending 1-based line (0 when not line-bound).
class TopologyError : public std::runtime_error {
public:
    TopologyError(const std::string& what, std::size_t line);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct TopologyConfig {
    enum class Mode { waxman, file };

    Mode mode = Mode::waxman;
    std::filesystem::path file;
    std::size_t node_count = 100;
    double kappa = 0.8;
    double gamma = 0.5;
    double area_side_km = 2000.0;
    int capacity = 10;
    double fidelity_mean = 0.8;
    double fidelity_stddev = 0.1;
    std::uint64_t rng_seed = 1;
};

inline constexpr int kWaxmanMaxAttempts = 100;

double sample_fidelity(std::mt19937_64& rng, double mean, double stddev);
std::vector<double> draw_fidelities(std::size_t count, double mean, double stddev,
                                    std::mt19937_64& rng);

/// Throws std::invalid_argument for bad parameters and std::runtime_error if
/// no connected graph appears within kWaxmanMaxAttempts seeds.
NetworkGraph generate_waxman(const TopologyConfig& config);

NetworkGraph parse_topology(std::istream& in);
NetworkGraph load_topology(const std::filesystem::path& path);
void save_topology(const NetworkGraph& graph, std::ostream& out);
void save_topology(const NetworkGraph& graph, const std::filesystem::path& path);

/// Largest fidelity the channel can reach by pumping all of its pairs.
double max_purified_fidelity(const Edge& edge);

/// Keeps node ids; drops every edge whose fully-purified fidelity is below
/// `threshold`. Surviving edges are re-indexed in their original order.
NetworkGraph prune_infeasible_edges(const NetworkGraph& graph, double threshold);

}  // namespace qroute
