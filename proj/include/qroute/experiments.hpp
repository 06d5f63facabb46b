#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qroute/multipair.hpp"
#include "qroute/topology.hpp"

namespace qroute {

enum class Algorithm { q_path, q_leap, alg3_path, alg3_leap, baseline, random_alloc };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::q_path,    Algorithm::q_leap,
                                               Algorithm::alg3_path, Algorithm::alg3_leap,
                                               Algorithm::baseline,  Algorithm::random_alloc};

/// Snake-case name used in configs and CSV output.
std::string_view algorithm_name(Algorithm algorithm);

/// Accepts both the config spelling (q_path) and the CLI spelling (q-path);
/// "random" is an alias for random_alloc.
std::optional<Algorithm> parse_algorithm(std::string_view name);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WeightPair {
    double alpha_star = 0.5;
    double beta_star = 0.5;
};

struct ExperimentConfig {
    TopologyConfig topology;  // mode file reads topology.file
    bool resample_topology = false;  // Waxman only: fresh graph per trial
    std::vector<double> thresholds{0.8};
    std::vector<int> capacities{50};
    std::vector<int> pair_counts{1};
    int demand = 50;
    int trials = 1000;
    std::uint64_t seed = 1;
    std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
    WeightPair weights;
    double fidelity_mean = 0.8;
    double fidelity_stddev = 0.1;
    std::size_t path_limit = kDefaultPathLimit;
    // Wall-clock is not reproducible, so it stays out of the CSV unless asked.
    bool record_runtime = false;
    int timestep_ms = 500;  // metadata only

    void validate() const;
};

/// Builds a config from JSON text; unknown keys and bad values throw
/// ConfigError. Relative topology paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SweepPoint {
    double threshold = 0.8;
    int capacity = 50;
    int pair_count = 1;
};

/// Distinct unordered S-D pairs drawn uniformly without replacement; throws
/// ConfigError when `count` exceeds the number of node pairs.
std::vector<RoutingRequest> sample_requests(std::size_t node_count, std::size_t count, int demand,
                                            double threshold, std::mt19937_64& rng);

/// Inputs shared by every algorithm in one trial.
struct TrialSample {
    NetworkGraph graph;
    std::vector<RoutingRequest> requests;
};

/// Graph with fresh fidelities and the point's capacity, plus distinct
/// unordered S-D pairs drawn without replacement.
TrialSample sample_trial(const NetworkGraph& base, const ExperimentConfig& config,
                         const SweepPoint& point, std::uint64_t trial_seed);

struct TrialMetrics {
    double throughput = 0.0;
    double fidelity = 0.0;  // served-weighted; 0 when nothing is served
    long long served = 0;
    double utilization = 0.0;
    std::size_t requests = 0;
    std::size_t denied = 0;
    long long violating = 0;  // connections established below threshold (baseline)
    long long accepted_below_threshold = 0;  // must stay 0 for the routers
    double runtime_ms = 0.0;
};

TrialMetrics run_algorithm(Algorithm algorithm, const TrialSample& sample,
                           const ExperimentConfig& config, std::uint64_t trial_seed);

std::map<Algorithm, TrialMetrics> run_trial(const TrialSample& sample,
                                            const ExperimentConfig& config,
                                            std::uint64_t trial_seed);

struct MetricsRow {
    Algorithm algorithm{};
    std::string sweep_param;
    std::string sweep_value;
    SweepPoint point;
    std::size_t trials = 0;
    double throughput_mean = 0.0;
    double throughput_se = 0.0;
    double fidelity_mean = 0.0;  // over trials that served something
    double utilization_mean = 0.0;
    double denial_rate = 0.0;
    double runtime_ms = 0.0;
    long long violating_connections = 0;
    long long served_connections = 0;
    long long accepted_below_threshold = 0;
    std::vector<double> throughputs;  // per trial, in trial order
};

/// Cartesian product of the sweep lists, `trials` per point. Trial t uses seed
/// `seed ^ t` at every point, so points are compared on common samples.
std::vector<MetricsRow> run_sweep(const ExperimentConfig& config);

/// Base graph for a config: the topology file, or the seeded Waxman graph.
NetworkGraph base_graph(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader =
    "algorithm,sweep_param,sweep_value,throughput_mean,throughput_se,fidelity_mean,"
    "utilization_mean,denial_rate,runtime_ms";

void write_csv(const std::vector<MetricsRow>& rows, std::ostream& out);
void write_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

struct RuntimeRow {
    std::size_t nodes = 0;
    Algorithm algorithm{};
    double mean_ms = 0.0;
    std::size_t samples = 0;
};

/// Mean wall-clock per single-pair invocation on seeded Waxman graphs. `base`
/// supplies the Waxman knobs, capacity and seed; node_count is overridden per scale.
std::vector<RuntimeRow> time_algorithms(const TopologyConfig& base,
                                        const std::vector<std::size_t>& node_counts,
                                        double threshold, std::size_t samples, int demand = 50);

void write_runtime_table(const std::vector<RuntimeRow>& rows, std::ostream& out);

/// Worker count: QROUTE_THREADS if set and positive, else the hardware count.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qroute
