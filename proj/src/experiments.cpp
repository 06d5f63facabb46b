#include "qroute/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

namespace qroute {

namespace {

using json = nlohmann::json;

struct AlgorithmName {
    Algorithm algorithm;
    std::string_view config_name;
    std::string_view cli_name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::q_path, "q_path", "q-path"},
    {Algorithm::q_leap, "q_leap", "q-leap"},
    {Algorithm::alg3_path, "alg3_path", "alg3-path"},
    {Algorithm::alg3_leap, "alg3_leap", "alg3-leap"},
    {Algorithm::baseline, "baseline", "baseline"},
    {Algorithm::random_alloc, "random_alloc", "random"},
};

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

template <typename T>
T get_as(const json& value, std::string_view key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
    }
}

template <typename T>
std::vector<T> get_list(const json& value, std::string_view key) {
    if (!value.is_array()) {
        // A scalar is shorthand for a one-element sweep.
        return {get_as<T>(value, key)};
    }
    std::vector<T> out;
    for (const auto& item : value) out.push_back(get_as<T>(item, key));
    return out;
}

TopologyConfig parse_topology_config(const json& value, const std::filesystem::path& base_dir) {
    TopologyConfig t;
    auto resolve = [&](const std::string& file) {
        std::filesystem::path p(file);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    if (value.is_string()) {
        t.mode = TopologyConfig::Mode::file;
        t.file = resolve(value.get<std::string>());
        return t;
    }
    if (!value.is_object()) throw ConfigError("config key 'topology' must be a path or object");
    for (const auto& [key, item] : value.items()) {
        if (key == "mode") {
            const auto mode = get_as<std::string>(item, key);
            if (mode == "waxman") {
                t.mode = TopologyConfig::Mode::waxman;
            } else if (mode == "file") {
                t.mode = TopologyConfig::Mode::file;
            } else {
                throw ConfigError("unknown topology mode '" + mode + "'");
            }
        } else if (key == "file") {
            t.mode = TopologyConfig::Mode::file;
            t.file = resolve(get_as<std::string>(item, key));
        } else if (key == "node_count") {
            t.node_count = get_as<std::size_t>(item, key);
        } else if (key == "kappa") {
            t.kappa = get_as<double>(item, key);
        } else if (key == "gamma") {
            t.gamma = get_as<double>(item, key);
        } else if (key == "area_side_km") {
            t.area_side_km = get_as<double>(item, key);
        } else if (key == "capacity") {
            t.capacity = get_as<int>(item, key);
        } else if (key == "fidelity_mean") {
            t.fidelity_mean = get_as<double>(item, key);
        } else if (key == "fidelity_stddev") {
            t.fidelity_stddev = get_as<double>(item, key);
        } else if (key == "rng_seed") {
            t.rng_seed = get_as<std::uint64_t>(item, key);
        } else {
            throw ConfigError("unknown topology key '" + key + "'");
        }
    }
    if (t.mode == TopologyConfig::Mode::file && t.file.empty()) {
        throw ConfigError("topology mode 'file' needs a 'file' entry");
    }
    return t;
}

Algorithm checked_algorithm(const std::string& name) {
    auto a = parse_algorithm(name);
    if (!a) throw ConfigError("unknown algorithm '" + name + "'");
    return *a;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

TrialMetrics metrics_from(const AllocationResult& result, double threshold) {
    TrialMetrics m;
    m.throughput = result.total_throughput;
    m.fidelity = result.mean_fidelity;
    m.served = result.served_connections;
    m.utilization = result.utilization;
    m.requests = result.requests.size();
    m.denied = result.denied_count;
    m.violating = result.violating_connections;
    for (const auto& outcome : result.requests) {
        for (const auto& s : outcome.accepted) {
            if (s.end_to_end_fidelity < threshold) m.accepted_below_threshold += s.width;
        }
    }
    return m;
}

AllocationConfig allocation_config(const NetworkGraph& graph, const ExperimentConfig& config,
                                   RouterKind router) {
    auto a = AllocationConfig::for_graph(graph, config.weights.alpha_star, config.weights.beta_star,
                                         router);
    a.router_options.path_limit = config.path_limit;
    return a;
}

struct Job {
    std::size_t point = 0;
    std::size_t trial = 0;
};

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) {
    for (const auto& n : kAlgorithmNames) {
        if (n.algorithm == algorithm) return n.config_name;
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (const auto& n : kAlgorithmNames) {
        if (name == n.config_name || name == n.cli_name) return n.algorithm;
    }
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (thresholds.empty() || capacities.empty() || pair_counts.empty()) {
        throw ConfigError("sweep lists must be nonempty");
    }
    for (double t : thresholds) {
        if (!(t >= 0.5 && t < 1.0)) throw ConfigError("thresholds must lie in [0.5, 1)");
    }
    for (int c : capacities) {
        if (c < 1) throw ConfigError("capacities must be at least 1");
    }
    for (int p : pair_counts) {
        if (p < 1) throw ConfigError("pair counts must be at least 1");
    }
    if (demand < 1) throw ConfigError("demand must be at least 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
    if (weights.alpha_star < 0.0 || weights.beta_star < 0.0) {
        throw ConfigError("utility weights must be non-negative");
    }
    if (!(fidelity_stddev >= 0.0)) throw ConfigError("fidelity_stddev must be non-negative");
    if (topology.mode == TopologyConfig::Mode::waxman && topology.node_count < 2) {
        throw ConfigError("a Waxman topology needs at least 2 nodes");
    }
}

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig c;
    for (const auto& [key, value] : doc.items()) {
        if (key == "topology") {
            c.topology = parse_topology_config(value, base_dir);
        } else if (key == "resample_topology") {
            c.resample_topology = get_as<bool>(value, key);
        } else if (key == "thresholds") {
            c.thresholds = get_list<double>(value, key);
        } else if (key == "capacities") {
            c.capacities = get_list<int>(value, key);
        } else if (key == "pair_counts") {
            c.pair_counts = get_list<int>(value, key);
        } else if (key == "demand" || key == "demand_per_pair") {
            c.demand = get_as<int>(value, key);
        } else if (key == "trials") {
            c.trials = get_as<int>(value, key);
        } else if (key == "seed" || key == "rng_seed") {
            c.seed = get_as<std::uint64_t>(value, key);
        } else if (key == "algorithms") {
            c.algorithms.clear();
            for (const auto& name : get_list<std::string>(value, key)) {
                c.algorithms.push_back(checked_algorithm(name));
            }
        } else if (key == "weights") {
            if (value.is_array() && value.size() == 2) {
                c.weights = {get_as<double>(value[0], key), get_as<double>(value[1], key)};
            } else if (value.is_object()) {
                for (const auto& [wk, wv] : value.items()) {
                    if (wk == "alpha_star") {
                        c.weights.alpha_star = get_as<double>(wv, wk);
                    } else if (wk == "beta_star") {
                        c.weights.beta_star = get_as<double>(wv, wk);
                    } else {
                        throw ConfigError("unknown weights key '" + wk + "'");
                    }
                }
            } else {
                throw ConfigError("weights must be [alpha_star, beta_star] or an object");
            }
        } else if (key == "fidelity_mean") {
            c.fidelity_mean = get_as<double>(value, key);
        } else if (key == "fidelity_stddev") {
            c.fidelity_stddev = get_as<double>(value, key);
        } else if (key == "path_limit") {
            c.path_limit = get_as<std::size_t>(value, key);
        } else if (key == "record_runtime") {
            c.record_runtime = get_as<bool>(value, key);
        } else if (key == "timestep_ms") {
            c.timestep_ms = get_as<int>(value, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_config(text.str(), path.parent_path());
}

NetworkGraph base_graph(const ExperimentConfig& config) {
    if (config.topology.mode == TopologyConfig::Mode::file) {
        return load_topology(config.topology.file);
    }
    return generate_waxman(config.topology);
}

std::vector<RoutingRequest> sample_requests(std::size_t node_count, std::size_t count, int demand,
                                            double threshold, std::mt19937_64& rng) {
    if (node_count < 2 || count > node_count * (node_count - 1) / 2) {
        throw ConfigError("more S-D pairs requested than the topology has node pairs");
    }
    std::uniform_int_distribution<std::size_t> pick(0, node_count - 1);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<RoutingRequest> requests;
    while (requests.size() < count) {
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        if (a == b || !seen.insert(std::minmax(a, b)).second) continue;
        requests.push_back({node_id(a), node_id(b), demand, threshold});
    }
    return requests;
}

TrialSample sample_trial(const NetworkGraph& base, const ExperimentConfig& config,
                         const SweepPoint& point, std::uint64_t trial_seed) {
    std::mt19937_64 rng(trial_seed);
    NetworkGraph graph = base;
    if (config.resample_topology && config.topology.mode == TopologyConfig::Mode::waxman) {
        TopologyConfig t = config.topology;
        t.rng_seed = trial_seed;
        graph = generate_waxman(t);
    }
    const auto fidelities =
        draw_fidelities(graph.edge_count(), config.fidelity_mean, config.fidelity_stddev, rng);
    graph = graph.with_fidelities(fidelities).with_uniform_capacity(point.capacity);

    auto requests = sample_requests(graph.node_count(), static_cast<std::size_t>(point.pair_count),
                                    config.demand, point.threshold, rng);
    return {std::move(graph), std::move(requests)};
}

TrialMetrics run_algorithm(Algorithm algorithm, const TrialSample& sample,
                           const ExperimentConfig& config, std::uint64_t trial_seed) {
    const auto& g = sample.graph;
    const auto& reqs = sample.requests;
    const double threshold = reqs.empty() ? 0.5 : reqs.front().threshold;
    RouterOptions options;
    options.path_limit = config.path_limit;

    const auto start = std::chrono::steady_clock::now();
    AllocationResult result;
    switch (algorithm) {
        case Algorithm::q_path:
            result = route_sequentially(g, reqs, RouterKind::q_path, options);
            break;
        case Algorithm::q_leap:
            result = route_sequentially(g, reqs, RouterKind::q_leap, options);
            break;
        case Algorithm::alg3_path:
            result = allocate(g, reqs, allocation_config(g, config, RouterKind::q_path));
            break;
        case Algorithm::alg3_leap:
            result = allocate(g, reqs, allocation_config(g, config, RouterKind::q_leap));
            break;
        case Algorithm::baseline:
            result = baseline_advance_purification(g, reqs);
            break;
        case Algorithm::random_alloc:
            result = allocate_random(g, reqs, allocation_config(g, config, RouterKind::q_path),
                                     trial_seed);
            break;
    }
    const auto stop = std::chrono::steady_clock::now();

    TrialMetrics m = metrics_from(result, threshold);
    if (config.record_runtime) {
        m.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    }
    return m;
}

std::map<Algorithm, TrialMetrics> run_trial(const TrialSample& sample,
                                            const ExperimentConfig& config,
                                            std::uint64_t trial_seed) {
    std::map<Algorithm, TrialMetrics> out;
    for (Algorithm a : config.algorithms) out[a] = run_algorithm(a, sample, config, trial_seed);
    return out;
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig& config) {
    config.validate();
    const NetworkGraph base = base_graph(config);

    std::vector<SweepPoint> points;
    for (double t : config.thresholds) {
        for (int c : config.capacities) {
            for (int p : config.pair_counts) points.push_back({t, c, p});
        }
    }
    std::vector<std::string> varied;
    if (config.thresholds.size() > 1) varied.push_back("threshold");
    if (config.capacities.size() > 1) varied.push_back("capacity");
    if (config.pair_counts.size() > 1) varied.push_back("pair_count");
    if (varied.empty()) varied.push_back("threshold");

    auto value_of = [](const SweepPoint& p, const std::string& name) {
        if (name == "threshold") return format_short(p.threshold);
        if (name == "capacity") return std::to_string(p.capacity);
        return std::to_string(p.pair_count);
    };
    auto join = [&](const SweepPoint& p, bool values) {
        std::string out;
        for (std::size_t i = 0; i < varied.size(); ++i) {
            if (i) out += '|';
            out += values ? value_of(p, varied[i]) : varied[i];
        }
        return out;
    };

    const std::size_t trials = static_cast<std::size_t>(config.trials);
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t t = 0; t < trials; ++t) jobs.push_back({p, t});
    }
    std::vector<std::map<Algorithm, TrialMetrics>> results(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const std::uint64_t trial_seed = config.seed ^ static_cast<std::uint64_t>(jobs[j].trial);
        const TrialSample sample = sample_trial(base, config, points[jobs[j].point], trial_seed);
        results[j] = run_trial(sample, config, trial_seed);
    });

    std::vector<MetricsRow> rows;
    for (Algorithm a : config.algorithms) {
        for (std::size_t p = 0; p < points.size(); ++p) {
            MetricsRow row;
            row.algorithm = a;
            row.point = points[p];
            row.sweep_param = join(points[p], false);
            row.sweep_value = join(points[p], true);
            row.trials = trials;
            std::vector<double> fidelities, utilizations, runtimes;
            std::size_t requests = 0, denied = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const TrialMetrics& m = results[p * trials + t].at(a);
                row.throughputs.push_back(m.throughput);
                if (m.served > 0) fidelities.push_back(m.fidelity);
                utilizations.push_back(m.utilization);
                runtimes.push_back(m.runtime_ms);
                requests += m.requests;
                denied += m.denied;
                row.violating_connections += m.violating;
                row.served_connections += m.served;
                row.accepted_below_threshold += m.accepted_below_threshold;
            }
            row.throughput_mean = mean_of(row.throughputs);
            row.throughput_se = standard_error(row.throughputs);
            row.fidelity_mean = mean_of(fidelities);
            row.utilization_mean = mean_of(utilizations);
            row.denial_rate =
                requests > 0 ? static_cast<double>(denied) / static_cast<double>(requests) : 0.0;
            row.runtime_ms = mean_of(runtimes);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << algorithm_name(r.algorithm) << ',' << r.sweep_param << ',' << r.sweep_value << ','
            << format_number(r.throughput_mean) << ',' << format_number(r.throughput_se) << ','
            << format_number(r.fidelity_mean) << ',' << format_number(r.utilization_mean) << ','
            << format_number(r.denial_rate) << ',' << format_number(r.runtime_ms) << '\n';
    }
}

void write_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(rows, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<RuntimeRow> time_algorithms(const TopologyConfig& base,
                                        const std::vector<std::size_t>& node_counts,
                                        double threshold, std::size_t samples, int demand) {
    using clock = std::chrono::steady_clock;
    constexpr Algorithm timed[] = {Algorithm::q_leap, Algorithm::baseline, Algorithm::q_path};
    std::vector<RuntimeRow> rows;
    for (std::size_t n : node_counts) {
        TopologyConfig t = base;
        t.mode = TopologyConfig::Mode::waxman;
        t.node_count = n;
        const NetworkGraph graph = generate_waxman(t);
        std::mt19937_64 rng(base.rng_seed ^ static_cast<std::uint64_t>(n));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<RoutingRequest> requests;
        while (requests.size() < samples) {
            const std::size_t a = pick(rng);
            const std::size_t b = pick(rng);
            if (a != b) requests.push_back({node_id(a), node_id(b), demand, threshold});
        }
        for (Algorithm a : timed) {
            double total_ms = 0.0;
            for (const auto& r : requests) {
                const auto start = clock::now();
                if (a == Algorithm::baseline) {
                    baseline_advance_purification(graph, {r});
                } else {
                    ResidualGraph residual(graph);
                    route(a == Algorithm::q_path ? RouterKind::q_path : RouterKind::q_leap, graph,
                          r, residual);
                }
                total_ms += std::chrono::duration<double, std::milli>(clock::now() - start).count();
            }
            rows.push_back({n, a, samples ? total_ms / static_cast<double>(samples) : 0.0, samples});
        }
    }
    return rows;
}

void write_runtime_table(const std::vector<RuntimeRow>& rows, std::ostream& out) {
    out << "nodes,algorithm,mean_ms,samples\n";
    for (const auto& r : rows) {
        out << r.nodes << ',' << algorithm_name(r.algorithm) << ',' << format_number(r.mean_ms)
            << ',' << r.samples << '\n';
    }
}

std::size_t worker_count() {
    if (const char* env = std::getenv("QROUTE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace qroute
