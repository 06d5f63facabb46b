// qroute: command-line front end for the routing engine and experiment harness.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qroute/experiments.hpp"
#include "qroute/multipair.hpp"
#include "qroute/routing.hpp"
#include "qroute/topology.hpp"

namespace {

using json = nlohmann::json;
using namespace qroute;

constexpr int kExitOk = 0;
constexpr int kExitDenied = 1;
constexpr int kExitConfig = 2;

constexpr const char* kFormats = R"(Output formats:
  route-single  one JSON object per line per solution:
                {"path":[...],"edges":[...],"rounds":[...],"fidelity":F,
                 "width":W,"expected_throughput":T,"per_edge_expected":[...],
                 "cost":C,"emitted_at_cost":K}
  route-multi   one JSON object summarizing the allocation
  sweep         CSV: algorithm,sweep_param,sweep_value,throughput_mean,
                throughput_se,fidelity_mean,utilization_mean,denial_rate,runtime_ms
  bench         CSV: nodes,algorithm,mean_ms,samples
Exit status: 0 success, 1 every request denied, 2 bad arguments or config.
QROUTE_THREADS caps the sweep worker count.)";

struct Options {
    std::string config;
    std::string out;
    std::string topology;
    std::optional<std::uint64_t> seed;
    std::string algo = "q-path";
    double threshold = 0.8;
    int src = -1;
    int dst = -1;
    int demand = 1;
    // gen-topology
    std::size_t nodes = 100;
    int capacity = 10;
    double kappa = 0.8;
    double gamma = 0.5;
    double area = 2000.0;
    // route-multi
    std::vector<std::string> requests;
    int pairs = 0;
    // bench
    std::vector<std::size_t> scales{100, 200, 300, 400, 500};
    std::size_t samples = 10;
    double bench_threshold = 0.6;
    int bench_capacity = 10;
    int bench_demand = 50;
    double bench_kappa = 0.8;
    double bench_gamma = 0.1;
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ConfigError("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

Algorithm algorithm_from(const std::string& name) {
    auto a = parse_algorithm(name);
    if (!a) throw ConfigError("unknown algorithm '" + name + "'");
    return *a;
}

NetworkGraph graph_from(const Options& o) {
    if (!o.topology.empty()) return load_topology(o.topology);
    if (!o.config.empty()) return base_graph(load_experiment_config(o.config));
    throw ConfigError("a --topology file or --config is required");
}

ExperimentConfig config_from(const Options& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
}

json solution_json(const RoutingSolution& s) {
    json j;
    std::vector<std::uint32_t> nodes, edges;
    for (NodeId n : s.path.nodes) nodes.push_back(static_cast<std::uint32_t>(n));
    for (EdgeId e : s.path.edges) edges.push_back(static_cast<std::uint32_t>(e));
    j["path"] = nodes;
    j["edges"] = edges;
    j["rounds"] = s.decision.rounds;
    j["fidelity"] = s.end_to_end_fidelity;
    j["width"] = s.width;
    j["expected_throughput"] = s.expected_throughput;
    j["per_edge_expected"] = s.per_edge_expected;
    j["cost"] = s.total_cost;
    j["emitted_at_cost"] = s.emitted_at_cost;
    return j;
}

AllocationResult run_selected(Algorithm algorithm, const NetworkGraph& graph,
                              const std::vector<RoutingRequest>& requests,
                              const ExperimentConfig& config) {
    auto alloc = [&](RouterKind router) {
        auto a = AllocationConfig::for_graph(graph, config.weights.alpha_star,
                                             config.weights.beta_star, router);
        a.router_options.path_limit = config.path_limit;
        return a;
    };
    RouterOptions options;
    options.path_limit = config.path_limit;
    switch (algorithm) {
        case Algorithm::q_path:
            return route_sequentially(graph, requests, RouterKind::q_path, options);
        case Algorithm::q_leap:
            return route_sequentially(graph, requests, RouterKind::q_leap, options);
        case Algorithm::alg3_path:
            return allocate(graph, requests, alloc(RouterKind::q_path));
        case Algorithm::alg3_leap:
            return allocate(graph, requests, alloc(RouterKind::q_leap));
        case Algorithm::baseline:
            return baseline_advance_purification(graph, requests);
        case Algorithm::random_alloc:
            return allocate_random(graph, requests, alloc(RouterKind::q_path), config.seed);
    }
    return {};
}

RoutingRequest parse_request(const std::string& text, const Options& o) {
    // "src,dst[,demand[,threshold]]"
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 4) {
        throw ConfigError("--request expects src,dst[,demand[,threshold]]: '" + text + "'");
    }
    try {
        RoutingRequest r;
        r.source = node_id(std::stoul(parts[0]));
        r.destination = node_id(std::stoul(parts[1]));
        r.demand = parts.size() > 2 ? std::stoi(parts[2]) : o.demand;
        r.threshold = parts.size() > 3 ? std::stod(parts[3]) : o.threshold;
        return r;
    } catch (const std::logic_error&) {
        throw ConfigError("malformed --request '" + text + "'");
    }
}

int cmd_gen_topology(const Options& o) {
    NetworkGraph graph = [&] {
        if (!o.config.empty()) {
            ExperimentConfig c = config_from(o);
            if (o.seed) c.topology.rng_seed = *o.seed;
            return base_graph(c);
        }
        TopologyConfig t;
        t.node_count = o.nodes;
        t.capacity = o.capacity;
        t.kappa = o.kappa;
        t.gamma = o.gamma;
        t.area_side_km = o.area;
        if (o.seed) t.rng_seed = *o.seed;
        return generate_waxman(t);
    }();
    Output out(o.out);
    save_topology(graph, out.stream());
    return kExitOk;
}

int cmd_route_single(const Options& o) {
    if (o.src < 0 || o.dst < 0) throw ConfigError("--src and --dst are required");
    const NetworkGraph graph = graph_from(o);
    const ExperimentConfig config = config_from(o);
    const RoutingRequest request{node_id(static_cast<std::size_t>(o.src)),
                                 node_id(static_cast<std::size_t>(o.dst)), o.demand, o.threshold};
    try {
        validate(request, graph);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto result = run_selected(algorithm_from(o.algo), graph, {request}, config);
    Output out(o.out);
    const auto& outcome = result.requests.front();
    for (const auto& s : outcome.accepted) out.stream() << solution_json(s).dump() << '\n';
    return outcome.accepted.empty() ? kExitDenied : kExitOk;
}

int cmd_route_multi(const Options& o) {
    const NetworkGraph graph = graph_from(o);
    const ExperimentConfig config = config_from(o);
    std::vector<RoutingRequest> requests;
    for (const auto& text : o.requests) requests.push_back(parse_request(text, o));
    if (requests.empty()) {
        if (o.pairs < 1) throw ConfigError("give --request entries or --pairs");
        // Keep the file's fidelities; only the pairs are drawn.
        std::mt19937_64 rng(config.seed);
        requests = sample_requests(graph.node_count(), static_cast<std::size_t>(o.pairs),
                                   o.demand, o.threshold, rng);
    }
    for (const auto& r : requests) {
        try {
            validate(r, graph);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const auto result = run_selected(algorithm_from(o.algo), graph, requests, config);

    json summary;
    summary["algorithm"] = std::string(algorithm_name(algorithm_from(o.algo)));
    summary["total_throughput"] = result.total_throughput;
    summary["mean_fidelity"] = result.mean_fidelity;
    summary["utilization"] = result.utilization;
    summary["denied"] = result.denied_count;
    summary["served_connections"] = result.served_connections;
    summary["violating_connections"] = result.violating_connections;
    json per_request = json::array();
    for (const auto& outcome : result.requests) {
        json r;
        r["source"] = static_cast<std::uint32_t>(outcome.request.source);
        r["destination"] = static_cast<std::uint32_t>(outcome.request.destination);
        r["demand"] = outcome.request.demand;
        r["threshold"] = outcome.request.threshold;
        r["throughput"] = outcome.throughput;
        r["reroutes"] = outcome.reroutes;
        r["denied"] = outcome.denied();
        json sols = json::array();
        for (const auto& s : outcome.accepted) sols.push_back(solution_json(s));
        r["solutions"] = sols;
        per_request.push_back(r);
    }
    summary["requests"] = per_request;
    Output out(o.out);
    out.stream() << summary.dump(2) << '\n';
    return result.denied_count == result.requests.size() && !result.requests.empty()
               ? kExitDenied
               : kExitOk;
}

int cmd_sweep(const Options& o, bool algo_given) {
    if (o.config.empty()) throw ConfigError("sweep needs --config");
    ExperimentConfig config = config_from(o);
    if (algo_given) config.algorithms = {algorithm_from(o.algo)};
    const auto rows = run_sweep(config);
    Output out(o.out);
    write_csv(rows, out.stream());
    return kExitOk;
}

int cmd_bench(const Options& o) {
    TopologyConfig t;
    t.kappa = o.bench_kappa;
    t.gamma = o.bench_gamma;
    t.capacity = o.bench_capacity;
    t.rng_seed = o.seed.value_or(1);
    const auto rows = time_algorithms(t, o.scales, o.bench_threshold, o.samples, o.bench_demand);
    Output out(o.out);
    write_runtime_table(rows, out.stream());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fidelity-guaranteed entanglement routing"};
    app.footer(kFormats);
    app.require_subcommand(1, 1);

    Options o;
    std::uint64_t seed_value = 0;
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_value, "RNG seed override");
    };

    auto* gen = app.add_subcommand("gen-topology", "Write a Waxman topology file");
    gen->add_option("--config", o.config, "Experiment config whose topology to build");
    gen->add_option("--out", o.out, "Output file (default stdout)");
    gen->add_option("--nodes", o.nodes, "Node count")->check(CLI::Range(2, 100000));
    gen->add_option("--capacity", o.capacity, "Pairs per channel")->check(CLI::PositiveNumber);
    gen->add_option("--kappa", o.kappa, "Waxman kappa");
    gen->add_option("--gamma", o.gamma, "Waxman gamma");
    gen->add_option("--area", o.area, "Square side in km");
    add_seed(gen);

    auto* single = app.add_subcommand("route-single", "Route one S-D pair, print JSON lines");
    auto* multi = app.add_subcommand("route-multi", "Allocate several S-D pairs");
    for (auto* cmd : {single, multi}) {
        cmd->add_option("--topology", o.topology, "Topology file");
        cmd->add_option("--config", o.config, "Experiment config (topology and weights)");
        cmd->add_option("--out", o.out, "Output file (default stdout)");
        cmd->add_option("--algo", o.algo,
                        "q-path|q-leap|alg3-path|alg3-leap|baseline|random");
        cmd->add_option("--threshold", o.threshold, "End-to-end fidelity threshold");
        cmd->add_option("--demand", o.demand, "Connections per pair")->check(CLI::PositiveNumber);
        add_seed(cmd);
    }
    single->add_option("--src", o.src, "Source node")->required();
    single->add_option("--dst", o.dst, "Destination node")->required();
    multi->add_option("--request", o.requests, "src,dst[,demand[,threshold]] (repeatable)");
    multi->add_option("--pairs", o.pairs, "Sample this many pairs instead");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep, write CSV");
    sweep->add_option("--config", o.config, "Experiment config")->required();
    sweep->add_option("--out", o.out, "CSV output (default stdout)");
    auto* sweep_algo = sweep->add_option("--algo", o.algo, "Run only this algorithm");
    add_seed(sweep);

    auto* bench = app.add_subcommand("bench", "Time single-pair routing on Waxman graphs");
    bench->add_option("--nodes", o.scales, "Node counts");
    bench->add_option("--threshold", o.bench_threshold, "Fidelity threshold")
        ->capture_default_str();
    bench->add_option("--capacity", o.bench_capacity, "Pairs per channel")
        ->capture_default_str();
    bench->add_option("--samples", o.samples, "Pairs timed per scale")->capture_default_str();
    bench->add_option("--kappa", o.bench_kappa, "Waxman kappa")->capture_default_str();
    bench->add_option("--gamma", o.bench_gamma, "Waxman gamma")->capture_default_str();
    bench->add_option("--demand", o.bench_demand, "Connections per pair")->capture_default_str();
    bench->add_option("--out", o.out, "Output file (default stdout)");
    add_seed(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitConfig;
    }

    for (auto* cmd : app.get_subcommands()) {
        if (auto* opt = cmd->get_option_no_throw("--seed"); opt && opt->count() > 0) {
            o.seed = seed_value;
        }
    }

    try {
        if (gen->parsed()) return cmd_gen_topology(o);
        if (single->parsed()) return cmd_route_single(o);
        if (multi->parsed()) return cmd_route_multi(o);
        if (sweep->parsed()) return cmd_sweep(o, sweep_algo->count() > 0);
        if (bench->parsed()) return cmd_bench(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const TopologyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
