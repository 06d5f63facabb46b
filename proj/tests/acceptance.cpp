// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset; with no arguments every criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qroute/experiments.hpp"
#include "qroute/purification.hpp"
#include "qroute/routing.hpp"
#include "support.hpp"

using namespace qroute;

namespace {

const std::filesystem::path kBackbone = std::filesystem::path(QROUTE_DATA_DIR) / "us_backbone.txt";

// Accepted-below-threshold connections seen by any router across all runs.
long long g_router_violations = 0;
long long g_router_runs = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

ExperimentConfig backbone_config() {
    ExperimentConfig c;
    c.topology.mode = TopologyConfig::Mode::file;
    c.topology.file = kBackbone;
    c.demand = 50;
    return c;
}

std::vector<MetricsRow> sweep(const ExperimentConfig& config) {
    auto rows = run_sweep(config);
    for (const auto& r : rows) {
        if (r.algorithm != Algorithm::baseline) {
            g_router_violations += r.accepted_below_threshold;
            g_router_runs += static_cast<long long>(r.trials);
        }
    }
    return rows;
}

const MetricsRow& row_for(const std::vector<MetricsRow>& rows, Algorithm a,
                          const std::function<bool(const SweepPoint&)>& at) {
    for (const auto& r : rows) {
        if (r.algorithm == a && at(r.point)) return r;
    }
    throw std::runtime_error("missing sweep row");
}

// Standard error of the per-trial difference a - b.
double paired_se(const MetricsRow& a, const MetricsRow& b) {
    const std::size_t n = a.throughputs.size();
    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a.throughputs[i] - b.throughputs[i];
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

Outcome criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const auto table = build_cost_table(0.75, 5);
    const double checks[][2] = {
        {pumped_fidelity(0.8, 2), 0.9846},
        {table.fidelity(1), 0.9},
        {table.fidelity(2), 0.9642},
        {table.fidelity(4), 0.9959},
        {purify_pair(0.95, 0.95) - 0.95, 0.0472},
    };
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, std::abs(c[0] - c[1]));
    const double t = seconds_since(start);
    return {worst <= 1e-4 && t < 1.0, fmt("max |error| %.2e, %.3f s", worst, t)};
}

Outcome criterion_2() {
    const auto start = std::chrono::steady_clock::now();
    const double x = critical_fidelity();
    const double t = seconds_since(start);
    return {x >= 0.742 && x <= 0.744 && t < 1.0, fmt("x* = %.6f, %.3f s", x, t)};
}

Outcome criterion_3() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> len(1, 4), cap(1, 6);
    std::uniform_real_distribution<double> f(0.743, 0.95), th(0.7, 0.97);
    int feasible = 0, agree = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<PathEdge> path;
        std::vector<double> f0;
        std::vector<int> caps;
        for (int k = len(rng); k > 0; --k) {
            path.push_back({f(rng), cap(rng)});
            f0.push_back(path.back().initial_fidelity);
            caps.push_back(path.back().capacity);
        }
        const double threshold = th(rng);
        const auto best = oracle::min_total_rounds(f0, caps, threshold);
        const auto greedy = greedy_purification_decision(path, threshold);
        if (!best) {
            if (!greedy) ++agree;
            continue;
        }
        ++feasible;
        if (greedy && greedy->total_rounds() == *best) ++agree;
    }
    const double t = seconds_since(start);
    return {agree == 1000 && t < 30.0,
            fmt("%d/1000 agree (%d feasible), %.2f s", agree, feasible, t)};
}

Outcome criterion_4() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> size(3, 8);
    std::uniform_real_distribution<double> extra(0.1, 0.6), th(0.6, 0.97);
    int feasible = 0, agree = 0;
    for (int i = 0; i < 1000; ++i) {
        const int n = size(rng);
        const auto small = oracle::random_connected(rng, n, extra(rng), 4, 0.743, 0.99);
        const NetworkGraph g = support::to_network(small);
        const double threshold = th(rng);
        const auto best = oracle::min_routing_cost(small, 0, n - 1, threshold);
        ResidualGraph residual(g);
        const auto out = q_path(g, {node_id(0), node_id(static_cast<std::size_t>(n - 1)), 1, threshold},
                                residual);
        if (!best) {
            if (out.empty()) ++agree;
            continue;
        }
        ++feasible;
        if (!out.empty() && out.front().total_cost == *best) ++agree;
    }
    const double t = seconds_since(start);
    return {agree == 1000 && t < 300.0,
            fmt("%d/1000 agree (%d feasible), %.2f s", agree, feasible, t)};
}

Outcome criterion_5() {
    // Backbone pairs exactly three hops apart, threshold 0.8, capacity 50.
    const NetworkGraph base = load_topology(kBackbone);
    ExperimentConfig config = backbone_config();
    config.thresholds = {0.8};
    config.capacities = {50};
    config.pair_counts = {1};
    config.algorithms = {std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
    long long violating = 0, served = 0, router_bad = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = 5005u ^ static_cast<std::uint64_t>(t);
        TrialSample sample = sample_trial(base, config, {0.8, 50, 1}, seed);
        std::mt19937_64 rng(seed);
        do {
            sample.requests = sample_requests(base.node_count(), 1, config.demand, 0.8, rng);
        } while (min_hops(base, sample.requests[0].source, sample.requests[0].destination) != 3u);
        for (const auto& [algorithm, m] : run_trial(sample, config, seed)) {
            if (algorithm == Algorithm::baseline) {
                violating += m.violating;
                served += m.served;
            } else {
                router_bad += m.accepted_below_threshold;
                ++g_router_runs;
            }
        }
    }
    g_router_violations += router_bad;
    const double rate = violating + served > 0
                            ? static_cast<double>(violating) / static_cast<double>(violating + served)
                            : 0.0;
    return {g_router_violations == 0 && violating > 0,
            fmt("router connections below threshold: %lld over %lld runs; baseline violation "
                "rate on 3-hop pairs %.3f (%lld connections)",
                g_router_violations, g_router_runs, rate, violating)};
}

Outcome criterion_6() {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig config = backbone_config();
    config.thresholds = {0.7, 0.8, 0.9};
    config.capacities = {50};
    config.pair_counts = {1};
    config.trials = 500;
    config.seed = 606;
    config.algorithms = {Algorithm::q_path, Algorithm::q_leap, Algorithm::baseline};
    const auto rows = sweep(config);
    bool ok = true;
    std::string detail;
    for (double th : config.thresholds) {
        const auto at = [th](const SweepPoint& p) { return p.threshold == th; };
        const auto& qp = row_for(rows, Algorithm::q_path, at);
        const auto& ql = row_for(rows, Algorithm::q_leap, at);
        const auto& bl = row_for(rows, Algorithm::baseline, at);
        const double se = paired_se(qp, bl);
        const double z = (qp.throughput_mean - bl.throughput_mean) / se;
        ok = ok && qp.throughput_mean >= ql.throughput_mean &&
             ql.throughput_mean >= bl.throughput_mean && z >= 3.0;
        detail += fmt("%s%.1f: %.2f/%.2f/%.2f (%.1f SE)", detail.empty() ? "" : "; ", th,
                      qp.throughput_mean, ql.throughput_mean, bl.throughput_mean, z);
    }
    const double t = seconds_since(start);
    ok = ok && t < 600.0;
    return {ok, "Q-PATH/Q-LEAP/baseline at " + detail + fmt(", %.1f s", t)};
}

Outcome criterion_7() {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig config = backbone_config();
    config.thresholds = {0.7};
    config.capacities = {2};
    config.pair_counts = {10};
    config.trials = 1000;
    config.seed = 707;
    config.algorithms = {Algorithm::alg3_path, Algorithm::random_alloc};
    const auto any = [](const SweepPoint&) { return true; };
    const auto balanced = sweep(config);
    const auto& alg3 = row_for(balanced, Algorithm::alg3_path, any);
    const auto& random = row_for(balanced, Algorithm::random_alloc, any);
    const double ratio = alg3.throughput_mean / random.throughput_mean;

    config.algorithms = {Algorithm::alg3_path};
    bool weights_ok = true;
    std::string detail;
    for (WeightPair w : {WeightPair{1.0, 0.0}, WeightPair{0.0, 1.0}}) {
        config.weights = w;
        const auto rows = sweep(config);
        const auto& single = row_for(rows, Algorithm::alg3_path, any);
        weights_ok = weights_ok && alg3.throughput_mean >= single.throughput_mean - single.throughput_se;
        detail += fmt("; (%g,%g) %.3f +- %.3f", w.alpha_star, w.beta_star, single.throughput_mean,
                      single.throughput_se);
    }
    const double t = seconds_since(start);
    return {ratio >= 1.15 && weights_ok && t < 900.0,
            fmt("(0.5,0.5) %.3f +- %.3f vs random %.3f, ratio %.3f", alg3.throughput_mean,
                alg3.throughput_se, random.throughput_mean, ratio) +
                detail + fmt(", %.1f s", t)};
}

Outcome criterion_8() {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig config = backbone_config();
    config.thresholds = {0.7};
    config.capacities = {50};
    config.pair_counts = {4, 5, 6, 7, 8, 9, 10};
    config.trials = 200;
    config.seed = 808;
    config.algorithms = {Algorithm::alg3_path, Algorithm::alg3_leap};
    const auto rows = sweep(config);
    bool ok = true;
    std::string detail;
    for (int pairs : config.pair_counts) {
        const auto at = [pairs](const SweepPoint& p) { return p.pair_count == pairs; };
        const double ratio = row_for(rows, Algorithm::alg3_path, at).throughput_mean /
                             row_for(rows, Algorithm::alg3_leap, at).throughput_mean;
        ok = ok && ratio >= 1.03 && ratio <= 1.25;
        detail += fmt("%s%d:%.3f", detail.empty() ? "" : " ", pairs, ratio);
    }
    const double t = seconds_since(start);
    return {ok && t < 900.0, "ALG3-PATH/ALG3-LEAP by pairs " + detail + fmt(", %.1f s", t)};
}

// Adjacent points may move the wrong way by at most one standard error.
bool monotone(const std::vector<MetricsRow>& rows, Algorithm a, bool increasing,
              std::string& worst) {
    std::vector<const MetricsRow*> series;
    for (const auto& r : rows) {
        if (r.algorithm == a) series.push_back(&r);
    }
    bool ok = true;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double step = series[i]->throughput_mean - series[i - 1]->throughput_mean;
        const double wrong = increasing ? -step : step;
        const double slack = std::max(series[i]->throughput_se, series[i - 1]->throughput_se);
        if (wrong > slack) {
            ok = false;
            worst += fmt(" %s@%s", std::string(algorithm_name(a)).c_str(),
                         series[i]->sweep_value.c_str());
        }
    }
    return ok;
}

Outcome criterion_9() {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig by_threshold = backbone_config();
    by_threshold.thresholds = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    by_threshold.capacities = {50};
    by_threshold.pair_counts = {4};
    by_threshold.trials = 200;
    by_threshold.seed = 909;
    const auto rows_t = sweep(by_threshold);

    ExperimentConfig by_capacity = by_threshold;
    by_capacity.thresholds = {0.7};
    by_capacity.capacities = {2, 5, 10, 20, 50};
    const auto rows_c = sweep(by_capacity);

    bool ok = true;
    std::string bad;
    for (Algorithm a : kAllAlgorithms) {
        ok = monotone(rows_t, a, false, bad) && ok;
        ok = monotone(rows_c, a, true, bad) && ok;
    }
    const double t = seconds_since(start);
    return {ok, fmt("threshold sweep 0.5-0.95 and capacity sweep 2-50, %.1f s", t) +
                    (bad.empty() ? std::string() : ", violations:" + bad)};
}

Outcome criterion_10() {
    // Sparse Waxman graphs (mean degree near the backbone's) with the default demand.
    TopologyConfig base;
    base.kappa = 0.8;
    base.gamma = 0.1;
    base.capacity = 10;
    base.rng_seed = 1010;
    const auto rows = time_algorithms(base, {100}, 0.6, 20, 50);
    std::map<Algorithm, double> ms;
    for (const auto& r : rows) ms[r.algorithm] = r.mean_ms;
    const double leap = ms.at(Algorithm::q_leap), path = ms.at(Algorithm::q_path);
    return {leap <= path / 10.0,
            fmt("100 nodes: Q-LEAP %.3f ms, baseline %.3f ms, Q-PATH %.3f ms (ratio %.0fx)", leap,
                ms.at(Algorithm::baseline), path, path / leap)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, Outcome (*)()>> criteria{
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
        {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9},
        {10, criterion_10}, {5, criterion_5},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    // Criterion 5 aggregates over the sweeps, so it runs after them but is
    // reported in numeric order.
    std::map<int, Outcome> results;
    for (const auto& [id, run] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        try {
            results[id] = run();
        } catch (const std::exception& e) {
            results[id] = {false, std::string("exception: ") + e.what()};
        }
        std::fprintf(stderr, "criterion %d done: %s\n", id, results[id].detail.c_str());
    }
    bool all = true;
    for (const auto& [id, r] : results) {
        std::printf("%s criterion %d: %s\n", r.pass ? "PASS" : "FAIL", id, r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
