#include "qroute/purification.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qroute {
namespace {

void check_fidelity(double x, const char* what) {
    if (!(x >= 0.5 && x < 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in [0.5, 1), got " +
                                std::to_string(x));
    }
}

// Unchecked recurrence; pumping can saturate to exactly 1.0 in double
// precision, which the public entry point rejects.
double combine(double x1, double x2) {
    const double agree = x1 * x2;
    return agree / (agree + (1.0 - x1) * (1.0 - x2));
}

double combine_probability(double x1, double x2) {
    return x1 * x2 + (1.0 - x1) * (1.0 - x2);
}

}  // namespace

double purify_pair(double x1, double x2) {
    check_fidelity(x1, "x1");
    check_fidelity(x2, "x2");
    return combine(x1, x2);
}

double success_probability(double x1, double x2) {
    check_fidelity(x1, "x1");
    check_fidelity(x2, "x2");
    return combine_probability(x1, x2);
}

double pumped_fidelity(double f0, int rounds) {
    check_fidelity(f0, "f0");
    if (rounds < 0) throw std::domain_error("rounds must be non-negative");
    double current = f0;
    for (int n = 0; n < rounds; ++n) current = combine(f0, current);
    return current;
}

double cumulative_success_probability(double f0, int rounds) {
    check_fidelity(f0, "f0");
    if (rounds < 0) throw std::domain_error("rounds must be non-negative");
    double probability = 1.0;
    double current = f0;
    for (int n = 1; n <= rounds; ++n) {
        probability *= combine_probability(f0, current);
        current = combine(f0, current);
    }
    return probability;
}

PurificationCostTable::PurificationCostTable(double f0, int capacity) {
    check_fidelity(f0, "f0");
    if (capacity < 1) throw std::invalid_argument("capacity must be at least 1");
    entries_.reserve(static_cast<std::size_t>(capacity));
    entries_.push_back({0, f0, 0.0});
    double current = f0;
    for (int round = 1; round < capacity; ++round) {
        const double next = combine(f0, current);
        entries_.push_back({round, next, next - current});
        current = next;
    }
}

std::optional<int> PurificationCostTable::min_rounds_reaching(double target) const {
    for (const auto& entry : entries_) {
        if (entry.fidelity >= target) return entry.round;
    }
    return std::nullopt;
}

PurificationCostTable build_cost_table(double f0, int capacity) {
    return PurificationCostTable(f0, capacity);
}

int PurificationDecision::total_rounds() const {
    int total = 0;
    for (int r : rounds) total += r;
    return total;
}

double end_to_end_fidelity(std::span<const PathEdge> path, std::span<const int> rounds) {
    if (path.size() != rounds.size()) {
        throw std::invalid_argument("decision does not match path length");
    }
    double product = 1.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        product *= pumped_fidelity(path[i].initial_fidelity, rounds[i]);
    }
    return product;
}

std::optional<PurificationDecision> greedy_purification_decision(std::span<const PathEdge> path,
                                                                 double threshold) {
    if (path.empty()) throw std::invalid_argument("path must have at least one edge");
    // Walks each hop's cost table lazily; only the next row is ever needed.
    std::vector<double> current, next;
    current.reserve(path.size());
    next.reserve(path.size());
    for (const auto& hop : path) {
        check_fidelity(hop.initial_fidelity, "f0");
        if (hop.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
        current.push_back(hop.initial_fidelity);
        next.push_back(combine(hop.initial_fidelity, hop.initial_fidelity));
    }

    PurificationDecision decision{std::vector<int>(path.size(), 0)};
    const auto product = [&] {
        double p = 1.0;
        for (double f : current) p *= f;
        return p;
    };
    while (product() < threshold) {
        std::optional<std::size_t> best;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (decision.rounds[i] + 1 > path[i].capacity - 1) continue;
            const double gain = next[i] - current[i];
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (!best) return std::nullopt;
        const std::size_t i = *best;
        ++decision.rounds[i];
        current[i] = next[i];
        next[i] = combine(path[i].initial_fidelity, current[i]);
    }
    return decision;
}

std::optional<PurificationDecision> brute_force_purification_decision(
    std::span<const PathEdge> path, double threshold) {
    if (path.empty()) throw std::invalid_argument("path must have at least one edge");
    double combinations = 1.0;
    for (const auto& hop : path) {
        if (hop.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
        combinations *= hop.capacity;
    }
    if (combinations > kBruteForceGuard) {
        throw std::invalid_argument("brute-force search space exceeds guard");
    }

    std::optional<PurificationDecision> best;
    double best_fidelity = 0.0;
    std::vector<int> rounds(path.size(), 0);
    while (true) {
        const double fidelity = end_to_end_fidelity(path, rounds);
        if (fidelity >= threshold) {
            int total = 0;
            for (int r : rounds) total += r;
            const bool better = !best || total < best->total_rounds() ||
                                (total == best->total_rounds() && fidelity > best_fidelity);
            if (better) {
                best = PurificationDecision{rounds};
                best_fidelity = fidelity;
            }
        }
        std::size_t i = 0;
        for (; i < path.size(); ++i) {
            if (++rounds[i] < path[i].capacity) break;
            rounds[i] = 0;
        }
        if (i == path.size()) break;
    }
    return best;
}

double symmetric_purification_slope(double x) {
    const double numerator = -2.0 * x * x + 2.0 * x;
    const double denominator = 4.0 * std::pow(x, 4) - 8.0 * std::pow(x, 3) + 8.0 * x * x -
                               4.0 * x + 1.0;
    return numerator / denominator;
}

double critical_fidelity() {
    // Slope is 2 at x = 0.5 and falls to 0 at x = 1.
    double lo = 0.5;
    double hi = 1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (symmetric_purification_slope(mid) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace qroute
