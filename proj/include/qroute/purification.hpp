#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qroute {

// Fidelity after purifying two Bell pairs with fidelities x1 and x2 (bit-flip
// recurrence). Both inputs must lie in [0.5, 1); throws std::domain_error.
double purify_pair(double x1, double x2);

// Probability that purifying pairs of fidelity x1 and x2 succeeds.
double success_probability(double x1, double x2);

// Pumping: every round combines one fresh pair of fidelity f0 with the
// current pair. rounds == 0 returns f0.
double pumped_fidelity(double f0, int rounds);

// Product of per-round success probabilities; round n pumps a fresh pair into
// the (n-1)-round pair. Returns 1 for zero rounds.
double cumulative_success_probability(double f0, int rounds);

struct CostTableEntry {
    int round = 0;
    double fidelity = 0.0;
    double improvement = 0.0;
};

/// Round -> fidelity/improvement lookup for one channel. A channel with
/// capacity c can afford at most c - 1 pumping rounds.
class PurificationCostTable {
public:
    PurificationCostTable(double f0, int capacity);

    std::span<const CostTableEntry> entries() const { return entries_; }
    int max_round() const { return static_cast<int>(entries_.size()) - 1; }
    double fidelity(int round) const { return entries_[static_cast<std::size_t>(round)].fidelity; }
    double improvement(int round) const {
        return entries_[static_cast<std::size_t>(round)].improvement;
    }
    double min_fidelity() const { return entries_.front().fidelity; }
    double max_fidelity() const { return entries_.back().fidelity; }

    /// Fewest rounds whose fidelity reaches `target`, if any.
    std::optional<int> min_rounds_reaching(double target) const;

private:
    std::vector<CostTableEntry> entries_;
};

PurificationCostTable build_cost_table(double f0, int capacity);

/// One hop of a path as seen by the purification planner.
struct PathEdge {
    double initial_fidelity = 0.5;
    int capacity = 1;
};

/// Rounds per hop, indexed by position along the path.
struct PurificationDecision {
    std::vector<int> rounds;

    int total_rounds() const;
    friend bool operator==(const PurificationDecision&, const PurificationDecision&) = default;
};

double end_to_end_fidelity(std::span<const PathEdge> path, std::span<const int> rounds);

// Repeatedly pumps the hop whose next round raises its own fidelity the most
// (lowest index on ties) until the product reaches `threshold`. nullopt when
// every hop is exhausted first.
std::optional<PurificationDecision> greedy_purification_decision(std::span<const PathEdge> path,
                                                                 double threshold);

inline constexpr double kBruteForceGuard = 1e6;

// Exhaustive minimum-total-rounds decision. Ties go to the higher end-to-end
// fidelity, then to the first vector in odometer order. Throws
// std::invalid_argument when the product of capacities exceeds the guard.
std::optional<PurificationDecision> brute_force_purification_decision(
    std::span<const PathEdge> path, double threshold);

// d/dx of x^2 / (x^2 + (1-x)^2).
double symmetric_purification_slope(double x);

// Fidelity in [0.5, 1) where one symmetric round has unit slope (~0.743).
double critical_fidelity();

}  // namespace qroute
