#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bagsched/rational.hpp"

namespace bagsched {

enum class ObjectiveKind { makespan, santa, lpnorm };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::makespan;
    Rat p = Rat(2);  // norm exponent, only meaningful for lpnorm; must be > 1

    bool minimizing() const { return kind != ObjectiveKind::santa; }
    bool integer_p() const { return is_integer(p); }
    void validate() const;

    static Objective makespan() { return {ObjectiveKind::makespan, Rat(2)}; }
    static Objective santa() { return {ObjectiveKind::santa, Rat(2)}; }
    static Objective lpnorm(const Rat& p) { return {ObjectiveKind::lpnorm, p}; }
};

std::string objective_name(const Objective& o);

// Jobs, bag count and the scenario distribution. Bag/machine/scenario indices
// are 1-based throughout; scenario k means "k machines materialize".
struct Instance {
    std::string name;
    std::vector<Rat> jobs;  // p_j > 0
    int m = 2;              // number of bags, >= 2
    std::vector<Rat> q;     // size m, q_k >= 0, sums to 1 exactly

    int n() const { return static_cast<int>(jobs.size()); }
    Rat p_max() const;
    Rat total_size() const;
    std::vector<int> support() const;  // scenarios with q_k > 0, ascending
    int max_support() const;
    void validate() const;  // throws std::invalid_argument
};

struct BagAssignment {
    std::vector<int> bag_of;  // job j (0-based position) -> bag in 1..m

    std::vector<Rat> bag_sizes(const Instance& inst) const;  // index 0 = bag 1
};

struct ScenarioAssignment {
    int k = 1;                    // machine count
    std::vector<int> machine_of;  // bag i (0-based position) -> machine in 1..k
};

struct TwoStageSolution {
    BagAssignment bags;
    std::map<int, ScenarioAssignment> per_scenario;  // exactly support(q)

    void validate(const Instance& inst) const;
};

// Expected objective value. Makespan/santa costs are exact rationals. An lp
// cost is sum_k q_k * key_k^(1/p) with key_k = sum_i W_i^p; for integer p the
// keys are exact and only the root is evaluated in floating point (50-digit),
// with structural tie detection on the (q, key) lists.
struct Cost {
    ObjectiveKind kind = ObjectiveKind::makespan;
    Rat p = Rat(2);
    Rat exact;                                  // makespan/santa
    std::vector<std::pair<Rat, Rat>> lp_parts;  // (q_k, key_k), ascending k; integer p
    std::vector<std::pair<Rat, Real>> lp_parts_real;  // non-integer p

    bool is_exact() const { return kind != ObjectiveKind::lpnorm; }
    Real approx() const;
    static int compare(const Cost& a, const Cost& b);  // -1, 0, 1 by value
    // true if a is strictly better than b under the objective direction
    static bool better(const Cost& a, const Cost& b, const Objective& obj);
    std::string display() const;
};

// Loads of the k machines in scenario k (exact, sums to total job size).
// Throws std::domain_error if k is outside support(q).
std::vector<Rat> machine_loads(const Instance& inst, const TwoStageSolution& sol, int k);

// Comparison key of a load vector: max (makespan), min (santa), sum of p-th
// powers (lpnorm with integer p). Keys order solutions within one scenario.
Rat scenario_key(const std::vector<Rat>& loads, const Objective& obj);
Real scenario_key_real(const std::vector<Rat>& loads, const Objective& obj);

// The objective value of one scenario; equals the key except for lpnorm,
// where it is key^(1/p) (irrational in general, returned as 50-digit float).
Real scenario_cost(const std::vector<Rat>& loads, const Objective& obj);

// true if key a is strictly better than key b for this objective
bool key_better(const Rat& a, const Rat& b, const Objective& obj);

Cost expected_cost(const Instance& inst, const TwoStageSolution& sol, const Objective& obj);

}  // namespace bagsched
