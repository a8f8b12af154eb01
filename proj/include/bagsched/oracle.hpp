#pragma once

#include <stdexcept>
#include <vector>

#include "bagsched/model.hpp"

namespace bagsched {

// Raised whenever an enumeration or search exceeds its configured budget.
// Never stands in for "infeasible": callers can always tell the two apart.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct OracleBudget {
    int max_jobs = 10;
    int max_bags = 5;
    long long node_limit = 100000000;
};

struct FixedBagsResult {
    Rat key;                      // exact for makespan/santa/integer-p lp
    Real key_real;                // used instead of key for non-integer p
    std::vector<int> machine_of;  // bag (0-based) -> machine 1..k
};

// Optimal assignment of the given bags to k identical machines, by exhaustive
// enumeration of bag->machine maps up to machine relabeling (bag 1 on machine
// 1, each later bag opens at most one new machine). Ties keep the first
// assignment in that canonical order. Throws BudgetError past node_limit.
FixedBagsResult exact_fixed_bags(const std::vector<Rat>& bag_sizes, int k, const Objective& obj,
                                 long long node_limit = 100000000);

struct OracleResult {
    TwoStageSolution solution;
    Cost cost;
};

// Exact two-stage optimum: enumerates all partitions of the jobs into at most
// m unordered bags (restricted-growth strings), solving every supported
// scenario exactly for each partition. Ties are broken toward the
// lexicographically smallest restricted-growth string.
OracleResult exact_solve(const Instance& inst, const Objective& obj, const OracleBudget& budget);

}  // namespace bagsched
