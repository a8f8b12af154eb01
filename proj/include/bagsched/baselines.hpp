#pragma once

#include "bagsched/model.hpp"
#include "bagsched/oracle.hpp"

namespace bagsched {

// Greedy list scheduling: bags in the given order, each to the currently
// least-loaded machine, ties to the lowest machine index. The Graham bound
// makespan < total/k + max_size holds on every output (checked).
ScenarioAssignment list_schedule(const std::vector<Rat>& bag_sizes, int k);

// LPT-style bag former: jobs in descending size order, each into the bag with
// the currently smallest total, ties to the lowest bag index.
BagAssignment lpt_bags(const Instance& inst);

struct IdenticalBest {
    Rat key;        // exact (makespan/santa/integer-p lp); for non-integer p see key_real
    Real key_real;
    ScenarioAssignment assignment;
    bool degraded = false;  // true when the exact search hit its budget and
                            // list scheduling was used instead
};

// Exact optimum of scheduling the given bags on k identical machines
// (the "existing EPTAS" subroutine realized exactly at desk scale). Falls
// back to list scheduling past the node budget instead of failing.
IdenticalBest identical_machines_best(const std::vector<Rat>& bag_sizes, int k,
                                      const Objective& obj, const OracleBudget& budget);

}  // namespace bagsched
