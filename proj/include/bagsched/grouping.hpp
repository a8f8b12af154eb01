#pragma once

#include <functional>
#include <vector>

#include "bagsched/rational.hpp"

namespace bagsched {

struct ScenarioEntry {
    int kappa = 0;  // scenario index (1-based machine count)
    Rat q;          // its probability mass
    Rat Q;          // prefix mass including this entry
    Rat Qp;         // prefix mass excluding this entry (Q - q)
};

struct ScenarioList {
    std::vector<ScenarioEntry> entries;  // ascending kappa, all q > 0
    Rat total;                           // mass of the listed scenarios

    const ScenarioEntry& at(int kappa) const;
    bool contains(int kappa) const;
};

// Scenarios with positive probability in [lo, hi] with their prefix masses.
// Throws std::domain_error when no scenario in the range has positive mass.
ScenarioList build_scenario_list(const std::vector<Rat>& q, int lo, int hi);

enum class ReprAugment { add_min_index, add_max_index };

// kappa joins K' iff some integer multiple of `step` falls in [Q'_k, Q_k);
// afterwards the minimum (makespan/lp) or maximum (santa) index of K is added
// if missing, so every scenario has a representative on the required side.
std::vector<int> select_representatives(const ScenarioList& list, const Rat& step,
                                        ReprAugment augment);

enum class CopyRule { copy_left, copy_right };

// Representative serving scenario kappa: the largest representative <= kappa
// (copy_left) or the smallest >= kappa (copy_right). Throws std::domain_error
// if no representative lies on the required side.
int representative_for(const std::vector<int>& reps, int kappa, CopyRule rule);

enum class HistogramShape { nonincreasing, unrestricted };

// Every assignment of grid values to the representatives that matches the
// shape, in descending lexicographic order. The optional pruner sees the
// partial assignment (values for reps[0..len)) and returns false to abandon
// that subtree. Returns the number of emitted histograms.
long long enumerate_bound_histograms(
    const std::vector<int>& reps, const std::vector<Rat>& value_grid, HistogramShape shape,
    const std::function<void(const std::vector<Rat>&)>& visit,
    const std::function<bool(const std::vector<Rat>&, std::size_t)>& keep_partial = nullptr);

}  // namespace bagsched
