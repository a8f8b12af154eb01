#include "bagsched/grouping.hpp"

#include <algorithm>
#include <stdexcept>

namespace bagsched {

const ScenarioEntry& ScenarioList::at(int kappa) const {
    for (const auto& e : entries)
        if (e.kappa == kappa) return e;
    throw std::domain_error("scenario not in list");
}

bool ScenarioList::contains(int kappa) const {
    for (const auto& e : entries)
        if (e.kappa == kappa) return true;
    return false;
}

ScenarioList build_scenario_list(const std::vector<Rat>& q, int lo, int hi) {
    if (lo < 1 || hi > static_cast<int>(q.size()) || lo > hi)
        throw std::invalid_argument("bad scenario range");
    ScenarioList list;
    Rat prefix(0);
    for (int k = lo; k <= hi; ++k) {
        if (q[k - 1] <= 0) continue;
        ScenarioEntry e;
        e.kappa = k;
        e.q = q[k - 1];
        e.Qp = prefix;
        prefix += e.q;
        e.Q = prefix;
        list.entries.push_back(std::move(e));
    }
    if (list.entries.empty()) throw std::domain_error("no supported scenario in range");
    list.total = prefix;
    return list;
}

std::vector<int> select_representatives(const ScenarioList& list, const Rat& step,
                                        ReprAugment augment) {
    if (step <= 0) throw std::invalid_argument("step must be positive");
    std::vector<int> reps;
    for (const auto& e : list.entries) {
        // multiple of step in [Qp, Q)  <=>  ceil(Qp/step)*step < Q
        Rat ell = Rat(rat_ceil(e.Qp / step));
        if (ell * step < e.Q) reps.push_back(e.kappa);
    }
    int want = augment == ReprAugment::add_min_index ? list.entries.front().kappa
                                                     : list.entries.back().kappa;
    if (std::find(reps.begin(), reps.end(), want) == reps.end()) {
        reps.push_back(want);
        std::sort(reps.begin(), reps.end());
    }
    return reps;
}

int representative_for(const std::vector<int>& reps, int kappa, CopyRule rule) {
    if (rule == CopyRule::copy_left) {
        int best = -1;
        for (int r : reps)
            if (r <= kappa) best = std::max(best, r);
        if (best < 0) throw std::domain_error("no representative at or below kappa");
        return best;
    }
    int best = -1;
    for (int r : reps)
        if (r >= kappa && (best < 0 || r < best)) best = r;
    if (best < 0) throw std::domain_error("no representative at or above kappa");
    return best;
}

namespace {

long long enumerate_rec(const std::vector<int>& reps, const std::vector<Rat>& grid,
                        HistogramShape shape, std::vector<Rat>& partial, std::size_t level,
                        std::size_t prev_choice,
                        const std::function<void(const std::vector<Rat>&)>& visit,
                        const std::function<bool(const std::vector<Rat>&, std::size_t)>& keep) {
    if (level == reps.size()) {
        visit(partial);
        return 1;
    }
    long long count = 0;
    std::size_t start = shape == HistogramShape::nonincreasing ? prev_choice : 0;
    for (std::size_t i = start; i < grid.size(); ++i) {
        partial.push_back(grid[i]);
        if (!keep || keep(partial, level + 1))
            count += enumerate_rec(reps, grid, shape, partial, level + 1, i, visit, keep);
        partial.pop_back();
    }
    return count;
}

}  // namespace

long long enumerate_bound_histograms(
    const std::vector<int>& reps, const std::vector<Rat>& value_grid, HistogramShape shape,
    const std::function<void(const std::vector<Rat>&)>& visit,
    const std::function<bool(const std::vector<Rat>&, std::size_t)>& keep_partial) {
    if (value_grid.empty()) return 0;
    std::vector<Rat> grid = value_grid;
    std::sort(grid.begin(), grid.end(), std::greater<Rat>());  // descending
    std::vector<Rat> partial;
    partial.reserve(reps.size());
    return enumerate_rec(reps, grid, shape, partial, 0, 0, visit, keep_partial);
}

}  // namespace bagsched
