#include "bagsched/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bagsched {

ScenarioAssignment list_schedule(const std::vector<Rat>& bag_sizes, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    ScenarioAssignment sa;
    sa.k = k;
    sa.machine_of.resize(bag_sizes.size());
    std::vector<Rat> load(k, Rat(0));
    for (std::size_t i = 0; i < bag_sizes.size(); ++i) {
        int best = 0;
        for (int mch = 1; mch < k; ++mch)
            if (load[mch] < load[best]) best = mch;
        load[best] += bag_sizes[i];
        sa.machine_of[i] = best + 1;
    }
    Rat total(0), mx(0), makespan(0);
    for (const auto& s : bag_sizes) {
        total += s;
        mx = std::max(mx, s);
    }
    for (const auto& l : load) makespan = std::max(makespan, l);
    if (total > 0 && !(makespan < total / k + mx))
        throw std::logic_error("list_schedule violated the Graham bound");
    return sa;
}

BagAssignment lpt_bags(const Instance& inst) {
    std::vector<int> order(inst.n());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return inst.jobs[a] > inst.jobs[b]; });
    BagAssignment bags;
    bags.bag_of.resize(inst.n());
    std::vector<Rat> load(inst.m, Rat(0));
    for (int j : order) {
        int best = 0;
        for (int b = 1; b < inst.m; ++b)
            if (load[b] < load[best]) best = b;
        load[best] += inst.jobs[j];
        bags.bag_of[j] = best + 1;
    }
    return bags;
}

IdenticalBest identical_machines_best(const std::vector<Rat>& bag_sizes, int k,
                                      const Objective& obj, const OracleBudget& budget) {
    IdenticalBest out;
    try {
        FixedBagsResult fb = exact_fixed_bags(bag_sizes, k, obj, budget.node_limit);
        out.key = fb.key;
        out.key_real = fb.key_real;
        out.assignment.k = k;
        out.assignment.machine_of = std::move(fb.machine_of);
        return out;
    } catch (const BudgetError&) {
        out.degraded = true;
        out.assignment = list_schedule(bag_sizes, k);
        std::vector<Rat> loads(k, Rat(0));
        for (std::size_t i = 0; i < bag_sizes.size(); ++i)
            loads[out.assignment.machine_of[i] - 1] += bag_sizes[i];
        if (obj.kind == ObjectiveKind::lpnorm && !obj.integer_p())
            out.key_real = scenario_key_real(loads, obj);
        else
            out.key = scenario_key(loads, obj);
        return out;
    }
}

}  // namespace bagsched
