#include "bagsched/oracle.hpp"

#include <algorithm>
#include <map>

namespace bagsched {

namespace {

// Common denominator scaling: exact integer sizes speed the inner loops up
// considerably compared to rational arithmetic per node.
struct Scaled {
    Int den;                 // common denominator D
    std::vector<Int> sizes;  // p_j * D
};

Scaled scale_sizes(const std::vector<Rat>& xs) {
    Int d(1);
    for (const auto& x : xs) d = lcm(d, denominator(x));
    Scaled s;
    s.den = d;
    s.sizes.reserve(xs.size());
    for (const auto& x : xs) s.sizes.push_back(numerator(x) * (d / denominator(x)));
    return s;
}

struct NodeCounter {
    long long nodes = 0;
    long long limit;
    explicit NodeCounter(long long lim) : limit(lim) {}
    void tick() {
        if (++nodes > limit) throw BudgetError("node limit exceeded");
    }
};

// Key of a load vector in scaled integer space. Lower is better for
// minimization; the caller flips the comparison for santa.
struct LeafKey {
    Int key;
    Real key_real;
    bool real = false;

    bool better_than(const LeafKey& o, bool minimizing) const {
        if (real) return minimizing ? key_real < o.key_real : key_real > o.key_real;
        return minimizing ? key < o.key : key > o.key;
    }
};

LeafKey eval_loads(const std::vector<Int>& blocks, int used, int k, const Objective& obj,
                   const Int& den) {
    LeafKey out;
    switch (obj.kind) {
        case ObjectiveKind::makespan: {
            Int mx(0);
            for (int i = 0; i < used; ++i) mx = std::max(mx, blocks[i]);
            out.key = mx;
            return out;
        }
        case ObjectiveKind::santa: {
            if (used < k) {
                out.key = 0;  // some machine stays empty
                return out;
            }
            Int mn = blocks[0];
            for (int i = 1; i < used; ++i) mn = std::min(mn, blocks[i]);
            out.key = mn;
            return out;
        }
        case ObjectiveKind::lpnorm: {
            if (obj.integer_p()) {
                unsigned long pe = static_cast<unsigned long>(numerator(obj.p));
                Int s(0);
                for (int i = 0; i < used; ++i) s += pow_int(blocks[i], pe);
                out.key = s;
                return out;
            }
            out.real = true;
            Real pe = to_real(obj.p), dr = Real(den), s(0);
            for (int i = 0; i < used; ++i)
                if (blocks[i] > 0) s += pow(Real(blocks[i]) / dr, pe);
            out.key_real = s;
            return out;
        }
    }
    throw std::logic_error("bad objective");
}

// Enumerates canonical partitions of items into at most kmax blocks; calls
// visit(used_blocks) at every leaf with `blocks[0..used)` holding block sums.
template <class F>
void partition_rec(const std::vector<Int>& sizes, std::size_t idx, std::vector<Int>& blocks,
                   int used, int kmax, NodeCounter& nc, std::vector<int>& assign, F&& visit) {
    if (idx == sizes.size()) {
        visit(used);
        return;
    }
    int open = std::min(used + 1, kmax);
    for (int b = 0; b < open; ++b) {
        nc.tick();
        blocks[b] += sizes[idx];
        assign[idx] = b;
        partition_rec(sizes, idx + 1, blocks, std::max(used, b + 1), kmax, nc, assign, visit);
        blocks[b] -= sizes[idx];
    }
}

// Rescale a scaled integer key back to the caller's units.
Rat unscale_key(const Int& key, const Int& den, const Objective& obj) {
    if (obj.kind == ObjectiveKind::lpnorm)
        return Rat(key, pow_int(den, static_cast<unsigned long>(numerator(obj.p))));
    return Rat(key, den);
}

FixedBagsResult fixed_bags_scaled(const std::vector<Int>& sizes, const Int& den, int k,
                                  const Objective& obj, NodeCounter& nc) {
    // Zero-size bags cannot affect any load; pin them to machine 1.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (sizes[i] != 0) live.push_back(i);

    std::vector<Int> live_sizes;
    for (auto i : live) live_sizes.push_back(sizes[i]);

    std::vector<Int> blocks(k, Int(0));
    std::vector<int> assign(live.size(), 0);
    bool have_best = false;
    LeafKey best;
    std::vector<int> best_assign;

    auto visit = [&](int used) {
        LeafKey cur = eval_loads(blocks, used, k, obj, den);
        if (!have_best || cur.better_than(best, obj.minimizing())) {
            have_best = true;
            best = std::move(cur);
            best_assign = assign;
        }
    };
    if (live.empty()) {
        visit(0);
    } else {
        partition_rec(live_sizes, 0, blocks, 0, k, nc, assign, visit);
    }

    FixedBagsResult out;
    out.machine_of.assign(sizes.size(), 1);
    for (std::size_t t = 0; t < live.size(); ++t) out.machine_of[live[t]] = best_assign[t] + 1;
    if (best.real)
        out.key_real = best.key_real;
    else
        out.key = unscale_key(best.key, den, obj);
    return out;
}

}  // namespace

FixedBagsResult exact_fixed_bags(const std::vector<Rat>& bag_sizes, int k, const Objective& obj,
                                 long long node_limit) {
    if (bag_sizes.empty()) throw std::invalid_argument("no bags");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    obj.validate();
    Scaled sc = scale_sizes(bag_sizes);
    NodeCounter nc(node_limit);
    return fixed_bags_scaled(sc.sizes, sc.den, k, obj, nc);
}

OracleResult exact_solve(const Instance& inst, const Objective& obj, const OracleBudget& budget) {
    inst.validate();
    obj.validate();
    if (inst.n() > budget.max_jobs)
        throw BudgetError("oracle budget: n > max_jobs");
    if (inst.m > budget.max_bags)
        throw BudgetError("oracle budget: m > max_bags");

    Scaled sc = scale_sizes(inst.jobs);
    NodeCounter nc(budget.node_limit);
    auto support = inst.support();
    bool minimize = obj.minimizing();
    bool lp_real = obj.kind == ObjectiveKind::lpnorm && !obj.integer_p();
    bool lp_int = obj.kind == ObjectiveKind::lpnorm && obj.integer_p();
    Real invp = lp_int || lp_real ? Real(1) / to_real(obj.p) : Real(0);
    Real dr = Real(sc.den);

    // Scenario optimum for a fixed bag-size multiset, memoized across
    // partitions (bag identity is irrelevant to the scenario cost).
    std::map<std::pair<std::vector<Int>, int>, LeafKey> memo;
    auto scenario_best = [&](const std::vector<Int>& sorted_sizes, int k) -> const LeafKey& {
        auto key = std::make_pair(sorted_sizes, k);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        std::vector<Int> blocks(k, Int(0));
        std::vector<int> assign(sorted_sizes.size(), 0);
        bool have = false;
        LeafKey best;
        auto visit = [&](int used) {
            LeafKey cur = eval_loads(blocks, used, k, obj, sc.den);
            if (!have || cur.better_than(best, minimize)) {
                have = true;
                best = std::move(cur);
            }
        };
        if (sorted_sizes.empty())
            visit(0);
        else
            partition_rec(sorted_sizes, 0, blocks, 0, k, nc, assign, visit);
        return memo.emplace(std::move(key), std::move(best)).first->second;
    };

    std::vector<Int> blocks(inst.m, Int(0));
    std::vector<int> assign(inst.n(), 0);
    bool have_best = false;
    bool best_is_real = lp_real;
    Rat best_val;       // expected value in scaled units (makespan/santa)
    Real best_val_real; // lp expected value (sum of q * key^(1/p))
    std::vector<int> best_rgs;

    auto leaf = [&](int used) {
        std::vector<Int> sizes(blocks.begin(), blocks.begin() + used);
        std::sort(sizes.begin(), sizes.end(), std::greater<Int>());
        if (lp_int || lp_real) {
            Real total(0);
            for (int k : support) {
                const LeafKey& lk = scenario_best(sizes, k);
                Real keyr = lk.real ? lk.key_real : Real(lk.key) / pow(dr, to_real(obj.p));
                total += to_real(inst.q[k - 1]) * pow(keyr, invp);
            }
            Real tol = std::max(Real(1), Real(abs(total))) * Real("1e-40");
            if (!have_best || (minimize ? total < best_val_real - tol : total > best_val_real + tol)) {
                have_best = true;
                best_val_real = total;
                best_rgs = assign;
            }
            return;
        }
        Rat total(0);
        for (int k : support) {
            total += inst.q[k - 1] * Rat(scenario_best(sizes, k).key);
            if (have_best && minimize && total >= best_val) return;  // partial sums only grow
        }
        if (!have_best || (minimize ? total < best_val : total > best_val)) {
            have_best = true;
            best_val = total;
            best_rgs = assign;
        }
    };
    partition_rec(sc.sizes, 0, blocks, 0, inst.m, nc, assign, leaf);

    // Rebuild the winning solution: block b -> bag b+1, then one exact
    // scenario assignment per supported k.
    OracleResult res;
    res.solution.bags.bag_of.resize(inst.n());
    int used = 0;
    for (int j = 0; j < inst.n(); ++j) {
        res.solution.bags.bag_of[j] = best_rgs[j] + 1;
        used = std::max(used, best_rgs[j] + 1);
    }
    std::vector<Int> bag_sizes_scaled(inst.m, Int(0));
    for (int j = 0; j < inst.n(); ++j) bag_sizes_scaled[best_rgs[j]] += sc.sizes[j];
    for (int k : support) {
        FixedBagsResult fb = fixed_bags_scaled(bag_sizes_scaled, sc.den, k, obj, nc);
        ScenarioAssignment sa;
        sa.k = k;
        sa.machine_of = fb.machine_of;
        res.solution.per_scenario[k] = std::move(sa);
    }
    res.cost = expected_cost(inst, res.solution, obj);
    (void)best_is_real;
    return res;
}

}  // namespace bagsched
