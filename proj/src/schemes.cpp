#include "bagsched/schemes.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <thread>

#include "bagsched/grouping.hpp"
#include "bagsched/rounding.hpp"

namespace bagsched {

GuessDiagnostics& GuessDiagnostics::operator+=(const GuessDiagnostics& o) {
    guesses += o.guesses;
    guesses_skipped += o.guesses_skipped;
    ip_feasible += o.ip_feasible;
    ip_infeasible += o.ip_infeasible;
    ip_budget += o.ip_budget;
    histograms += o.histograms;
    extractions += o.extractions;
    grid_overflow += o.grid_overflow;
    templates_dropped += o.templates_dropped;
    return *this;
}

long validate_epsilon(const Rat& eps) {
    if (eps <= 0 || numerator(eps) != 1 || denominator(eps) < 5)
        throw std::invalid_argument("epsilon must be 1/E for an integer E >= 5");
    if (denominator(eps) > 1000000) throw std::invalid_argument("epsilon is unreasonably small");
    return static_cast<long>(denominator(eps));
}

namespace {

struct Candidate {
    TwoStageSolution sol;
    Cost cost;
};

struct GuessOutcome {
    std::vector<Candidate> candidates;
    GuessDiagnostics diag;
    std::vector<ShortcutCheck> checks;
};

// Fills per_scenario for the listed scenarios with the exact identical-
// machines optimum on the solution's bags.
void complete_scenarios(const Instance& inst, TwoStageSolution& sol, const std::vector<int>& ks,
                        const Objective& obj, const OracleBudget& budget) {
    if (ks.empty()) return;
    auto sizes = sol.bags.bag_sizes(inst);
    for (int k : ks)
        sol.per_scenario[k] = identical_machines_best(sizes, k, obj, budget).assignment;
}

TwoStageSolution baseline_solution(const Instance& inst, const Objective& obj,
                                   const OracleBudget& budget) {
    TwoStageSolution sol;
    sol.bags = lpt_bags(inst);
    complete_scenarios(inst, sol, inst.support(), obj, budget);
    return sol;
}

// n <= m: every job in its own bag dominates all other partitions.
TwoStageSolution few_jobs_solution(const Instance& inst, const Objective& obj,
                                   const OracleBudget& budget) {
    TwoStageSolution sol;
    sol.bags.bag_of.resize(inst.n());
    for (int j = 0; j < inst.n(); ++j) sol.bags.bag_of[j] = j + 1;
    complete_scenarios(inst, sol, inst.support(), obj, budget);
    return sol;
}

// All multisets of at most bag_limit templates that cover the class counts
// exactly (templates in nondecreasing index order).
void profiles_rec(const std::vector<PricedTemplate>& tau, std::vector<int>& remaining,
                  long remaining_jobs, std::size_t min_idx, int bags_left, long max_tmpl_jobs,
                  std::vector<int>& y, std::vector<std::vector<int>>& out, std::size_t ceiling) {
    if (remaining_jobs == 0) {
        out.push_back(y);
        if (out.size() > ceiling) throw BudgetError("bag-profile ceiling exceeded");
        return;
    }
    if (bags_left == 0 || remaining_jobs > static_cast<long>(bags_left) * max_tmpl_jobs) return;
    for (std::size_t t = min_idx; t < tau.size(); ++t) {
        const auto& counts = tau[t].tmpl.counts;
        bool fits = true;
        for (std::size_t l = 0; l < counts.size(); ++l)
            if (counts[l] > remaining[l]) {
                fits = false;
                break;
            }
        if (!fits) continue;
        for (std::size_t l = 0; l < counts.size(); ++l) remaining[l] -= counts[l];
        ++y[t];
        profiles_rec(tau, remaining, remaining_jobs - tau[t].tmpl.total_jobs, t, bags_left - 1,
                     max_tmpl_jobs, y, out, ceiling);
        --y[t];
        for (std::size_t l = 0; l < counts.size(); ++l) remaining[l] += counts[l];
    }
}

std::vector<std::vector<int>> enumerate_bag_profiles(const std::vector<PricedTemplate>& tau,
                                                     const std::vector<int>& class_counts,
                                                     int bag_limit, std::size_t ceiling) {
    std::vector<std::vector<int>> out;
    if (tau.empty()) return out;
    std::vector<int> remaining = class_counts;
    long total_jobs = 0;
    for (int c : class_counts) total_jobs += c;
    long max_tmpl_jobs = 0;
    for (const auto& pt : tau) max_tmpl_jobs = std::max<long>(max_tmpl_jobs, pt.tmpl.total_jobs);
    std::vector<int> y(tau.size(), 0);
    profiles_rec(tau, remaining, total_jobs, 0, bag_limit, max_tmpl_jobs, y, out, ceiling);
    return out;
}

// Exact partition optima of a small list of allowed sizes over kappa
// machines, memoized on (sorted sizes, kappa).
class PartitionOpt {
  public:
    // minimal achievable maximum machine total (at most kappa machines)
    long long min_max(std::vector<long long> bags, int kappa) {
        return cached(std::move(bags), kappa, Kind::min_max).grid;
    }
    // maximal achievable minimum machine total over exactly kappa machines
    long long max_min(std::vector<long long> bags, int kappa) {
        return cached(std::move(bags), kappa, Kind::max_min).grid;
    }
    // minimal achievable sum of p-th powers of machine totals
    Int min_power(std::vector<long long> bags, int kappa, unsigned long pe) {
        pe_ = pe;
        return cached(std::move(bags), kappa, Kind::min_power).power;
    }

  private:
    enum class Kind { min_max, max_min, min_power };
    struct Value {
        long long grid = 0;
        Int power;
    };

    const Value& cached(std::vector<long long> bags, int kappa, Kind kind) {
        std::sort(bags.begin(), bags.end(), std::greater<long long>());
        auto key = std::make_tuple(std::move(bags), kappa, static_cast<int>(kind));
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Value v = compute(std::get<0>(key), kappa, kind);
        return memo_.emplace(std::move(key), std::move(v)).first->second;
    }

    Value compute(const std::vector<long long>& bags, int kappa, Kind kind) {
        Value best;
        bool have = false;
        std::vector<long long> load(kappa, 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
            if (i == bags.size()) {
                Value cur;
                switch (kind) {
                    case Kind::min_max:
                        cur.grid = *std::max_element(load.begin(), load.begin() + std::max(used, 1));
                        if (used == 0) cur.grid = 0;
                        if (!have || cur.grid < best.grid) best = cur, have = true;
                        return;
                    case Kind::max_min: {
                        if (used < kappa)
                            cur.grid = 0;
                        else
                            cur.grid = *std::min_element(load.begin(), load.begin() + used);
                        if (!have || cur.grid > best.grid) best = cur, have = true;
                        return;
                    }
                    case Kind::min_power: {
                        Int s(0);
                        for (int mch = 0; mch < used; ++mch) s += pow_int(Int(load[mch]), pe_);
                        cur.power = s;
                        if (!have || cur.power < best.power) best = cur, have = true;
                        return;
                    }
                }
            }
            int open = std::min(used + 1, kappa);
            for (int b = 0; b < open; ++b) {
                load[b] += bags[i];
                rec(i + 1, std::max(used, b + 1));
                load[b] -= bags[i];
            }
        };
        rec(0, 0);
        return best;
    }

    unsigned long pe_ = 2;
    std::map<std::tuple<std::vector<long long>, int, int>, Value> memo_;
};

// Configurations sorted by allowed total; every screen used by the schemes
// keeps a contiguous range of this order.
struct ConfigUniverse {
    std::vector<Configuration> all;  // ascending s_grid

    // configs with s <= bound (keeps the empty configuration)
    std::vector<Configuration> at_most(long long bound) const {
        std::vector<Configuration> out;
        for (const auto& c : all) {
            if (c.s_grid > bound) break;
            out.push_back(c);
        }
        return out;
    }
    std::vector<Configuration> at_least(long long bound) const {
        std::vector<Configuration> out;
        for (const auto& c : all)
            if (c.s_grid >= bound) out.push_back(c);
        return out;
    }
    // configs whose p-power alone fits under rhs (others are forced to zero)
    std::vector<Configuration> power_within(const Rat& rhs, unsigned long pe) const {
        std::vector<Configuration> out;
        for (const auto& c : all) {
            if (Rat(pow_int(Int(c.s_grid), pe)) > rhs) break;
            out.push_back(c);
        }
        return out;
    }
};

ConfigUniverse build_universe(const std::vector<PricedTemplate>& tau, int bag_limit,
                              const std::vector<int>& class_counts, const TcipLimits& limits) {
    ConfigUniverse u;
    u.all = enumerate_configurations(tau, bag_limit, std::nullopt, ConfigMode::unscreened,
                                     &class_counts, limits);
    std::stable_sort(u.all.begin(), u.all.end(),
                     [](const Configuration& a, const Configuration& b) {
                         return a.s_grid < b.s_grid;
                     });
    return u;
}

struct Tracker {
    const Instance& inst;
    Objective obj;
    std::optional<Candidate> best;
    bool scheme_candidate = false;

    void offer(Candidate c, bool from_scheme) {
        if (from_scheme) scheme_candidate = true;
        if (!best || Cost::better(c.cost, best->cost, obj)) best = std::move(c);
    }
};

Candidate make_candidate(const Instance& inst, const Objective& obj, TwoStageSolution sol) {
    Cost c = expected_cost(inst, sol, obj);
    return Candidate{std::move(sol), std::move(c)};
}

// Runs `body(i)` for i in [0, count), either inline or in waves of
// `threads` workers; outcomes merge in index order either way.
void run_waves(std::size_t count, int threads,
               const std::function<GuessOutcome(std::size_t)>& body,
               const std::function<void(GuessOutcome&&)>& merge) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) merge(body(i));
        return;
    }
    std::size_t next = 0;
    while (next < count) {
        std::size_t wave = std::min<std::size_t>(threads, count - next);
        std::vector<GuessOutcome> results(wave);
        std::vector<std::thread> pool;
        pool.reserve(wave);
        for (std::size_t w = 0; w < wave; ++w)
            pool.emplace_back([&, w] { results[w] = body(next + w); });
        for (auto& th : pool) th.join();
        for (std::size_t w = 0; w < wave; ++w) merge(std::move(results[w]));
        next += wave;
    }
}

RunReport finish_report(RunReport report, Tracker& tracker, const Instance& inst,
                        const Objective& obj, const SchemeBudgets& budgets, bool few_jobs,
                        std::chrono::steady_clock::time_point start) {
    report.solution = tracker.best->sol;
    report.cost = tracker.best->cost;
    report.baseline_only = !few_jobs && !tracker.scheme_candidate;
    report.method = few_jobs ? "few-jobs" : (report.baseline_only ? "baseline-only" : "eptas");
    if (budgets.run_oracle && inst.n() <= budgets.oracle.max_jobs &&
        inst.m <= budgets.oracle.max_bags) {
        try {
            OracleResult oracle = exact_solve(inst, obj, budgets.oracle);
            report.oracle_cost = oracle.cost;
            double num = static_cast<double>(report.cost.approx());
            double den = static_cast<double>(oracle.cost.approx());
            if (den > 0) report.empirical_ratio = num / den;
        } catch (const BudgetError&) {
        }
    }
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
}

// ---------------------------------------------------------------------------
// makespan

struct MakespanGuessCtx {
    const Instance& inst;
    Rat eps;
    long E;
    const SchemeBudgets& budgets;
    Rat P_orig;
    std::vector<Rat> guesses;
};

GuessOutcome run_makespan_guess(const MakespanGuessCtx& ctx, const Rat& g,
                                const std::optional<Cost>& best_snapshot) {
    GuessOutcome out;
    ++out.diag.guesses;
    const Instance& inst = ctx.inst;
    const Rat& eps = ctx.eps;
    long E = ctx.E;
    Objective obj = Objective::makespan();

    // Scenarios where bags cannot matter: 2*OPT <= eps*P/k.
    long k_cut_l = static_cast<long>(rat_floor(ctx.eps * ctx.P_orig / (2 * g)));
    int k_cut = static_cast<int>(std::min<long>(k_cut_l, inst.m));
    std::vector<int> excluded, remaining;
    for (int k : inst.support()) (k <= k_cut ? excluded : remaining).push_back(k);

    auto shortcut_serve = [&](TwoStageSolution& sol) {
        auto sizes = sol.bags.bag_sizes(inst);
        for (int k : excluded) {
            auto sa = list_schedule(sizes, k);
            std::vector<Rat> loads(k, Rat(0));
            for (int i = 0; i < inst.m; ++i) loads[sa.machine_of[i] - 1] += sizes[i];
            Rat realized = *std::max_element(loads.begin(), loads.end());
            Rat bound = (1 + eps) * ctx.P_orig / k;
            if (!(realized < bound))
                throw std::logic_error("list-scheduling shortcut exceeded its bound");
            out.checks.push_back({k, realized, bound});
            sol.per_scenario[k] = std::move(sa);
        }
    };

    if (remaining.empty()) {
        // Any bag set with all bags <= 2*OPT admits list scheduling everywhere.
        TwoStageSolution sol;
        sol.bags = lpt_bags(inst);
        auto sizes = sol.bags.bag_sizes(inst);
        if (*std::max_element(sizes.begin(), sizes.end()) <= 2 * g) {
            shortcut_serve(sol);
            out.candidates.push_back(make_candidate(inst, obj, std::move(sol)));
        } else {
            ++out.diag.guesses_skipped;
        }
        return out;
    }

    MergeResult merge = merge_small_jobs(inst.jobs, eps * eps * g);
    if (merge.jobs.empty()) {
        TwoStageSolution sol;
        sol.bags.bag_of.assign(inst.n(), 1);
        complete_scenarios(inst, sol, inst.support(), obj, ctx.budgets.subroutine);
        out.candidates.push_back(make_candidate(inst, obj, std::move(sol)));
        return out;
    }

    RoundedInstance rounded;
    rounded.scale = RefScale{g, 1, Rat(2)};
    rounded.eps = eps;
    rounded.merged = merge.jobs;
    rounded.leftover = merge.leftover;
    rounded.classes = round_jobs_geometric(rounded.merged, rounded.scale, eps, RoundDir::up);
    rounded.grid = SizeGrid{rounded.scale, eps, 0, E * E + 2 * E + 2, true, RoundDir::up};
    if (rounded.classes.back().unit > rounded.grid.max_value_units()) {
        ++out.diag.guesses_skipped;  // some job cannot fit any allowed bag
        return out;
    }

    auto class_counts = rounded.class_counts();
    std::vector<Rat> class_units;
    for (const auto& c : rounded.classes) class_units.push_back(c.unit);

    Rat template_cap = std::max(Rat(E + 6, E), rounded.grid.max_value_units());
    std::vector<Template> raw;
    try {
        raw = enumerate_templates(class_units, class_counts, template_cap, 2 * E * E,
                                  ctx.budgets.tcip);
    } catch (const BudgetError&) {
        ++out.diag.ip_budget;
        return out;
    }
    std::size_t dropped = 0;
    auto tau = price_templates(raw, rounded.grid, &dropped);
    out.diag.templates_dropped += dropped;
    if (tau.empty()) {
        ++out.diag.guesses_skipped;
        return out;
    }

    std::vector<std::vector<int>> profiles;
    try {
        profiles = enumerate_bag_profiles(tau, class_counts, inst.m, ctx.budgets.max_bag_profiles);
    } catch (const BudgetError&) {
        ++out.diag.ip_budget;
        return out;
    }
    if (profiles.empty()) {
        ++out.diag.ip_infeasible;
        return out;
    }

    ScenarioList list = build_scenario_list(inst.q, k_cut + 1, inst.m);
    auto reps = select_representatives(list, pow_rat(eps, 3), ReprAugment::add_min_index);
    std::map<int, int> block_of;  // representative scenario -> block index
    for (std::size_t i = 0; i < reps.size(); ++i) block_of[reps[i]] = static_cast<int>(i);
    std::vector<Rat> rep_weight(reps.size(), Rat(0));
    std::vector<ScenarioService> services;
    for (const auto& e : list.entries) {
        int rep = representative_for(reps, e.kappa, CopyRule::copy_left);
        rep_weight[block_of[rep]] += e.q;
        services.push_back({e.kappa, block_of[rep], e.kappa});
    }
    Rat excluded_floor(0);
    for (int k : excluded) excluded_floor += inst.q[k - 1] * ctx.P_orig / k;

    // Dominating histogram vector per bag profile: the exact per-scenario
    // minimum of the allowed-size makespan for that first stage.
    PartitionOpt popt;
    long long grid_top = 3 * E * E * E * E;  // makespans stay below 3*OPT/eps^2
    std::set<std::vector<long long>> vecs;
    for (const auto& y : profiles) {
        std::vector<long long> bags;
        for (std::size_t t = 0; t < tau.size(); ++t)
            for (int c = 0; c < y[t]; ++c) bags.push_back(tau[t].allowed_grid);
        std::vector<long long> vec(reps.size());
        bool ok = true;
        for (std::size_t i = 0; i < reps.size(); ++i) {
            vec[i] = popt.min_max(bags, reps[i]);
            if (vec[i] > grid_top) ok = false;
        }
        if (ok) vecs.insert(std::move(vec));
        if (vecs.size() > ctx.budgets.max_histograms) {
            ++out.diag.ip_budget;
            return out;
        }
    }

    ConfigUniverse universe =
        build_universe(tau, std::min<long>(3 * E * E * E, inst.m), class_counts, ctx.budgets.tcip);
    std::map<long long, std::vector<Configuration>> config_cache;
    Rat eps2g = eps * eps * g;

    std::optional<Cost> local_best = best_snapshot;
    for (const auto& vec : vecs) {
        ++out.diag.histograms;
        // Abandon histograms that cannot beat the best known cost; the
        // correct guess's histogram is never better than what we keep.
        if (local_best) {
            Rat bound = excluded_floor;
            for (std::size_t i = 0; i < reps.size(); ++i)
                bound += rep_weight[i] * Rat(vec[i]) * eps2g;
            if (bound > local_best->exact) continue;
        }
        std::vector<BlockSpec> blocks(reps.size());
        for (std::size_t i = 0; i < reps.size(); ++i) {
            auto it = config_cache.find(vec[i]);
            if (it == config_cache.end())
                it = config_cache.emplace(vec[i], universe.at_most(vec[i])).first;
            blocks[i] = {reps[i], reps[i], &it->second, vec[i], std::nullopt};
        }
        FeasibilityProgram prog = build_program(tau, class_counts, blocks, inst.m, std::nullopt);
        SolveResult res = solve_feasibility(prog, ctx.budgets.ip_node_limit);
        if (res.status == SolveStatus::budget_exceeded) {
            ++out.diag.ip_budget;
            continue;
        }
        if (res.status == SolveStatus::infeasible) {
            ++out.diag.ip_infeasible;
            continue;
        }
        ++out.diag.ip_feasible;

        ExtractParams params;
        params.tau = &tau;
        params.blocks = &blocks;
        params.program = &prog;
        params.point = &res.point;
        params.rounded = &rounded;
        params.m_total = inst.m;
        params.huge_bags = 0;
        params.mode = ConfigMode::at_most;
        params.services = services;
        ExtractResult ex = extract_solution(params);
        ++out.diag.extractions;

        TwoStageSolution lifted = lift_solution(ex.solution, rounded, inst);
        shortcut_serve(lifted);
        Candidate cand = make_candidate(inst, obj, std::move(lifted));
        if (!local_best || Cost::better(cand.cost, *local_best, obj)) local_best = cand.cost;
        out.candidates.push_back(std::move(cand));
    }
    return out;
}

// ---------------------------------------------------------------------------
// santa and lp share the huge-job machinery

// Degenerate universe where all non-huge jobs merged into the leftover: huge
// singletons plus one bag holding everything else, scheduled exactly.
Candidate leftover_only_candidate(const Instance& inst, const Objective& obj,
                                  const std::vector<int>& huge, const SchemeBudgets& budgets) {
    int h = static_cast<int>(huge.size());
    std::vector<int> fixed(inst.n(), 0);
    for (int i = 0; i < h; ++i) fixed[huge[i]] = i + 1;
    TwoStageSolution sol;
    sol.bags.bag_of.assign(inst.n(), 0);
    for (int j = 0; j < inst.n(); ++j) sol.bags.bag_of[j] = fixed[j] != 0 ? fixed[j] : h + 1;
    complete_scenarios(inst, sol, inst.support(), obj, budgets.subroutine);
    return make_candidate(inst, obj, std::move(sol));
}

// Exponents t with lo <= (1+eps)^t <= hi.
std::pair<long, long> power_exponent_range(const Rat& lo, const Rat& hi, const Rat& ope) {
    long t_lo = 0;
    Rat v(1);
    while (v < lo) {
        v *= ope;
        ++t_lo;
    }
    while (v / ope >= lo) {
        v /= ope;
        --t_lo;
    }
    long t_hi = t_lo;
    Rat w = v;
    while (w * ope <= hi) {
        w *= ope;
        ++t_hi;
    }
    return {t_lo, t_hi};
}

}  // namespace

RunReport eptas_makespan(const Instance& inst, const Rat& eps, const SchemeBudgets& budgets) {
    auto start = std::chrono::steady_clock::now();
    inst.validate();
    long E = validate_epsilon(eps);
    Objective obj = Objective::makespan();

    RunReport report;
    report.objective = obj;
    report.epsilon = eps;
    Tracker tracker{inst, obj};
    tracker.offer(make_candidate(inst, obj, baseline_solution(inst, obj, budgets.subroutine)),
                  false);
    report.baseline_cost = tracker.best->cost;

    if (inst.n() <= inst.m) {
        tracker.offer(make_candidate(inst, obj, few_jobs_solution(inst, obj, budgets.subroutine)),
                      false);
        return finish_report(std::move(report), tracker, inst, obj, budgets, true, start);
    }

    MakespanGuessCtx ctx{inst, eps, E, budgets, inst.total_size(),
                         opt_guess_candidates(inst, eps)};
    run_waves(
        ctx.guesses.size(), budgets.threads,
        [&](std::size_t i) {
            std::optional<Cost> snapshot = tracker.best ? std::optional<Cost>(tracker.best->cost)
                                                        : std::nullopt;
            return run_makespan_guess(ctx, ctx.guesses[i], snapshot);
        },
        [&](GuessOutcome&& o) {
            report.diag += o.diag;
            for (auto& ck : o.checks) report.shortcut_checks.push_back(std::move(ck));
            for (auto& c : o.candidates) tracker.offer(std::move(c), true);
        });
    return finish_report(std::move(report), tracker, inst, obj, budgets, false, start);
}

namespace {

// ---------------------------------------------------------------------------
// santa

struct SantaUniverse {
    Rat LB;
    Rat rho;  // UB = rho * LB
    std::vector<int> huge;  // original job indices, ascending
    RoundedInstance rounded;
    std::vector<PricedTemplate> tau;
    std::vector<std::vector<int>> profiles;
    ConfigUniverse universe;
    std::vector<int> class_counts;
    bool viable = false;
    GuessDiagnostics diag;
};

SantaUniverse build_santa_universe(const Instance& inst, const Rat& eps, long E, const Rat& LB,
                                   long rho_pow, const SchemeBudgets& budgets) {
    SantaUniverse u;
    u.LB = LB;
    u.rho = pow_rat(Rat(E), rho_pow);
    Rat UB = LB * u.rho;
    for (int j = 0; j < inst.n(); ++j)
        if (inst.jobs[j] > UB) u.huge.push_back(j);
    int h = static_cast<int>(u.huge.size());
    if (h > inst.m - 1) return u;  // no valid partition has m huge bags

    std::vector<MergedJob> nonhuge;
    for (int j = 0; j < inst.n(); ++j)
        if (inst.jobs[j] <= UB) nonhuge.push_back({inst.jobs[j], {j}});
    if (nonhuge.empty()) return u;  // h <= m-1 < n forces a non-huge job

    // grid top 3*UB: r <= 3*rho*E^2 - E
    Rat r_max_rat = 3 * u.rho * E * E - E;
    if (r_max_rat > Rat(Int(1) << 40)) {
        ++u.diag.grid_overflow;
        return u;
    }
    long r_max = static_cast<long>(numerator(r_max_rat));

    MergeResult merge = merge_small_jobs(std::move(nonhuge), RefScale{LB, 1, Rat(2)},
                                         eps * eps);
    u.rounded.scale = RefScale{LB, 1, Rat(2)};
    u.rounded.eps = eps;
    u.rounded.merged = merge.jobs;
    u.rounded.leftover = merge.leftover;
    u.rounded.grid = SizeGrid{u.rounded.scale, eps, -3, r_max, true, RoundDir::down};
    if (merge.jobs.empty()) {
        u.viable = true;  // leftover-only universe; handled without an IP
        return u;
    }
    u.rounded.classes = round_jobs_geometric(u.rounded.merged, u.rounded.scale, eps,
                                             RoundDir::down);
    u.class_counts = u.rounded.class_counts();

    int bags_avail = inst.m - h;
    std::vector<Rat> class_units;
    for (const auto& c : u.rounded.classes) class_units.push_back(c.unit);
    try {
        auto raw = enumerate_templates(class_units, u.class_counts, 3 * u.rho,
                                       std::min<long>(3 * static_cast<long>(numerator(u.rho)) * E * E,
                                                      inst.n()),
                                       budgets.tcip);
        std::size_t dropped = 0;
        u.tau = price_templates(raw, u.rounded.grid, &dropped);
        u.diag.templates_dropped += dropped;
        if (u.tau.empty()) return u;
        u.profiles = enumerate_bag_profiles(u.tau, u.class_counts, bags_avail,
                                            budgets.max_bag_profiles);
        if (u.profiles.empty()) return u;
        u.universe = build_universe(u.tau, bags_avail, u.class_counts, budgets.tcip);
    } catch (const BudgetError&) {
        ++u.diag.ip_budget;
        return u;
    }
    u.viable = true;
    return u;
}

GuessOutcome run_santa_combo(const Instance& inst, const Rat& eps, long E,
                             const SantaUniverse& u, int k, int k_max,
                             const SchemeBudgets& budgets) {
    GuessOutcome out;
    ++out.diag.guesses;
    Objective obj = Objective::santa();
    int h = static_cast<int>(u.huge.size());

    std::vector<int> fixed_bag_of(inst.n(), 0);
    for (int i = 0; i < h; ++i) fixed_bag_of[u.huge[i]] = i + 1;

    auto complete_rest = [&](TwoStageSolution& sol, const ScenarioList& list) {
        std::vector<int> rest;
        for (int kk : inst.support())
            if (!list.contains(kk)) rest.push_back(kk);
        complete_scenarios(inst, sol, rest, obj, budgets.subroutine);
    };

    ScenarioList list = build_scenario_list(inst.q, k, k_max);
    Rat step = eps * eps / u.rho * list.total;
    auto reps = select_representatives(list, step, ReprAugment::add_max_index);
    std::map<int, int> block_of;
    for (std::size_t i = 0; i < reps.size(); ++i) block_of[reps[i]] = static_cast<int>(i);
    std::vector<ScenarioService> services;
    for (const auto& e : list.entries) {
        int rep = representative_for(reps, e.kappa, CopyRule::copy_right);
        services.push_back({e.kappa, block_of[rep], e.kappa});
    }

    long long grid_min = static_cast<long long>(rat_ceil(Rat(E * E, 2)));  // LB/2

    PartitionOpt popt;
    std::set<std::vector<long long>> vecs;
    for (const auto& y : u.profiles) {
        std::vector<long long> bags;
        for (std::size_t t = 0; t < u.tau.size(); ++t)
            for (int c = 0; c < y[t]; ++c) bags.push_back(u.tau[t].allowed_grid);
        std::vector<long long> vec(reps.size());
        bool ok = true;
        for (std::size_t i = 0; i < reps.size() && ok; ++i) {
            vec[i] = popt.max_min(bags, reps[i] - h);
            if (vec[i] < grid_min) ok = false;  // below the value grid's floor
        }
        if (ok) vecs.insert(std::move(vec));
        if (vecs.size() > budgets.max_histograms) {
            ++out.diag.ip_budget;
            return out;
        }
    }

    std::map<long long, std::vector<Configuration>> config_cache;
    for (const auto& vec : vecs) {
        ++out.diag.histograms;
        std::vector<BlockSpec> blocks(reps.size());
        bool empty_block = false;
        for (std::size_t i = 0; i < reps.size(); ++i) {
            auto it = config_cache.find(vec[i]);
            if (it == config_cache.end())
                it = config_cache.emplace(vec[i], u.universe.at_least(vec[i])).first;
            if (it->second.empty()) empty_block = true;
            blocks[i] = {reps[i], reps[i] - h, &it->second, vec[i], std::nullopt};
        }
        if (empty_block) {
            ++out.diag.ip_infeasible;
            continue;
        }
        FeasibilityProgram prog =
            build_program(u.tau, u.class_counts, blocks, inst.m - h, std::nullopt);
        SolveResult res = solve_feasibility(prog, budgets.ip_node_limit);
        if (res.status == SolveStatus::budget_exceeded) {
            ++out.diag.ip_budget;
            continue;
        }
        if (res.status == SolveStatus::infeasible) {
            ++out.diag.ip_infeasible;
            continue;
        }
        ++out.diag.ip_feasible;

        ExtractParams params;
        params.tau = &u.tau;
        params.blocks = &blocks;
        params.program = &prog;
        params.point = &res.point;
        params.rounded = &u.rounded;
        params.m_total = inst.m;
        params.huge_bags = h;
        params.mode = ConfigMode::at_least;
        params.services = services;
        ExtractResult ex = extract_solution(params);
        ++out.diag.extractions;

        TwoStageSolution lifted = lift_solution(ex.solution, u.rounded, inst, fixed_bag_of);
        complete_rest(lifted, list);
        out.candidates.push_back(make_candidate(inst, obj, std::move(lifted)));
    }
    return out;
}

}  // namespace

RunReport eptas_santa(const Instance& inst, const Rat& eps, const SchemeBudgets& budgets) {
    auto start = std::chrono::steady_clock::now();
    inst.validate();
    long E = validate_epsilon(eps);
    Objective obj = Objective::santa();

    RunReport report;
    report.objective = obj;
    report.epsilon = eps;
    Tracker tracker{inst, obj};
    tracker.offer(make_candidate(inst, obj, baseline_solution(inst, obj, budgets.subroutine)),
                  false);
    report.baseline_cost = tracker.best->cost;

    if (inst.n() <= inst.m) {
        tracker.offer(make_candidate(inst, obj, few_jobs_solution(inst, obj, budgets.subroutine)),
                      false);
        return finish_report(std::move(report), tracker, inst, obj, budgets, true, start);
    }

    // LB candidates: powers of 1+eps anchored by some job via the
    // job-anchored bounds p_j <= OPT_k <= n * p_j.
    Rat ope = 1 + eps;
    std::set<long> lb_expos;
    for (const auto& pj : inst.jobs) {
        auto [t_lo, t_hi] = power_exponent_range(pj / ope, Rat(inst.n()) * pj, ope);
        for (long t = t_lo; t <= t_hi; ++t) lb_expos.insert(t);
    }
    auto support = inst.support();

    struct ComboRef {
        std::size_t universe;
        int k, k_max;
    };
    std::vector<std::pair<Rat, long>> universe_keys;  // (LB, rho power)
    for (long t : lb_expos)
        for (long r = 2; r <= E + 1; ++r) universe_keys.emplace_back(pow_rat(ope, t), r);

    run_waves(
        universe_keys.size(), budgets.threads,
        [&](std::size_t i) -> GuessOutcome {
            GuessOutcome merged;
            SantaUniverse u = build_santa_universe(inst, eps, E, universe_keys[i].first,
                                                   universe_keys[i].second, budgets);
            merged.diag += u.diag;
            if (!u.viable) {
                ++merged.diag.guesses_skipped;
                return merged;
            }
            if (u.rounded.merged.empty()) {
                ++merged.diag.guesses;
                merged.candidates.push_back(
                    leftover_only_candidate(inst, Objective::santa(), u.huge, budgets));
                return merged;
            }
            int h = static_cast<int>(u.huge.size());
            std::set<std::pair<int, int>> seen;  // distinct support intervals
            for (int k_max : support) {
                for (int k : support) {
                    if (k > k_max || k <= h) continue;
                    if (!seen.insert({k, k_max}).second) continue;
                    GuessOutcome o = run_santa_combo(inst, eps, E, u, k, k_max, budgets);
                    merged.diag += o.diag;
                    for (auto& c : o.candidates) merged.candidates.push_back(std::move(c));
                }
            }
            return merged;
        },
        [&](GuessOutcome&& o) {
            report.diag += o.diag;
            for (auto& c : o.candidates) tracker.offer(std::move(c), true);
        });
    return finish_report(std::move(report), tracker, inst, obj, budgets, false, start);
}

namespace {

// ---------------------------------------------------------------------------
// lp norm

struct LpUniverse {
    Rat opt_kmax;
    Rat rho;
    int k_max = 0;
    std::vector<int> huge;
    RoundedInstance rounded;
    std::vector<PricedTemplate> tau;
    std::vector<std::vector<int>> profiles;
    ConfigUniverse universe;
    std::vector<int> class_counts;
    bool viable = false;
    GuessDiagnostics diag;
};

LpUniverse build_lp_universe(const Instance& inst, const Rat& eps, long E, const Rat& p,
                             const Rat& opt_kmax, long rho_pow, int k_max,
                             const SchemeBudgets& budgets) {
    LpUniverse u;
    u.opt_kmax = opt_kmax;
    u.rho = pow_rat(Rat(E), rho_pow);
    u.k_max = k_max;
    RefScale scale{opt_kmax, k_max, p};  // LB = opt_kmax / k_max^(1/p)

    // huge: p_j > 2*UB = 2*rho*LB
    Rat huge_units = 2 * u.rho;
    for (int j = 0; j < inst.n(); ++j)
        if (scale.cmp_units(inst.jobs[j], huge_units) > 0) u.huge.push_back(j);
    int h = static_cast<int>(u.huge.size());
    if (h > inst.m - 1 || h >= k_max) return u;

    std::vector<MergedJob> nonhuge;
    for (int j = 0; j < inst.n(); ++j)
        if (scale.cmp_units(inst.jobs[j], huge_units) <= 0) nonhuge.push_back({inst.jobs[j], {j}});
    if (nonhuge.empty()) return u;

    Rat r_max_rat = 7 * u.rho * E * E - E;  // grid top 7*UB
    if (r_max_rat > Rat(Int(1) << 40)) {
        ++u.diag.grid_overflow;
        return u;
    }
    long r_max = static_cast<long>(numerator(r_max_rat));

    MergeResult merge = merge_small_jobs(std::move(nonhuge), scale, eps * eps);
    u.rounded.scale = scale;
    u.rounded.eps = eps;
    u.rounded.merged = merge.jobs;
    u.rounded.leftover = merge.leftover;
    u.rounded.grid = SizeGrid{scale, eps, 0, r_max, true, RoundDir::up};
    if (merge.jobs.empty()) {
        u.viable = true;
        return u;
    }
    u.rounded.classes = round_jobs_geometric(u.rounded.merged, scale, eps, RoundDir::up);
    u.class_counts = u.rounded.class_counts();
    if (u.rounded.classes.back().unit > u.rounded.grid.max_value_units()) return u;

    int bags_avail = inst.m - h;
    std::vector<Rat> class_units;
    for (const auto& c : u.rounded.classes) class_units.push_back(c.unit);
    try {
        auto raw = enumerate_templates(class_units, u.class_counts, 7 * u.rho,
                                       static_cast<long>(inst.n()), budgets.tcip);
        std::size_t dropped = 0;
        u.tau = price_templates(raw, u.rounded.grid, &dropped);
        u.diag.templates_dropped += dropped;
        if (u.tau.empty()) return u;
        u.profiles = enumerate_bag_profiles(u.tau, u.class_counts, bags_avail,
                                            budgets.max_bag_profiles);
        if (u.profiles.empty()) return u;
        u.universe = build_universe(u.tau, bags_avail, u.class_counts, budgets.tcip);
    } catch (const BudgetError&) {
        ++u.diag.ip_budget;
        return u;
    }
    u.viable = true;
    return u;
}

GuessOutcome run_lp_combo(const Instance& inst, const Rat& eps, long E, const Rat& p,
                          const LpUniverse& u, int k, const SchemeBudgets& budgets,
                          const std::optional<Cost>& best_snapshot) {
    GuessOutcome out;
    ++out.diag.guesses;
    Objective obj = Objective::lpnorm(p);
    int h = static_cast<int>(u.huge.size());
    bool exact_p = is_integer(p);
    unsigned long pe = exact_p ? static_cast<unsigned long>(numerator(p)) : 2;

    std::vector<int> fixed_bag_of(inst.n(), 0);
    for (int i = 0; i < h; ++i) fixed_bag_of[u.huge[i]] = i + 1;

    auto complete_rest = [&](TwoStageSolution& sol, const ScenarioList& list) {
        std::vector<int> rest;
        for (int kk : inst.support())
            if (!list.contains(kk)) rest.push_back(kk);
        complete_scenarios(inst, sol, rest, obj, budgets.subroutine);
    };

    ScenarioList list = build_scenario_list(inst.q, k, u.k_max);
    Rat step = eps * eps / u.rho;
    auto reps = select_representatives(list, step, ReprAugment::add_min_index);
    std::map<int, int> block_of;
    for (std::size_t i = 0; i < reps.size(); ++i) block_of[reps[i]] = static_cast<int>(i);
    std::vector<Rat> rep_weight(reps.size(), Rat(0));
    std::vector<ScenarioService> services;
    for (const auto& e : list.entries) {
        int rep = representative_for(reps, e.kappa, CopyRule::copy_left);
        rep_weight[block_of[rep]] += e.q;
        services.push_back({e.kappa, block_of[rep], e.kappa});
    }

    // Lower bound on the cost of scenarios served outside the IP:
    // norm >= P * kappa^(1/p - 1), slightly deflated to stay a lower bound.
    Real low_rest(0);
    Real P_real = to_real(inst.total_size());
    Real invp = Real(1) / to_real(p);
    for (int kk : inst.support())
        if (!list.contains(kk))
            low_rest += to_real(inst.q[kk - 1]) * P_real * pow(Real(kk), invp - 1);
    low_rest *= Real("0.999999999");
    Real unit_real = u.rounded.scale.value_real() * to_real(eps) * to_real(eps);

    PartitionOpt popt;
    std::set<std::vector<Int>> vecs;  // minimal p-power keys in grid units
    for (const auto& y : u.profiles) {
        std::vector<long long> bags;
        for (std::size_t t = 0; t < u.tau.size(); ++t)
            for (int c = 0; c < y[t]; ++c) bags.push_back(u.tau[t].allowed_grid);
        std::vector<Int> vec(reps.size());
        for (std::size_t i = 0; i < reps.size(); ++i)
            vec[i] = popt.min_power(bags, reps[i] - h, pe);
        vecs.insert(std::move(vec));
        if (vecs.size() > budgets.max_histograms) {
            ++out.diag.ip_budget;
            return out;
        }
    }

    std::map<Int, std::vector<Configuration>> config_cache;
    std::optional<Cost> local_best = best_snapshot;
    for (const auto& vec : vecs) {
        ++out.diag.histograms;
        if (local_best) {
            Real bound = low_rest;
            for (std::size_t i = 0; i < reps.size(); ++i)
                bound += to_real(rep_weight[i]) * pow(Real(vec[i]), invp) * unit_real;
            if (bound * Real("0.999999999") > local_best->approx()) continue;
        }
        std::vector<BlockSpec> blocks(reps.size());
        for (std::size_t i = 0; i < reps.size(); ++i) {
            auto it = config_cache.find(vec[i]);
            if (it == config_cache.end())
                it = config_cache.emplace(vec[i], u.universe.power_within(Rat(vec[i]), pe)).first;
            blocks[i] = {reps[i], reps[i] - h, &it->second, 0, Rat(vec[i])};
        }
        FeasibilityProgram prog = build_program(u.tau, u.class_counts, blocks, inst.m - h,
                                                static_cast<long>(pe));
        SolveResult res = solve_feasibility(prog, budgets.ip_node_limit);
        if (res.status == SolveStatus::budget_exceeded) {
            ++out.diag.ip_budget;
            continue;
        }
        if (res.status == SolveStatus::infeasible) {
            ++out.diag.ip_infeasible;
            continue;
        }
        ++out.diag.ip_feasible;

        ExtractParams params;
        params.tau = &u.tau;
        params.blocks = &blocks;
        params.program = &prog;
        params.point = &res.point;
        params.rounded = &u.rounded;
        params.m_total = inst.m;
        params.huge_bags = h;
        params.mode = ConfigMode::unscreened;
        params.p_exponent = static_cast<long>(pe);
        params.services = services;
        ExtractResult ex = extract_solution(params);
        ++out.diag.extractions;

        TwoStageSolution lifted = lift_solution(ex.solution, u.rounded, inst, fixed_bag_of);
        complete_rest(lifted, list);
        Candidate cand = make_candidate(inst, obj, std::move(lifted));
        if (!local_best || Cost::better(cand.cost, *local_best, obj)) local_best = cand.cost;
        out.candidates.push_back(std::move(cand));
    }
    return out;
}

}  // namespace

RunReport eptas_lp(const Instance& inst, const Rat& eps, const Rat& p,
                   const SchemeBudgets& budgets) {
    auto start = std::chrono::steady_clock::now();
    inst.validate();
    long E = validate_epsilon(eps);
    Objective obj = Objective::lpnorm(p);
    obj.validate();

    RunReport report;
    report.objective = obj;
    report.epsilon = eps;
    Tracker tracker{inst, obj};
    tracker.offer(make_candidate(inst, obj, baseline_solution(inst, obj, budgets.subroutine)),
                  false);
    report.baseline_cost = tracker.best->cost;

    if (inst.n() <= inst.m) {
        tracker.offer(make_candidate(inst, obj, few_jobs_solution(inst, obj, budgets.subroutine)),
                      false);
        return finish_report(std::move(report), tracker, inst, obj, budgets, true, start);
    }

    int k_max = inst.max_support();
    // opt_kmax = j * eps * OPT for j = 1..E+1, deduplicated across OPT guesses
    std::set<Rat> opt_kmax_values;
    for (const auto& g : opt_guess_candidates(inst, eps))
        for (long j = 1; j <= E + 1; ++j) opt_kmax_values.insert(Rat(j) * eps * g);
    auto support = inst.support();

    std::vector<std::pair<Rat, long>> universe_keys;
    for (const auto& v : opt_kmax_values)
        for (long r = 2; r <= E * E + 1; ++r) universe_keys.emplace_back(v, r);

    run_waves(
        universe_keys.size(), budgets.threads,
        [&](std::size_t i) -> GuessOutcome {
            GuessOutcome merged;
            std::optional<Cost> snapshot =
                tracker.best ? std::optional<Cost>(tracker.best->cost) : std::nullopt;
            LpUniverse u = build_lp_universe(inst, eps, E, p, universe_keys[i].first,
                                             universe_keys[i].second, k_max, budgets);
            merged.diag += u.diag;
            if (!u.viable) {
                ++merged.diag.guesses_skipped;
                return merged;
            }
            if (u.rounded.merged.empty()) {
                ++merged.diag.guesses;
                merged.candidates.push_back(
                    leftover_only_candidate(inst, Objective::lpnorm(p), u.huge, budgets));
                return merged;
            }
            int h = static_cast<int>(u.huge.size());
            for (int k : support) {
                if (k > k_max || k <= h) continue;
                GuessOutcome o = run_lp_combo(inst, eps, E, p, u, k, budgets, snapshot);
                merged.diag += o.diag;
                for (auto& c : o.candidates) merged.candidates.push_back(std::move(c));
            }
            return merged;
        },
        [&](GuessOutcome&& o) {
            report.diag += o.diag;
            for (auto& c : o.candidates) tracker.offer(std::move(c), true);
        });
    return finish_report(std::move(report), tracker, inst, obj, budgets, false, start);
}

RunReport solve(const Instance& inst, const Objective& obj, const Rat& eps,
                const SchemeBudgets& budgets) {
    switch (obj.kind) {
        case ObjectiveKind::makespan: return eptas_makespan(inst, eps, budgets);
        case ObjectiveKind::santa: return eptas_santa(inst, eps, budgets);
        case ObjectiveKind::lpnorm: return eptas_lp(inst, eps, obj.p, budgets);
    }
    throw std::logic_error("bad objective");
}

}  // namespace bagsched
