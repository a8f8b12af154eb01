#pragma once

#include <optional>
#include <string>

#include "bagsched/baselines.hpp"
#include "bagsched/model.hpp"
#include "bagsched/tcip.hpp"

namespace bagsched {

struct SchemeBudgets {
    long long ip_node_limit = 50000000;
    TcipLimits tcip{};
    std::size_t max_bag_profiles = 200000;  // first-stage profiles per guess
    std::size_t max_histograms = 100000;    // histogram vectors per guess
    OracleBudget subroutine{};              // exact identical-machines searches
    bool run_oracle = false;                // also solve the instance exactly
    OracleBudget oracle{};
    int threads = 1;
};

// One scenario served by the list-scheduling path, with the bound the
// analysis promises for it (realized < bound always holds).
struct ShortcutCheck {
    int scenario = 0;
    Rat realized;
    Rat bound;
};

struct GuessDiagnostics {
    long long guesses = 0;
    long long guesses_skipped = 0;
    long long ip_feasible = 0;
    long long ip_infeasible = 0;
    long long ip_budget = 0;
    long long histograms = 0;
    long long extractions = 0;
    long long grid_overflow = 0;
    long long templates_dropped = 0;

    GuessDiagnostics& operator+=(const GuessDiagnostics& o);
};

struct RunReport {
    Objective objective;
    Rat epsilon;
    TwoStageSolution solution;
    Cost cost;
    std::string method;  // "eptas", "few-jobs" or "baseline-only"
    bool baseline_only = false;
    Cost baseline_cost;
    std::optional<Cost> oracle_cost;
    std::optional<double> empirical_ratio;  // cost / oracle cost
    GuessDiagnostics diag;
    std::vector<ShortcutCheck> shortcut_checks;
    double elapsed_ms = 0;
};

// eps must be 1/E for an integer E >= 5; throws std::invalid_argument.
long validate_epsilon(const Rat& eps);

RunReport eptas_makespan(const Instance& inst, const Rat& eps, const SchemeBudgets& budgets = {});
RunReport eptas_santa(const Instance& inst, const Rat& eps, const SchemeBudgets& budgets = {});
RunReport eptas_lp(const Instance& inst, const Rat& eps, const Rat& p,
                   const SchemeBudgets& budgets = {});

// Dispatch plus the best-of contract: the returned solution is never worse
// than the LPT-bags baseline under exact evaluation.
RunReport solve(const Instance& inst, const Objective& obj, const Rat& eps,
                const SchemeBudgets& budgets = {});

}  // namespace bagsched
