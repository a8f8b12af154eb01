#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bagsched/oracle.hpp"
#include "bagsched/rounding.hpp"

namespace bagsched {

struct TcipLimits {
    std::size_t max_templates = 200000;
    std::size_t max_configurations = 500000;
};

// A multiset of rounded job sizes filling one bag.
struct Template {
    std::vector<int> counts;  // per size class
    Rat total_units;          // total rounded size in units of R
    int total_jobs = 0;
};

// All nonempty count vectors with t_l <= n_l, sum t_l <= job_cap and total
// size <= total_cap, in ascending lexicographic order of the count vectors.
// Throws BudgetError past the template ceiling.
std::vector<Template> enumerate_templates(const std::vector<Rat>& class_units,
                                          const std::vector<int>& class_counts,
                                          const Rat& total_cap_units, long job_cap,
                                          const TcipLimits& limits = {});

// A template together with its tight allowed size on the bag grid.
struct PricedTemplate {
    Template tmpl;
    long allowed_r = 0;        // grid exponent
    long long allowed_grid = 0;  // allowed size as an integer multiple of eps^2 * R
};

// Prices every template via tight_allowed_size, dropping templates whose
// contents do not fit the grid span (they cannot occur in any solution that
// uses allowed bag sizes); `dropped` reports how many. Result is sorted by
// descending allowed size, ties by ascending count vector.
std::vector<PricedTemplate> price_templates(const std::vector<Template>& tau,
                                            const SizeGrid& grid, std::size_t* dropped = nullptr);

// A multiset of templates filling one machine; s_grid is the total allowed
// size of its templates in eps^2 units.
struct Configuration {
    std::vector<int> counts;  // per priced template
    long long s_grid = 0;
    int total_templates = 0;
};

enum class ConfigMode { at_most, at_least, unscreened };

// All count vectors over tau with at most template_cap templates that pass
// the mode's screen on the total allowed size (<= bound for at_most, >= for
// at_least, none for unscreened). The empty configuration passes at_most and
// unscreened screens, and at_least only when bound <= 0. `class_limits`
// optionally caps the job content per class (a machine cannot hold more jobs
// of a class than exist); configurations over the cap are unusable in any
// feasible program and are omitted.
std::vector<Configuration> enumerate_configurations(const std::vector<PricedTemplate>& tau,
                                                    long template_cap,
                                                    std::optional<long long> bound_grid,
                                                    ConfigMode mode,
                                                    const std::vector<int>* class_limits = nullptr,
                                                    const TcipLimits& limits = {});

enum class RowRel { eq, le };

struct LinRow {
    std::vector<std::pair<int, Rat>> terms;  // (variable, coefficient)
    RowRel rel = RowRel::eq;
    Rat rhs;
};

struct VarInfo {
    std::string name;
    long long ub = 0;  // all variables are integers in [0, ub]
    int block = -1;    // -1 = first-stage variable, else block index
};

struct FeasibilityProgram {
    std::vector<VarInfo> vars;
    std::vector<LinRow> rows;
    std::vector<int> block_scenario;    // block -> scenario it serves (metadata)
    std::vector<int> block_var_offset;  // block -> first x variable
    int y_count = 0;
};

// One scenario block of the two-stage program.
struct BlockSpec {
    int scenario = 0;   // original scenario index (metadata)
    int machines = 0;   // RHS of the machine-count row
    const std::vector<Configuration>* configs = nullptr;
    long long bound_grid = 0;           // W in eps^2 units (makespan/santa check)
    std::optional<Rat> power_rhs;       // lp: RHS of sum s_grid^p * x <= rhs
};

// The two-stage feasibility system: sum y <= bag_limit, class-count
// equalities, and per block the machine-count row, the template coupling
// rows and (lp) the p-power row. Variables: y by the order of tau, then one
// x block per scenario.
FeasibilityProgram build_program(const std::vector<PricedTemplate>& tau,
                                 const std::vector<int>& class_counts,
                                 const std::vector<BlockSpec>& blocks, int bag_limit,
                                 std::optional<long> p_exponent);

enum class SolveStatus { feasible, infeasible, budget_exceeded };

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    std::vector<long long> point;
    long long nodes = 0;
};

// Exact feasibility by depth-first search with interval propagation and
// bounds tightening over the box-bounded integers, first-stage variables
// first, then each scenario block independently. A feasible point satisfies
// every row exactly in rational arithmetic; infeasible means the whole box
// was exhausted. The node budget is reported distinctly.
SolveResult solve_feasibility(const FeasibilityProgram& prog, long long node_limit);

// Plain-text dump, one constraint per line, exact rationals as "num/den".
void dump_program(const FeasibilityProgram& prog, std::ostream& os);

// How the extracted solution serves one supported scenario.
struct ScenarioService {
    int scenario = 0;        // original index kappa'
    int block = 0;           // representative's block
    int machines_total = 0;  // kappa' machines exist in this scenario
};

struct ExtractParams {
    const std::vector<PricedTemplate>* tau = nullptr;
    const std::vector<BlockSpec>* blocks = nullptr;
    const FeasibilityProgram* program = nullptr;
    const std::vector<long long>* point = nullptr;
    const RoundedInstance* rounded = nullptr;
    int m_total = 0;      // bags in the original instance
    int huge_bags = 0;    // bags 1..huge_bags are fixed singletons on machines 1..huge_bags
    ConfigMode mode = ConfigMode::at_most;
    std::optional<long> p_exponent;
    std::vector<ScenarioService> services;
};

struct ExtractResult {
    RoundedSolution solution;        // template bags occupy slots huge_bags+1.. of m_total
    std::vector<long long> rep_cost_grid;  // per block: achieved allowed cost (max / min s)
    std::vector<Rat> rep_power_cost;       // per block (lp): sum of s_grid^p over machines
};

// Opens y_t bags per template, fills them class by class, and instantiates
// the representative's configurations for every served scenario. Verifies on
// every call that each block's allowed-size cost respects its bound in the
// mode's direction and that every rounded job lands in exactly one bag;
// violations throw std::logic_error (they indicate a solver bug).
ExtractResult extract_solution(const ExtractParams& params);

}  // namespace bagsched
