#pragma once

#include <optional>
#include <vector>

#include "bagsched/model.hpp"

namespace bagsched {

enum class RoundDir { up, down };

// Reference scale R = base / root^(1/p). The root only appears in the lp
// pipeline (R = opt_kmax / k_max^(1/p)); makespan and santa use root == 1.
// All comparisons against multiples of R are exact for integer p (p-th power
// comparison); non-integer p falls back to 50-digit floats.
struct RefScale {
    Rat base = Rat(1);
    long root = 1;
    Rat p = Rat(2);

    bool rational() const { return root == 1; }
    Rat value() const;            // only valid when rational()
    Real value_real() const;
    // sign of (value - units * R); value, units >= 0
    int cmp_units(const Rat& value, const Rat& units) const;
};

struct MergedJob {
    Rat size;
    std::vector<int> originals;  // original job indices behind this job
};

struct MergeResult {
    std::vector<MergedJob> jobs;        // everything that stayed above the threshold
    std::optional<MergedJob> leftover;  // at most one small job set aside
};

// Repeatedly replaces the two smallest jobs of size <= threshold by their sum
// while two such exist; a single survivor becomes the leftover. Ties among
// equal sizes go to the job carrying the smallest original index.
MergeResult merge_small_jobs(const std::vector<Rat>& jobs, const Rat& threshold);
MergeResult merge_small_jobs(std::vector<MergedJob> jobs, const RefScale& scale,
                             const Rat& threshold_units);

struct SizeClass {
    Rat unit;                  // rounded size in units of R: (1+eps)^expo
    long expo;
    std::vector<int> members;  // indices into the merged job list
    int count() const { return static_cast<int>(members.size()); }
};

// Geometric rounding onto the grid {(1+eps)^r * R}: up takes the least grid
// value >= size, down the greatest <= size. Returns classes sorted by size.
std::vector<SizeClass> round_jobs_geometric(const std::vector<MergedJob>& jobs,
                                            const RefScale& scale, const Rat& eps, RoundDir dir);
std::vector<Rat> round_jobs_geometric(const std::vector<Rat>& sizes, const Rat& reference,
                                      const Rat& eps, RoundDir dir);

struct OutOfGridError : std::runtime_error {
    explicit OutOfGridError(const std::string& what) : std::runtime_error(what) {}
};

// Allowed bag sizes {(eps + r*eps^2) * R : r_min <= r <= r_max} plus zero.
// Values are handled as exact multiples of eps^2 * R: grid point r has
// integer index E + r where eps = 1/E.
struct SizeGrid {
    RefScale scale;
    Rat eps;
    long r_min = 0;
    long r_max = 0;
    bool includes_zero = true;
    RoundDir direction = RoundDir::up;

    long edenom() const;                       // E
    Rat value_units(long r) const;             // eps + r*eps^2
    long grid_units(long r) const { return edenom() + r; }  // in eps^2 units
    Rat min_value_units() const { return value_units(r_min); }
    Rat max_value_units() const { return value_units(r_max); }
};

// Smallest grid value >= total (up) or largest <= total (down); zero maps to
// zero. Totals beyond the grid span certify a wrong guess: OutOfGridError.
long allowed_size_r(const Rat& total_units, const SizeGrid& grid);  // total_units > 0
Rat allowed_size_units(const Rat& total_units, const SizeGrid& grid);
Rat allowed_size(const Rat& total, const SizeGrid& grid);  // absolute; rational scale only

// Allowed size of a tight bag holding the given contents: the grid value a
// tight bag of that total would use (minimal feasible for up, maximal for
// down); empty contents keep allowed size zero.
Rat tight_allowed_size(const Rat& total, const SizeGrid& grid);

// Candidate OPT values: integer powers of 1+eps covering [p_max, n*p_max],
// including the first power at or above the upper end. For every v in the
// interval some candidate lies in [v, (1+eps)v).
std::vector<Rat> opt_guess_candidates(const Instance& inst, const Rat& eps);
std::vector<Rat> opt_guess_candidates(const Rat& p_max, int n, const Rat& eps);

struct RoundedInstance {
    RefScale scale;
    Rat eps;
    std::vector<MergedJob> merged;
    std::optional<MergedJob> leftover;
    std::vector<SizeClass> classes;
    SizeGrid grid;

    std::vector<int> class_counts() const;
    Rat total_units() const;  // sum of rounded sizes over all classes, in units of R
};

struct RoundedSolution {
    // bag (0-based, one slot per final bag) -> merged-job indices
    std::vector<std::vector<int>> bag_members;
    std::map<int, ScenarioAssignment> per_scenario;  // original scenario index -> machines
};

// Replaces merged jobs by their original groups, re-inserts the leftover into
// the currently smallest nonempty bag (lowest index on ties; bag 1 when all
// bags are empty), and carries the scenario assignments over verbatim.
// `fixed_bag_of` pre-places original jobs that bypassed the rounding (huge
// jobs in the santa/lp pipelines); entries of 0 mean "not pre-placed".
TwoStageSolution lift_solution(const RoundedSolution& rsol, const RoundedInstance& rounded,
                               const Instance& original,
                               const std::vector<int>& fixed_bag_of = {});

}  // namespace bagsched
