#include "bagsched/rounding.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace bagsched {

Rat RefScale::value() const {
    if (!rational()) throw std::logic_error("RefScale with a root has no rational value");
    return base;
}

Real RefScale::value_real() const {
    return to_real(base) / pow(Real(root), Real(1) / to_real(p));
}

int RefScale::cmp_units(const Rat& value, const Rat& units) const {
    if (value < 0 || units < 0) throw std::invalid_argument("cmp_units needs nonnegative operands");
    if (rational()) {
        Rat rhs = units * base;
        return value < rhs ? -1 : value > rhs ? 1 : 0;
    }
    if (is_integer(p)) {
        // value ? units * base / root^(1/p)  <=>  value^p * root ? units^p * base^p
        long pe = static_cast<long>(numerator(p));
        Rat lhs = pow_rat(value, pe) * Rat(root);
        Rat rhs = pow_rat(units * base, pe);
        return lhs < rhs ? -1 : lhs > rhs ? 1 : 0;
    }
    Real lhs = to_real(value);
    Real rhs = to_real(units) * value_real();
    Real tol = std::max(Real(1), std::max(Real(abs(lhs)), Real(abs(rhs)))) * Real("1e-40");
    if (Real(abs(lhs - rhs)) <= tol) return 0;
    return lhs < rhs ? -1 : 1;
}

namespace {

// Ordering for the merge queue: by size, ties by smallest original index.
struct MergeOrder {
    bool operator()(const MergedJob& a, const MergedJob& b) const {
        if (a.size != b.size) return a.size < b.size;
        return a.originals.front() < b.originals.front();
    }
};

MergeResult merge_core(std::vector<MergedJob> jobs,
                       const std::function<bool(const Rat&)>& is_small) {
    MergeResult out;
    std::multiset<MergedJob, MergeOrder> small;
    for (auto& j : jobs) {
        if (is_small(j.size))
            small.insert(std::move(j));
        else
            out.jobs.push_back(std::move(j));
    }
    while (small.size() >= 2) {
        auto it = small.begin();
        MergedJob a = *it;
        it = small.erase(it);
        MergedJob b = *it;
        small.erase(it);
        MergedJob merged;
        merged.size = a.size + b.size;
        merged.originals = std::move(a.originals);
        merged.originals.insert(merged.originals.end(), b.originals.begin(), b.originals.end());
        std::sort(merged.originals.begin(), merged.originals.end());
        if (is_small(merged.size))
            small.insert(std::move(merged));
        else
            out.jobs.push_back(std::move(merged));
    }
    if (!small.empty()) out.leftover = *small.begin();
    std::sort(out.jobs.begin(), out.jobs.end(),
              [](const MergedJob& a, const MergedJob& b) {
                  return a.originals.front() < b.originals.front();
              });
    return out;
}

}  // namespace

MergeResult merge_small_jobs(const std::vector<Rat>& jobs, const Rat& threshold) {
    if (threshold <= 0) throw std::invalid_argument("threshold must be positive");
    std::vector<MergedJob> in;
    in.reserve(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j)
        in.push_back({jobs[j], {static_cast<int>(j)}});
    return merge_core(std::move(in), [&](const Rat& s) { return s <= threshold; });
}

MergeResult merge_small_jobs(std::vector<MergedJob> jobs, const RefScale& scale,
                             const Rat& threshold_units) {
    return merge_core(std::move(jobs),
                      [&](const Rat& s) { return scale.cmp_units(s, threshold_units) <= 0; });
}

namespace {

// Exponent r of the geometric grid point (1+eps)^r * R next to `size`.
long geometric_expo(const Rat& size, const RefScale& scale, const Rat& one_plus_eps,
                    RoundDir dir) {
    long r = 0;
    Rat units(1);
    int c = scale.cmp_units(size, units);
    if (c >= 0) {
        while (scale.cmp_units(size, units * one_plus_eps) > 0) {
            units *= one_plus_eps;
            ++r;
        }
        // size in (units, units*(1+eps)]
        if (dir == RoundDir::up) return scale.cmp_units(size, units) == 0 ? r : r + 1;
        return scale.cmp_units(size, units * one_plus_eps) == 0 ? r + 1 : r;
    }
    while (scale.cmp_units(size, units / one_plus_eps) < 0) {
        units /= one_plus_eps;
        --r;
    }
    // size in ((units/(1+eps)), units]  i.e. (r-1, r]
    if (dir == RoundDir::up) return r;
    return scale.cmp_units(size, units) == 0 ? r : r - 1;
}

}  // namespace

std::vector<SizeClass> round_jobs_geometric(const std::vector<MergedJob>& jobs,
                                            const RefScale& scale, const Rat& eps, RoundDir dir) {
    Rat ope = 1 + eps;
    std::map<long, SizeClass> by_expo;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].size <= 0) throw std::invalid_argument("job sizes must be positive");
        long r = geometric_expo(jobs[i].size, scale, ope, dir);
        auto& cls = by_expo[r];
        if (cls.members.empty()) {
            cls.expo = r;
            cls.unit = pow_rat(ope, r);
        }
        cls.members.push_back(static_cast<int>(i));
    }
    std::vector<SizeClass> out;
    out.reserve(by_expo.size());
    for (auto& [r, cls] : by_expo) out.push_back(std::move(cls));
    return out;
}

std::vector<Rat> round_jobs_geometric(const std::vector<Rat>& sizes, const Rat& reference,
                                      const Rat& eps, RoundDir dir) {
    RefScale scale{reference, 1, Rat(2)};
    Rat ope = 1 + eps;
    std::vector<Rat> out;
    out.reserve(sizes.size());
    for (const auto& s : sizes) {
        if (s <= 0) throw std::invalid_argument("job sizes must be positive");
        out.push_back(pow_rat(ope, geometric_expo(s, scale, ope, dir)) * reference);
    }
    return out;
}

long SizeGrid::edenom() const {
    if (numerator(eps) != 1) throw std::logic_error("eps must be 1/E");
    return static_cast<long>(denominator(eps));
}

Rat SizeGrid::value_units(long r) const { return eps + Rat(r) * eps * eps; }

long allowed_size_r(const Rat& total_units, const SizeGrid& grid) {
    if (total_units <= 0) throw std::invalid_argument("allowed_size_r needs a positive total");
    long e = grid.edenom();
    // (eps + r*eps^2) >= total  <=>  r >= total*E^2 - E
    Rat exact_r = total_units * Rat(e) * Rat(e) - Rat(e);
    long r;
    if (grid.direction == RoundDir::up) {
        r = static_cast<long>(rat_ceil(exact_r));
        if (r < grid.r_min) r = grid.r_min;
        if (r > grid.r_max)
            throw OutOfGridError("total above the top of the allowed-size grid");
    } else {
        r = static_cast<long>(rat_floor(exact_r));
        if (r > grid.r_max) r = grid.r_max;
        if (r < grid.r_min)
            throw OutOfGridError("total below the bottom of the allowed-size grid");
    }
    return r;
}

Rat allowed_size_units(const Rat& total_units, const SizeGrid& grid) {
    if (total_units == 0) {
        if (!grid.includes_zero) throw OutOfGridError("zero is not on this grid");
        return Rat(0);
    }
    return grid.value_units(allowed_size_r(total_units, grid));
}

Rat allowed_size(const Rat& total, const SizeGrid& grid) {
    if (total < 0) throw std::invalid_argument("negative total");
    Rat ref = grid.scale.value();
    if (total == 0) {
        if (!grid.includes_zero) throw OutOfGridError("zero is not on this grid");
        return Rat(0);
    }
    return allowed_size_units(total / ref, grid) * ref;
}

Rat tight_allowed_size(const Rat& total, const SizeGrid& grid) { return allowed_size(total, grid); }

std::vector<Rat> opt_guess_candidates(const Rat& p_max, int n, const Rat& eps) {
    if (p_max <= 0 || n < 1) throw std::invalid_argument("bad guess interval");
    Rat ope = 1 + eps;
    Rat hi = Rat(n) * p_max;
    // smallest power of 1+eps that is >= p_max
    Rat v(1);
    while (v < p_max) v *= ope;
    while (v / ope >= p_max) v /= ope;
    std::vector<Rat> out;
    for (;;) {
        out.push_back(v);
        if (v >= hi) break;
        v *= ope;
    }
    return out;
}

std::vector<Rat> opt_guess_candidates(const Instance& inst, const Rat& eps) {
    return opt_guess_candidates(inst.p_max(), inst.n(), eps);
}

std::vector<int> RoundedInstance::class_counts() const {
    std::vector<int> out;
    out.reserve(classes.size());
    for (const auto& c : classes) out.push_back(c.count());
    return out;
}

Rat RoundedInstance::total_units() const {
    Rat s(0);
    for (const auto& c : classes) s += c.unit * c.count();
    return s;
}

TwoStageSolution lift_solution(const RoundedSolution& rsol, const RoundedInstance& rounded,
                               const Instance& original, const std::vector<int>& fixed_bag_of) {
    TwoStageSolution sol;
    sol.bags.bag_of.assign(original.n(), 0);
    if (!fixed_bag_of.empty()) {
        for (int j = 0; j < original.n(); ++j)
            if (fixed_bag_of[j] != 0) sol.bags.bag_of[j] = fixed_bag_of[j];
    }
    for (std::size_t bag = 0; bag < rsol.bag_members.size(); ++bag) {
        for (int mj : rsol.bag_members[bag])
            for (int orig : rounded.merged[mj].originals)
                sol.bags.bag_of[orig] = static_cast<int>(bag) + 1;
    }
    int m_total = static_cast<int>(rsol.bag_members.size());
    if (rounded.leftover) {
        // smallest nonempty bag by original size, lowest index on ties
        std::vector<Rat> sizes(m_total, Rat(0));
        for (int j = 0; j < original.n(); ++j)
            if (sol.bags.bag_of[j] != 0) sizes[sol.bags.bag_of[j] - 1] += original.jobs[j];
        int target = -1;
        for (int b = 0; b < m_total; ++b) {
            if (sizes[b] == 0) continue;
            if (target < 0 || sizes[b] < sizes[target]) target = b;
        }
        if (target < 0) target = 0;
        for (int orig : rounded.leftover->originals) sol.bags.bag_of[orig] = target + 1;
    }
    for (int j = 0; j < original.n(); ++j)
        if (sol.bags.bag_of[j] == 0)
            throw std::logic_error("lift_solution left a job unassigned");
    sol.per_scenario = rsol.per_scenario;
    return sol;
}

}  // namespace bagsched
