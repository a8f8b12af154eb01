#include "bagsched/model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace bagsched {

void Objective::validate() const {
    if (kind == ObjectiveKind::lpnorm && p <= 1)
        throw std::invalid_argument("lpnorm requires p > 1");
}

std::string objective_name(const Objective& o) {
    switch (o.kind) {
        case ObjectiveKind::makespan: return "makespan";
        case ObjectiveKind::santa: return "santa";
        case ObjectiveKind::lpnorm: return "lp";
    }
    return "?";
}

Rat Instance::p_max() const {
    Rat mx(0);
    for (const auto& pj : jobs) mx = std::max(mx, pj);
    return mx;
}

Rat Instance::total_size() const {
    Rat s(0);
    for (const auto& pj : jobs) s += pj;
    return s;
}

std::vector<int> Instance::support() const {
    std::vector<int> s;
    for (int k = 1; k <= m; ++k)
        if (q[k - 1] > 0) s.push_back(k);
    return s;
}

int Instance::max_support() const {
    for (int k = m; k >= 1; --k)
        if (q[k - 1] > 0) return k;
    throw std::invalid_argument("empty support");
}

void Instance::validate() const {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (jobs.empty()) throw std::invalid_argument("need at least one job");
    for (const auto& pj : jobs)
        if (pj <= 0) throw std::invalid_argument("job sizes must be positive");
    if (static_cast<int>(q.size()) != m)
        throw std::invalid_argument("q must have exactly m entries");
    Rat s(0);
    for (const auto& qk : q) {
        if (qk < 0) throw std::invalid_argument("probabilities must be nonnegative");
        s += qk;
    }
    if (s != 1) throw std::invalid_argument("probabilities must sum to 1 exactly");
    if (support().empty()) throw std::invalid_argument("empty support");
}

std::vector<Rat> BagAssignment::bag_sizes(const Instance& inst) const {
    std::vector<Rat> sizes(inst.m, Rat(0));
    for (int j = 0; j < inst.n(); ++j) {
        int b = bag_of[j];
        if (b < 1 || b > inst.m) throw std::invalid_argument("bag index out of range");
        sizes[b - 1] += inst.jobs[j];
    }
    return sizes;
}

void TwoStageSolution::validate(const Instance& inst) const {
    if (static_cast<int>(bags.bag_of.size()) != inst.n())
        throw std::invalid_argument("bag assignment must cover every job");
    for (int b : bags.bag_of)
        if (b < 1 || b > inst.m) throw std::invalid_argument("bag index out of range");
    auto supp = inst.support();
    if (per_scenario.size() != supp.size())
        throw std::invalid_argument("per_scenario must cover exactly support(q)");
    for (int k : supp) {
        auto it = per_scenario.find(k);
        if (it == per_scenario.end())
            throw std::invalid_argument("missing scenario assignment for k=" + std::to_string(k));
        const auto& sa = it->second;
        if (sa.k != k) throw std::invalid_argument("scenario key/k mismatch");
        if (static_cast<int>(sa.machine_of.size()) != inst.m)
            throw std::invalid_argument("machine_of must map every bag");
        for (int mi : sa.machine_of)
            if (mi < 1 || mi > k) throw std::invalid_argument("machine index out of range");
    }
}

std::vector<Rat> machine_loads(const Instance& inst, const TwoStageSolution& sol, int k) {
    if (k < 1 || k > inst.m || inst.q[k - 1] == 0)
        throw std::domain_error("scenario k=" + std::to_string(k) + " is outside support(q)");
    auto it = sol.per_scenario.find(k);
    if (it == sol.per_scenario.end())
        throw std::invalid_argument("solution has no assignment for scenario k=" + std::to_string(k));
    const auto& sa = it->second;
    auto sizes = sol.bags.bag_sizes(inst);
    std::vector<Rat> loads(k, Rat(0));
    for (int i = 0; i < inst.m; ++i) loads[sa.machine_of[i] - 1] += sizes[i];
    return loads;
}

Rat scenario_key(const std::vector<Rat>& loads, const Objective& obj) {
    if (loads.empty()) throw std::invalid_argument("empty load vector");
    switch (obj.kind) {
        case ObjectiveKind::makespan: return *std::max_element(loads.begin(), loads.end());
        case ObjectiveKind::santa: return *std::min_element(loads.begin(), loads.end());
        case ObjectiveKind::lpnorm: {
            if (!obj.integer_p())
                throw std::domain_error("exact keys need an integer norm exponent");
            long pe = static_cast<long>(numerator(obj.p));
            Rat s(0);
            for (const auto& w : loads) s += pow_rat(w, pe);
            return s;
        }
    }
    throw std::logic_error("bad objective");
}

Real scenario_key_real(const std::vector<Rat>& loads, const Objective& obj) {
    if (obj.kind != ObjectiveKind::lpnorm || obj.integer_p()) return to_real(scenario_key(loads, obj));
    Real s(0), pe = to_real(obj.p);
    for (const auto& w : loads)
        if (w > 0) s += pow(to_real(w), pe);
    return s;
}

Real scenario_cost(const std::vector<Rat>& loads, const Objective& obj) {
    if (obj.kind != ObjectiveKind::lpnorm) return to_real(scenario_key(loads, obj));
    Real key = scenario_key_real(loads, obj);
    return pow(key, Real(1) / to_real(obj.p));
}

bool key_better(const Rat& a, const Rat& b, const Objective& obj) {
    return obj.minimizing() ? a < b : a > b;
}

Real Cost::approx() const {
    if (is_exact()) return to_real(exact);
    Real invp = Real(1) / to_real(p);
    Real s(0);
    if (is_integer(p)) {
        for (const auto& [qk, key] : lp_parts) s += to_real(qk) * pow(to_real(key), invp);
    } else {
        for (const auto& [qk, key] : lp_parts_real) s += to_real(qk) * pow(key, invp);
    }
    return s;
}

int Cost::compare(const Cost& a, const Cost& b) {
    if (a.is_exact() && b.is_exact()) {
        if (a.exact < b.exact) return -1;
        if (a.exact > b.exact) return 1;
        return 0;
    }
    if (a.is_exact() != b.is_exact()) throw std::invalid_argument("incomparable cost kinds");
    if (is_integer(a.p) && is_integer(b.p) && a.p == b.p && a.lp_parts == b.lp_parts) return 0;
    Real av = a.approx(), bv = b.approx();
    Real scale = std::max(Real(1), std::max(Real(abs(av)), Real(abs(bv))));
    if (Real(abs(av - bv)) <= scale * Real("1e-40")) return 0;  // see Cost docs
    return av < bv ? -1 : 1;
}

bool Cost::better(const Cost& a, const Cost& b, const Objective& obj) {
    int c = compare(a, b);
    return obj.minimizing() ? c < 0 : c > 0;
}

std::string Cost::display() const {
    if (is_exact()) return rat_string(exact);
    std::ostringstream os;
    os.precision(30);
    os << approx();
    return os.str();
}

Cost expected_cost(const Instance& inst, const TwoStageSolution& sol, const Objective& obj) {
    sol.validate(inst);
    Cost c;
    c.kind = obj.kind;
    c.p = obj.p;
    if (obj.kind != ObjectiveKind::lpnorm) {
        Rat total(0);
        for (int k : inst.support())
            total += inst.q[k - 1] * scenario_key(machine_loads(inst, sol, k), obj);
        c.exact = total;
        return c;
    }
    for (int k : inst.support()) {
        auto loads = machine_loads(inst, sol, k);
        if (obj.integer_p())
            c.lp_parts.emplace_back(inst.q[k - 1], scenario_key(loads, obj));
        else
            c.lp_parts_real.emplace_back(inst.q[k - 1], scenario_key_real(loads, obj));
    }
    return c;
}

}  // namespace bagsched
