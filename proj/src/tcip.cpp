#include "bagsched/tcip.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

namespace bagsched {

namespace {

void templates_rec(const std::vector<Rat>& units, const std::vector<int>& counts,
                   const Rat& total_cap, long job_cap, const TcipLimits& limits, std::size_t cls,
                   std::vector<int>& cur, Rat& total, long jobs, std::vector<Template>& out) {
    if (cls == units.size()) {
        if (jobs == 0) return;  // not all-zero
        Template t;
        t.counts = cur;
        t.total_units = total;
        t.total_jobs = static_cast<int>(jobs);
        out.push_back(std::move(t));
        if (out.size() > limits.max_templates)
            throw BudgetError("template ceiling exceeded");
        return;
    }
    for (int c = 0; c <= counts[cls]; ++c) {
        if (jobs + c > job_cap) break;
        Rat add = Rat(c) * units[cls];
        if (total + add > total_cap) break;
        cur[cls] = c;
        total += add;
        templates_rec(units, counts, total_cap, job_cap, limits, cls + 1, cur, total, jobs + c,
                      out);
        total -= add;
        cur[cls] = 0;
    }
}

}  // namespace

std::vector<Template> enumerate_templates(const std::vector<Rat>& class_units,
                                          const std::vector<int>& class_counts,
                                          const Rat& total_cap_units, long job_cap,
                                          const TcipLimits& limits) {
    if (total_cap_units <= 0 || job_cap <= 0) throw std::invalid_argument("caps must be positive");
    if (class_units.size() != class_counts.size())
        throw std::invalid_argument("class size/count mismatch");
    std::vector<Template> out;
    std::vector<int> cur(class_units.size(), 0);
    Rat total(0);
    templates_rec(class_units, class_counts, total_cap_units, job_cap, limits, 0, cur, total, 0,
                  out);
    return out;
}

std::vector<PricedTemplate> price_templates(const std::vector<Template>& tau,
                                            const SizeGrid& grid, std::size_t* dropped) {
    std::vector<PricedTemplate> out;
    std::size_t drop = 0;
    for (const auto& t : tau) {
        try {
            long r = allowed_size_r(t.total_units, grid);
            PricedTemplate pt;
            pt.tmpl = t;
            pt.allowed_r = r;
            pt.allowed_grid = grid.grid_units(r);
            out.push_back(std::move(pt));
        } catch (const OutOfGridError&) {
            ++drop;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const PricedTemplate& a, const PricedTemplate& b) {
        if (a.tmpl.total_units != b.tmpl.total_units)
            return a.tmpl.total_units > b.tmpl.total_units;
        return a.tmpl.counts < b.tmpl.counts;
    });
    if (dropped) *dropped = drop;
    return out;
}

std::vector<Configuration> enumerate_configurations(const std::vector<PricedTemplate>& tau,
                                                    long template_cap,
                                                    std::optional<long long> bound_grid,
                                                    ConfigMode mode,
                                                    const std::vector<int>* class_limits,
                                                    const TcipLimits& limits) {
    if (template_cap < 0) throw std::invalid_argument("template cap must be nonnegative");
    std::vector<Configuration> out;
    std::size_t nclasses = class_limits ? class_limits->size() : 0;
    std::vector<int> cur(tau.size(), 0);
    std::vector<int> content(nclasses, 0);

    std::function<void(std::size_t, long long, long)> rec = [&](std::size_t ti, long long s,
                                                                long used) {
        if (ti == tau.size()) {
            if (mode == ConfigMode::at_least && bound_grid && s < *bound_grid) return;
            Configuration c;
            c.counts = cur;
            c.s_grid = s;
            c.total_templates = static_cast<int>(used);
            out.push_back(std::move(c));
            if (out.size() > limits.max_configurations)
                throw BudgetError("configuration ceiling exceeded");
            return;
        }
        const auto& pt = tau[ti];
        int taken = 0;
        for (int c = 0;; ++c) {
            if (used + c > template_cap) break;
            long long s2 = s + static_cast<long long>(c) * pt.allowed_grid;
            if (mode == ConfigMode::at_most && bound_grid && s2 > *bound_grid) break;
            if (c > 0 && class_limits) {
                bool ok = true;
                for (std::size_t l = 0; l < nclasses; ++l) {
                    content[l] += pt.tmpl.counts[l];
                    if (content[l] > (*class_limits)[l]) ok = false;
                }
                ++taken;
                if (!ok) break;
            }
            cur[ti] = c;
            rec(ti + 1, s2, used + c);
        }
        cur[ti] = 0;
        for (int u = 0; u < taken; ++u)
            for (std::size_t l = 0; l < nclasses; ++l) content[l] -= pt.tmpl.counts[l];
    };
    rec(0, 0, 0);
    return out;
}

FeasibilityProgram build_program(const std::vector<PricedTemplate>& tau,
                                 const std::vector<int>& class_counts,
                                 const std::vector<BlockSpec>& blocks, int bag_limit,
                                 std::optional<long> p_exponent) {
    if (tau.empty()) throw std::invalid_argument("no templates");
    for (const auto& b : blocks)
        if (!b.configs || b.configs->empty())
            throw std::invalid_argument("every block needs a nonempty configuration set");

    FeasibilityProgram prog;
    prog.y_count = static_cast<int>(tau.size());
    for (std::size_t t = 0; t < tau.size(); ++t)
        prog.vars.push_back({"y" + std::to_string(t), static_cast<long long>(bag_limit), -1});
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        prog.block_scenario.push_back(blocks[b].scenario);
        prog.block_var_offset.push_back(static_cast<int>(prog.vars.size()));
        for (std::size_t c = 0; c < blocks[b].configs->size(); ++c)
            prog.vars.push_back({"x" + std::to_string(b) + "_" + std::to_string(c),
                                 static_cast<long long>(blocks[b].machines),
                                 static_cast<int>(b)});
    }

    LinRow bag_row;
    bag_row.rel = RowRel::le;
    bag_row.rhs = Rat(bag_limit);
    for (int t = 0; t < prog.y_count; ++t) bag_row.terms.emplace_back(t, Rat(1));
    prog.rows.push_back(std::move(bag_row));

    for (std::size_t l = 0; l < class_counts.size(); ++l) {
        LinRow row;
        row.rel = RowRel::eq;
        row.rhs = Rat(class_counts[l]);
        for (int t = 0; t < prog.y_count; ++t)
            if (tau[t].tmpl.counts[l] != 0) row.terms.emplace_back(t, Rat(tau[t].tmpl.counts[l]));
        prog.rows.push_back(std::move(row));
    }

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& cfgs = *blocks[b].configs;
        int base = prog.block_var_offset[b];
        LinRow machines;
        machines.rel = RowRel::eq;
        machines.rhs = Rat(blocks[b].machines);
        for (std::size_t c = 0; c < cfgs.size(); ++c)
            machines.terms.emplace_back(base + static_cast<int>(c), Rat(1));
        prog.rows.push_back(std::move(machines));

        for (int t = 0; t < prog.y_count; ++t) {
            LinRow coupling;
            coupling.rel = RowRel::eq;
            coupling.rhs = Rat(0);
            for (std::size_t c = 0; c < cfgs.size(); ++c)
                if (cfgs[c].counts[t] != 0)
                    coupling.terms.emplace_back(base + static_cast<int>(c), Rat(cfgs[c].counts[t]));
            coupling.terms.emplace_back(t, Rat(-1));
            prog.rows.push_back(std::move(coupling));
        }

        if (blocks[b].power_rhs) {
            if (!p_exponent) throw std::invalid_argument("p-power row needs an integer exponent");
            LinRow power;
            power.rel = RowRel::le;
            power.rhs = *blocks[b].power_rhs;
            for (std::size_t c = 0; c < cfgs.size(); ++c)
                if (cfgs[c].s_grid != 0)
                    power.terms.emplace_back(
                        base + static_cast<int>(c),
                        Rat(pow_int(Int(cfgs[c].s_grid), static_cast<unsigned long>(*p_exponent))));
            prog.rows.push_back(std::move(power));
        }
    }
    return prog;
}

namespace {

struct LimitHit {};

// Rows are scaled to integer coefficients up front; the search then runs in
// integer arithmetic only.
struct IntRow {
    std::vector<std::pair<int, Int>> terms;
    RowRel rel;
    Int rhs;
};

struct RowState {
    Int partial;
    Int min_rem;
    Int max_rem;
};

class DfsSolver {
  public:
    DfsSolver(const FeasibilityProgram& prog, long long node_limit)
        : prog_(prog), limit_(node_limit) {
        rows_.reserve(prog.rows.size());
        for (const auto& row : prog.rows) {
            Int mult(1);
            for (const auto& [v, c] : row.terms) mult = lcm(mult, denominator(c));
            mult = lcm(mult, denominator(row.rhs));
            IntRow ir;
            ir.rel = row.rel;
            ir.rhs = numerator(row.rhs) * (mult / denominator(row.rhs));
            for (const auto& [v, c] : row.terms)
                ir.terms.emplace_back(v, numerator(c) * (mult / denominator(c)));
            rows_.push_back(std::move(ir));
        }

        var_rows_.resize(prog.vars.size());
        state_.resize(rows_.size());
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            int row_block = -1;
            for (const auto& [v, c] : rows_[r].terms) {
                var_rows_[v].emplace_back(static_cast<int>(r), c);
                int vb = prog.vars[v].block;
                if (vb != -1) {
                    if (row_block != -1 && row_block != vb)
                        throw std::invalid_argument("row spans two scenario blocks");
                    row_block = vb;
                }
                Int contrib = c * prog.vars[v].ub;
                if (contrib >= 0)
                    state_[r].max_rem += contrib;
                else
                    state_[r].min_rem += contrib;
            }
        }
        for (std::size_t v = 0; v < prog.vars.size(); ++v) {
            int vb = prog.vars[v].block;
            if (vb == -1)
                globals_.push_back(static_cast<int>(v));
            else {
                if (vb >= static_cast<int>(block_vars_.size())) block_vars_.resize(vb + 1);
                block_vars_[vb].push_back(static_cast<int>(v));
            }
        }
        value_.assign(prog.vars.size(), 0);
    }

    SolveResult run() {
        SolveResult res;
        try {
            bool root_ok = true;
            for (std::size_t r = 0; r < rows_.size(); ++r)
                if (!row_ok(static_cast<int>(r))) {
                    root_ok = false;
                    break;
                }
            if (root_ok && solve_vars(globals_, 0, [&] { return solve_blocks(0); })) {
                res.status = SolveStatus::feasible;
                res.point = value_;
            } else {
                res.status = SolveStatus::infeasible;
            }
        } catch (const LimitHit&) {
            res.status = SolveStatus::budget_exceeded;
        }
        res.nodes = nodes_;
        return res;
    }

  private:
    bool row_ok(int r) const {
        const auto& st = state_[r];
        const auto& row = rows_[r];
        if (row.rel == RowRel::le) return st.partial + st.min_rem <= row.rhs;
        return st.partial + st.min_rem <= row.rhs && st.partial + st.max_rem >= row.rhs;
    }

    void apply(int v, long long val) {
        for (const auto& [r, c] : var_rows_[v]) {
            Int contrib = c * prog_.vars[v].ub;
            if (contrib >= 0)
                state_[r].max_rem -= contrib;
            else
                state_[r].min_rem -= contrib;
            state_[r].partial += c * val;
        }
        value_[v] = val;
    }

    void undo(int v, long long val) {
        for (const auto& [r, c] : var_rows_[v]) {
            Int contrib = c * prog_.vars[v].ub;
            if (contrib >= 0)
                state_[r].max_rem += contrib;
            else
                state_[r].min_rem += contrib;
            state_[r].partial -= c * val;
        }
        value_[v] = 0;
    }

    // Branch interval for v from interval propagation over its rows.
    std::pair<long long, long long> branch_range(int v) const {
        long long lo = 0, hi = prog_.vars[v].ub;
        auto cut_hi = [&](const Int& f) {
            if (f < hi) hi = f < 0 ? -1 : static_cast<long long>(f);
        };
        auto cut_lo = [&](const Int& cl) {
            if (cl > lo) lo = cl > prog_.vars[v].ub ? prog_.vars[v].ub + 1
                                                    : static_cast<long long>(cl);
        };
        for (const auto& [r, c] : var_rows_[v]) {
            const auto& st = state_[r];
            const auto& row = rows_[r];
            Int contrib = c * prog_.vars[v].ub;
            Int min_wo = st.min_rem - (contrib < 0 ? contrib : Int(0));
            Int max_wo = st.max_rem - (contrib > 0 ? contrib : Int(0));
            Int slack_hi = row.rhs - st.partial - min_wo;  // c*val <= slack_hi
            if (c > 0)
                cut_hi(floor_div(slack_hi, c));
            else
                cut_lo(ceil_div(slack_hi, c));
            if (row.rel == RowRel::eq) {
                Int slack_lo = row.rhs - st.partial - max_wo;  // c*val >= slack_lo
                if (c > 0)
                    cut_lo(ceil_div(slack_lo, c));
                else
                    cut_hi(floor_div(slack_lo, c));
            }
            if (lo > hi) break;
        }
        return {lo, hi};
    }

    void tick() {
        if (++nodes_ > limit_) throw LimitHit{};
    }

    bool solve_vars(const std::vector<int>& vars, std::size_t i,
                    const std::function<bool()>& next) {
        if (i == vars.size()) return next();
        int v = vars[i];
        auto [lo, hi] = branch_range(v);
        for (long long val = lo; val <= hi; ++val) {
            tick();
            apply(v, val);
            if (solve_vars(vars, i + 1, next)) return true;
            undo(v, val);
        }
        return false;
    }

    bool solve_blocks(std::size_t b) {
        if (b == block_vars_.size()) return true;
        return solve_vars(block_vars_[b], 0, [&] { return solve_blocks(b + 1); });
    }

    const FeasibilityProgram& prog_;
    long long limit_;
    long long nodes_ = 0;
    std::vector<IntRow> rows_;
    std::vector<RowState> state_;
    std::vector<std::vector<std::pair<int, Int>>> var_rows_;
    std::vector<int> globals_;
    std::vector<std::vector<int>> block_vars_;
    std::vector<long long> value_;
};

}  // namespace

SolveResult solve_feasibility(const FeasibilityProgram& prog, long long node_limit) {
    DfsSolver solver(prog, node_limit);
    return solver.run();
}

void dump_program(const FeasibilityProgram& prog, std::ostream& os) {
    os << "vars " << prog.vars.size() << "\n";
    for (const auto& v : prog.vars)
        os << v.name << " in [0," << v.ub << "] block " << v.block << "\n";
    for (const auto& row : prog.rows) {
        bool first = true;
        for (const auto& [v, c] : row.terms) {
            if (!first) os << " + ";
            os << rat_string(c) << "*" << prog.vars[v].name;
            first = false;
        }
        os << (row.rel == RowRel::eq ? " = " : " <= ") << rat_string(row.rhs) << "\n";
    }
}

ExtractResult extract_solution(const ExtractParams& params) {
    const auto& tau = *params.tau;
    const auto& blocks = *params.blocks;
    const auto& prog = *params.program;
    const auto& point = *params.point;
    const auto& rounded = *params.rounded;

    ExtractResult out;
    int bag_base = params.huge_bags;

    std::vector<int> bag_template;  // local bag -> template, in variable order
    for (int t = 0; t < prog.y_count; ++t)
        for (long long copy = 0; copy < point[t]; ++copy) bag_template.push_back(t);
    int opened = static_cast<int>(bag_template.size());
    if (bag_base + opened > params.m_total)
        throw std::logic_error("extraction opened more bags than exist");

    std::vector<std::vector<int>> bag_jobs(opened);
    std::vector<std::size_t> next_member(rounded.classes.size(), 0);
    for (int lb = 0; lb < opened; ++lb) {
        const auto& counts = tau[bag_template[lb]].tmpl.counts;
        for (std::size_t l = 0; l < counts.size(); ++l)
            for (int c = 0; c < counts[l]; ++c) {
                if (next_member[l] >= rounded.classes[l].members.size())
                    throw std::logic_error("class exhausted during extraction");
                bag_jobs[lb].push_back(rounded.classes[l].members[next_member[l]++]);
            }
    }
    for (std::size_t l = 0; l < rounded.classes.size(); ++l)
        if (next_member[l] != rounded.classes[l].members.size())
            throw std::logic_error("rounded job left unplaced by extraction");

    out.solution.bag_members.assign(params.m_total, {});
    for (int lb = 0; lb < opened; ++lb)
        out.solution.bag_members[bag_base + lb] = std::move(bag_jobs[lb]);

    long pe = params.p_exponent.value_or(2);
    std::vector<std::vector<int>> block_machine_cfg(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& cfgs = *blocks[b].configs;
        int base = prog.block_var_offset[b];
        long long max_s = 0, min_s = -1;
        Rat power_sum(0);
        for (std::size_t c = 0; c < cfgs.size(); ++c) {
            for (long long copy = 0; copy < point[base + static_cast<int>(c)]; ++copy) {
                block_machine_cfg[b].push_back(static_cast<int>(c));
                max_s = std::max(max_s, cfgs[c].s_grid);
                min_s = min_s < 0 ? cfgs[c].s_grid : std::min(min_s, cfgs[c].s_grid);
                if (params.mode == ConfigMode::unscreened && blocks[b].power_rhs)
                    power_sum += Rat(pow_int(Int(cfgs[c].s_grid), static_cast<unsigned long>(pe)));
            }
        }
        if (static_cast<int>(block_machine_cfg[b].size()) != blocks[b].machines)
            throw std::logic_error("machine-count row violated at extraction");
        switch (params.mode) {
            case ConfigMode::at_most:
                if (max_s > blocks[b].bound_grid)
                    throw std::logic_error("extracted makespan exceeds its scenario bound");
                out.rep_cost_grid.push_back(max_s);
                break;
            case ConfigMode::at_least:
                if (min_s < blocks[b].bound_grid)
                    throw std::logic_error("extracted santa value below its scenario bound");
                out.rep_cost_grid.push_back(min_s);
                break;
            case ConfigMode::unscreened:
                if (blocks[b].power_rhs && power_sum > *blocks[b].power_rhs)
                    throw std::logic_error("extracted p-power cost exceeds its scenario bound");
                out.rep_cost_grid.push_back(max_s);
                out.rep_power_cost.push_back(power_sum);
                break;
        }
    }

    // Scenario assignments: machines 1..huge_bags carry the fixed huge bags,
    // configuration machines follow, empty bags sit on machine 1. Surplus
    // configurations (santa, representative above the scenario) wrap around
    // the available machines; surplus machines (makespan/lp) stay empty.
    for (const auto& svc : params.services) {
        const auto& cfgs = *blocks[svc.block].configs;
        ScenarioAssignment sa;
        sa.k = svc.machines_total;
        sa.machine_of.assign(params.m_total, 1);
        for (int hb = 0; hb < params.huge_bags; ++hb) sa.machine_of[hb] = hb + 1;

        int slots = svc.machines_total - params.huge_bags;
        if (slots < 1) throw std::logic_error("scenario has no machines left for template bags");

        std::vector<std::vector<int>> pool(tau.size());  // lowest local bag on top
        for (int lb = opened - 1; lb >= 0; --lb) pool[bag_template[lb]].push_back(lb);

        const auto& machine_cfgs = block_machine_cfg[svc.block];
        for (std::size_t mi = 0; mi < machine_cfgs.size(); ++mi) {
            int machine = params.huge_bags + 1 + static_cast<int>(mi % slots);
            const auto& cfg = cfgs[machine_cfgs[mi]];
            for (std::size_t t = 0; t < tau.size(); ++t)
                for (int c = 0; c < cfg.counts[t]; ++c) {
                    if (pool[t].empty()) throw std::logic_error("bag pool exhausted");
                    int lb = pool[t].back();
                    pool[t].pop_back();
                    sa.machine_of[bag_base + lb] = machine;
                }
        }
        for (const auto& p : pool)
            if (!p.empty()) throw std::logic_error("coupling rows left a bag unassigned");
        out.solution.per_scenario[svc.scenario] = std::move(sa);
    }
    return out;
}

}  // namespace bagsched
