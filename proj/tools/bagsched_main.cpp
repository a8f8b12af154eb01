#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "bagsched/io.hpp"

namespace {

using namespace bagsched;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDegraded = 2;
constexpr int kExitOracleBudget = 3;

void write_out(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write: " + out_path);
    out << text;
}

Objective make_objective(const std::string& name, const std::string& p_str) {
    if (name == "makespan") return Objective::makespan();
    if (name == "santa") return Objective::santa();
    if (name == "lp") {
        if (p_str.empty())
            throw std::invalid_argument("--objective lp requires --p");
        Objective obj = Objective::lpnorm(parse_rat(p_str));
        obj.validate();
        return obj;
    }
    throw std::invalid_argument("unknown objective: " + name);
}

std::string cost_csv(const Cost& c) {
    if (c.is_exact()) return rat_string(c.exact);
    std::ostringstream os;
    os.precision(17);
    os << c.approx();
    return os.str();
}

int cmd_solve(const std::string& instance_path, const std::string& objective,
              const std::string& p_str, const std::string& eps_str, long long budget_nodes,
              int threads, bool with_oracle, const std::string& out_path) {
    Instance inst = load_instance(instance_path);
    Objective obj = make_objective(objective, p_str);
    Rat eps = parse_rat(eps_str);
    validate_epsilon(eps);
    SchemeBudgets budgets;
    if (budget_nodes > 0) budgets.ip_node_limit = budget_nodes;
    budgets.threads = threads;
    budgets.run_oracle = with_oracle;
    RunReport report = solve(inst, obj, eps, budgets);
    write_out(report_to_json(inst, report, true), out_path);
    return report.baseline_only ? kExitDegraded : kExitOk;
}

int cmd_exact(const std::string& instance_path, const std::string& objective,
              const std::string& p_str, int max_jobs, int max_bags, long long budget_nodes,
              const std::string& out_path) {
    Instance inst = load_instance(instance_path);
    Objective obj = make_objective(objective, p_str);
    OracleBudget budget;
    if (max_jobs > 0) budget.max_jobs = max_jobs;
    if (max_bags > 0) budget.max_bags = max_bags;
    if (budget_nodes > 0) budget.node_limit = budget_nodes;
    auto start = std::chrono::steady_clock::now();
    try {
        OracleResult result = exact_solve(inst, obj, budget);
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
        write_out(exact_report_to_json(inst, obj, result, ms, true), out_path);
        return kExitOk;
    } catch (const BudgetError& e) {
        std::cerr << "oracle budget exceeded: " << e.what() << "\n";
        return kExitOracleBudget;
    }
}

int cmd_gen(int n, int m, unsigned long long seed, const std::string& dist,
            const std::string& qdist, const std::string& name, const std::string& out_path) {
    GenParams params{n, m, seed, dist, qdist, name};
    Instance inst = generate_instance(params);
    write_out(instance_to_json(inst), out_path);
    return kExitOk;
}

int cmd_bench(const std::string& dir, const std::string& eps_str, const std::string& p_str,
              long long budget_nodes, int threads, const std::string& out_path) {
    Rat eps = parse_rat(eps_str);
    validate_epsilon(eps);
    Rat p = p_str.empty() ? Rat(2) : parse_rat(p_str);
    if (p <= 1) throw std::invalid_argument("--p must be > 1");

    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    std::ostringstream csv;
    csv << "instance,objective,epsilon,scheme_cost,baseline_cost,oracle_cost,ratio,time_ms,"
           "diagnostic\n";
    std::vector<Objective> objectives{Objective::makespan(), Objective::santa(),
                                      Objective::lpnorm(p)};
    for (const auto& file : files) {
        for (const auto& obj : objectives) {
            std::string name = std::filesystem::path(file).filename().string();
            csv << name << "," << objective_name(obj) << "," << rat_string(eps) << ",";
            try {
                Instance inst = load_instance(file);
                SchemeBudgets budgets;
                if (budget_nodes > 0) budgets.ip_node_limit = budget_nodes;
                budgets.threads = threads;
                budgets.run_oracle = true;
                RunReport report = solve(inst, obj, eps, budgets);
                csv << cost_csv(report.cost) << "," << cost_csv(report.baseline_cost) << ",";
                if (report.oracle_cost) {
                    csv << cost_csv(*report.oracle_cost) << ",";
                    if (report.empirical_ratio)
                        csv << *report.empirical_ratio;
                    csv << ",";
                } else {
                    csv << ",,";
                }
                csv << report.elapsed_ms << ","
                    << (report.baseline_only ? "baseline-only" : "") << "\n";
            } catch (const std::exception& e) {
                std::string msg = e.what();
                for (auto& ch : msg)
                    if (ch == ',' || ch == '\n') ch = ';';
                csv << ",,,,," << msg << "\n";
            }
        }
    }
    write_out(csv.str(), out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage stochastic bag scheduling toolkit"};
    app.require_subcommand(1);

    std::string instance_path, objective, p_str, eps_str, out_path, dist = "uniform",
                                                                    qdist = "uniform", name, dir;
    long long budget_nodes = 0;
    int threads = 1, n = 4, m = 2, max_jobs = 0, max_bags = 0;
    unsigned long long seed = 1;

    auto* solve_cmd = app.add_subcommand("solve", "run the approximation scheme");
    solve_cmd->add_option("--instance", instance_path, "instance JSON file")->required();
    solve_cmd->add_option("--objective", objective, "makespan | santa | lp")->required();
    solve_cmd->add_option("--p", p_str, "norm exponent for lp (rational, > 1)");
    solve_cmd->add_option("--epsilon", eps_str, "accuracy parameter, 1/E with E >= 5")->required();
    solve_cmd->add_option("--budget-nodes", budget_nodes, "search node budget per program");
    solve_cmd->add_option("--threads", threads, "parallel guess workers");
    solve_cmd->add_flag("--with-oracle", "also solve exactly when within the oracle budget");
    solve_cmd->add_option("--out", out_path, "report path (default stdout)");

    auto* exact_cmd = app.add_subcommand("exact", "solve exactly by enumeration");
    exact_cmd->add_option("--instance", instance_path, "instance JSON file")->required();
    exact_cmd->add_option("--objective", objective, "makespan | santa | lp")->required();
    exact_cmd->add_option("--p", p_str, "norm exponent for lp");
    exact_cmd->add_option("--max-jobs", max_jobs, "oracle job cap (default 10)");
    exact_cmd->add_option("--max-bags", max_bags, "oracle bag cap (default 5)");
    exact_cmd->add_option("--budget-nodes", budget_nodes, "oracle node budget");
    exact_cmd->add_option("--out", out_path, "report path (default stdout)");

    auto* gen_cmd = app.add_subcommand("gen", "generate a random instance");
    gen_cmd->add_option("--n", n, "number of jobs")->required();
    gen_cmd->add_option("--m", m, "number of bags")->required();
    gen_cmd->add_option("--seed", seed, "RNG seed")->required();
    gen_cmd->add_option("--dist", dist, "uniform | geometric | twotier");
    gen_cmd->add_option("--qdist", qdist, "uniform | point:K | geometric");
    gen_cmd->add_option("--name", name, "instance name");
    gen_cmd->add_option("--out", out_path, "instance path (default stdout)");

    auto* bench_cmd = app.add_subcommand("bench", "benchmark a directory of instances");
    bench_cmd->add_option("--dir", dir, "directory of instance JSON files")->required();
    bench_cmd->add_option("--epsilon", eps_str, "accuracy parameter")->required();
    bench_cmd->add_option("--p", p_str, "norm exponent for the lp rows (default 2)");
    bench_cmd->add_option("--budget-nodes", budget_nodes, "search node budget per program");
    bench_cmd->add_option("--threads", threads, "parallel guess workers");
    bench_cmd->add_option("--out", out_path, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd)
            return cmd_solve(instance_path, objective, p_str, eps_str, budget_nodes, threads,
                             solve_cmd->count("--with-oracle") > 0, out_path);
        if (*exact_cmd)
            return cmd_exact(instance_path, objective, p_str, max_jobs, max_bags, budget_nodes,
                             out_path);
        if (*gen_cmd) return cmd_gen(n, m, seed, dist, qdist, name, out_path);
        if (*bench_cmd) return cmd_bench(dir, eps_str, p_str, budget_nodes, threads, out_path);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOracleBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
