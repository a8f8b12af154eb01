#include "bagsched/io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace bagsched {

namespace {

using Json = nlohmann::ordered_json;

Rat rat_from_json(const Json& v, const char* what) {
    if (v.is_number_integer()) return Rat(static_cast<long long>(v.get<long long>()));
    if (v.is_string()) return parse_rat(v.get<std::string>());
    throw std::invalid_argument(std::string(what) +
                                " must be an integer or a \"num/den\" string");
}

Json rat_to_json(const Rat& x) {
    if (denominator(x) == 1 && numerator(x) >= std::numeric_limits<long long>::min() &&
        numerator(x) <= std::numeric_limits<long long>::max())
        return Json(static_cast<long long>(numerator(x)));
    return Json(rat_string(x));
}

std::string real_string(const Real& x) {
    std::ostringstream os;
    os.precision(30);
    os << x;
    return os.str();
}

Json cost_to_json(const Cost& c) {
    Json out;
    if (c.is_exact()) {
        out["value"] = rat_string(c.exact);
    } else {
        out["value"] = real_string(c.approx());
        Json keys = Json::object();
        if (is_integer(c.p)) {
            for (const auto& [q, key] : c.lp_parts) keys[rat_string(q)] = rat_string(key);
        } else {
            for (const auto& [q, key] : c.lp_parts_real) keys[rat_string(q)] = real_string(key);
        }
        out["scenario_keys"] = keys;
    }
    return out;
}

Json solution_to_json(const Instance& inst, const TwoStageSolution& sol) {
    Json out;
    out["bag_of"] = sol.bags.bag_of;
    Json per = Json::object();
    for (const auto& [k, sa] : sol.per_scenario) per[std::to_string(k)] = sa.machine_of;
    out["per_scenario"] = per;
    (void)inst;
    return out;
}

Json instance_json(const Instance& inst) {
    Json j;
    j["name"] = inst.name;
    Json jobs = Json::array();
    for (const auto& pj : inst.jobs) jobs.push_back(rat_to_json(pj));
    j["jobs"] = jobs;
    j["m"] = inst.m;
    Json q = Json::array();
    for (const auto& qk : inst.q) q.push_back(rat_to_json(qk));
    j["q"] = q;
    return j;
}

Json objective_json(const Objective& obj) {
    Json j;
    j["kind"] = objective_name(obj);
    if (obj.kind == ObjectiveKind::lpnorm) j["p"] = rat_string(obj.p);
    return j;
}

}  // namespace

Instance parse_instance_json(const std::string& text) {
    Json j = Json::parse(text);
    Instance inst;
    inst.name = j.value("name", std::string("unnamed"));
    if (!j.contains("jobs") || !j["jobs"].is_array())
        throw std::invalid_argument("instance needs a jobs array");
    for (const auto& v : j["jobs"]) inst.jobs.push_back(rat_from_json(v, "job size"));
    if (!j.contains("m") || !j["m"].is_number_integer())
        throw std::invalid_argument("instance needs an integer m");
    inst.m = j["m"].get<int>();
    if (!j.contains("q") || !j["q"].is_array())
        throw std::invalid_argument("instance needs a q array");
    for (const auto& v : j["q"]) inst.q.push_back(rat_from_json(v, "probability"));
    inst.validate();
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open instance file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_instance_json(buf.str());
}

std::string instance_to_json(const Instance& inst) { return instance_json(inst).dump(2) + "\n"; }

std::string report_to_json(const Instance& inst, const RunReport& report, bool include_timing) {
    Json j;
    j["instance"] = instance_json(inst);
    j["objective"] = objective_json(report.objective);
    j["epsilon"] = rat_string(report.epsilon);
    j["method"] = report.method;
    j["cost"] = cost_to_json(report.cost);
    j["solution"] = solution_to_json(inst, report.solution);
    Json diag;
    diag["baseline_cost"] = cost_to_json(report.baseline_cost);
    diag["baseline_only"] = report.baseline_only;
    diag["guesses"] = report.diag.guesses;
    diag["guesses_skipped"] = report.diag.guesses_skipped;
    diag["histograms"] = report.diag.histograms;
    diag["ip_feasible"] = report.diag.ip_feasible;
    diag["ip_infeasible"] = report.diag.ip_infeasible;
    diag["ip_budget"] = report.diag.ip_budget;
    diag["extractions"] = report.diag.extractions;
    diag["grid_overflow"] = report.diag.grid_overflow;
    diag["templates_dropped"] = report.diag.templates_dropped;
    diag["shortcut_scenarios"] = report.shortcut_checks.size();
    if (report.oracle_cost) {
        diag["oracle_cost"] = cost_to_json(*report.oracle_cost);
        if (report.empirical_ratio) diag["empirical_ratio"] = *report.empirical_ratio;
    }
    j["diagnostics"] = diag;
    if (include_timing) j["elapsed_ms"] = report.elapsed_ms;
    return j.dump(2) + "\n";
}

std::string exact_report_to_json(const Instance& inst, const Objective& obj,
                                 const OracleResult& result, double elapsed_ms,
                                 bool include_timing) {
    Json j;
    j["instance"] = instance_json(inst);
    j["objective"] = objective_json(obj);
    j["method"] = "exact";
    j["cost"] = cost_to_json(result.cost);
    j["solution"] = solution_to_json(inst, result.solution);
    if (include_timing) j["elapsed_ms"] = elapsed_ms;
    return j.dump(2) + "\n";
}

Instance generate_instance(const GenParams& params) {
    if (params.n < 1) throw std::invalid_argument("n must be >= 1");
    if (params.m < 2) throw std::invalid_argument("m must be >= 2");
    std::mt19937_64 rng(params.seed);
    Instance inst;
    inst.name = params.name.empty()
                    ? "gen-" + params.dist + "-" + params.qdist + "-n" + std::to_string(params.n) +
                          "-m" + std::to_string(params.m) + "-s" + std::to_string(params.seed)
                    : params.name;
    inst.m = params.m;

    auto uniform_int = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<unsigned long long>(hi - lo + 1));
    };

    for (int j = 0; j < params.n; ++j) {
        if (params.dist == "uniform") {
            inst.jobs.emplace_back(uniform_int(1, 1000), 1000);
        } else if (params.dist == "geometric") {
            inst.jobs.emplace_back(1, 1 << uniform_int(0, 9));
        } else if (params.dist == "twotier") {
            if (rng() % 2 == 0)
                inst.jobs.emplace_back(uniform_int(500, 1000), 1000);
            else
                inst.jobs.emplace_back(uniform_int(1, 50), 1000);
        } else {
            throw std::invalid_argument("unknown size distribution: " + params.dist);
        }
    }

    if (params.qdist == "uniform") {
        for (int k = 1; k <= params.m; ++k) inst.q.emplace_back(1, params.m);
    } else if (params.qdist.rfind("point:", 0) == 0) {
        int target = std::stoi(params.qdist.substr(6));
        if (target < 1 || target > params.m)
            throw std::invalid_argument("point scenario outside 1..m");
        inst.q.assign(params.m, Rat(0));
        inst.q[target - 1] = 1;
    } else if (params.qdist == "geometric") {
        // q_k = 2^-k, the last entry absorbs the remainder
        Rat rest(1);
        for (int k = 1; k < params.m; ++k) {
            Rat qk = Rat(1, Int(1) << k);
            inst.q.push_back(qk);
            rest -= qk;
        }
        inst.q.push_back(rest);
    } else {
        throw std::invalid_argument("unknown scenario distribution: " + params.qdist);
    }
    inst.validate();
    return inst;
}

}  // namespace bagsched
