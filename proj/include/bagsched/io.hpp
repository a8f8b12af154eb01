#pragma once

#include <string>

#include "bagsched/oracle.hpp"
#include "bagsched/schemes.hpp"

namespace bagsched {

// Instance files carry jobs and probabilities as JSON integers or "num/den"
// strings; floating-point numbers are rejected to keep the exactness
// contract.
Instance parse_instance_json(const std::string& text);
Instance load_instance(const std::string& path);
std::string instance_to_json(const Instance& inst);

// Solver report. Costs appear as "num/den" for makespan/santa; lp costs are
// irrational in general, so the report carries a 30-digit decimal value plus
// the exact per-scenario comparison keys. `include_timing` adds elapsed_ms
// (excluded from canonical reports compared byte-for-byte).
std::string report_to_json(const Instance& inst, const RunReport& report, bool include_timing);

std::string exact_report_to_json(const Instance& inst, const Objective& obj,
                                 const OracleResult& result, double elapsed_ms,
                                 bool include_timing);

struct GenParams {
    int n = 4;
    int m = 2;
    unsigned long long seed = 1;
    std::string dist = "uniform";     // uniform | geometric | twotier
    std::string qdist = "uniform";    // uniform | point:K | geometric
    std::string name;
};

// Deterministic in all fields of `params`; sizes are rationals with
// denominator at most 1000 and q sums to 1 exactly.
Instance generate_instance(const GenParams& params);

}  // namespace bagsched
