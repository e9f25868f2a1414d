#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "dosage/trial_io.hpp"

namespace dosage {

inline constexpr int kSchemaVersion = 1;

struct ProblemOptions {
    GridOptions grid;
    std::uint64_t seed = 0;
    int replications = 100;
    bool renormalize = false;  // never silent: only on explicit request
    bool strict = false;       // enforce realistic welfare / monotone cost
    bool repair = false;
};

// Parsed problem document: everything a CLI invocation needs.
struct Problem {
    DoseGrid grid;
    TrialEvidence evidence;
    WelfareSpec welfare;
    CostSpec cost;
    Restrictions restrictions;
    ProblemOptions options;
    std::optional<ThresholdDistribution> true_q;
    std::optional<TrialDesign> design;
    nlohmann::json raw;  // original document, echoed in results
};

Problem parse_problem(const nlohmann::json& doc);
Problem load_problem_file(const std::string& path);

// Display rounding helpers (machine output always carries full precision).
std::string format_probability(double v);  // 4 decimals
std::string format_regret(double v);       // 3 decimals

nlohmann::json interval_json(const Interval& iv, bool regret_style = false);
nlohmann::json clinical_decision_json(const ClinicalDecision& d);
nlohmann::json allocation_decision_json(const AllocationDecision& d);
nlohmann::json regret_report_json(const RegretReport& r);

}  // namespace dosage
