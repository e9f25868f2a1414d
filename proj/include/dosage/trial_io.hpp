#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dosage/decision.hpp"

namespace dosage {

struct SubjectRecord {
    int arm_dose = 0;
    int disease = 0;
    int adverse_effect = 0;
    std::string id;  // optional
};

// Delimited text with header `dose,d,e[,id]`; malformed rows are errors.
std::vector<SubjectRecord> parse_subject_records(std::istream& in);

// Empirical evidence: one arm per represented dose, cell frequencies, N(k).
TrialEvidence ingest(const std::vector<SubjectRecord>& records, const DoseGrid& grid);

// Nearest (l-infinity) projection of the arm frequencies onto the set of
// evidence consistent with monotone dose response and the given restrictions.
// One small LP; used only on explicit request.
TrialEvidence repair_evidence(const TrialEvidence& evidence,
                              const Restrictions& restrictions, const DoseGrid& grid);

enum class DecisionMode { Clinical, Allocation };

struct DecideOptions {
    bool repair = false;  // default OFF: inconsistent evidence is an error
    GridOptions grid;
};

using Decision = std::variant<ClinicalDecision, AllocationDecision>;

// Plug-in decision: treat empirical frequencies as exact and run the
// large-sample pipeline.
Decision as_if_decide(const TrialEvidence& evidence, const DoseGrid& grid,
                      const WelfareSpec& w, const CostSpec& g,
                      const Restrictions& restrictions, DecisionMode mode,
                      const DecideOptions& options = {});

Decision as_if_decide(const std::vector<SubjectRecord>& records, const DoseGrid& grid,
                      const WelfareSpec& w, const CostSpec& g,
                      const Restrictions& restrictions, DecisionMode mode,
                      const DecideOptions& options = {});

struct TrialDesign {
    std::vector<int> doses;            // strictly increasing, within 0..T
    std::vector<std::int64_t> sizes;   // positive arm sizes N(k)
};

struct RegretReport {
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> regrets;  // per decided replication, replication order
    int inconsistent_count = 0;   // replications rejected without repair
    double mean = 0.0;
    double max = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    // Decision frequencies over decided replications; keys are "t=2" for
    // clinical choices and comma-joined rounded shares for allocations.
    std::vector<std::pair<std::string, double>> decision_frequency;
};

// Monte Carlo evaluation of the as-if rule against a known truth. Replication
// i draws each arm's outcomes from push_forward(true_q, t_k) using an
// independent SplitMix64 substream of (seed, i); identical seeds reproduce
// identical reports bit for bit.
RegretReport simulate_regret(const ThresholdDistribution& true_q,
                             const TrialDesign& design, const WelfareSpec& w,
                             const CostSpec& g, const Restrictions& restrictions,
                             DecisionMode mode, int replications, std::uint64_t seed,
                             const DecideOptions& options = {});

}  // namespace dosage
