#include "dosage/trial_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

namespace dosage {

namespace {

// Splittable counter-style generator; the per-replication substream seed is a
// fixed mix of the master seed and the replication index.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 a{master};
    SplitMix64 b{index};
    return a.next() ^ (b.next() + 0x9E3779B97F4A7C15ULL);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

int parse_int_field(const std::string& s, int line_no, const char* what) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw IngestError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    return value;
}

std::string allocation_key(const std::vector<double>& shares) {
    std::string key;
    char buf[16];
    for (std::size_t t = 0; t < shares.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.3f", shares[t]);
        if (t) key.push_back(',');
        key += buf;
    }
    return key;
}

double nearest_rank_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * n));
    if (rank == 0) rank = 1;
    if (rank > n) rank = n;
    return sorted[rank - 1];
}

}  // namespace

std::vector<SubjectRecord> parse_subject_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty subject-record input");
    std::vector<std::string> header = split_csv(line);
    const bool has_id = header.size() == 4 && header[3] == "id";
    if (!(header.size() == 3 || has_id) || header[0] != "dose" || header[1] != "d" ||
        header[2] != "e")
        throw IngestError("expected header 'dose,d,e' or 'dose,d,e,id', got '" + line + "'");

    std::vector<SubjectRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != header.size())
            throw IngestError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(f.size()));
        SubjectRecord rec;
        rec.arm_dose = parse_int_field(f[0], line_no, "dose");
        rec.disease = parse_int_field(f[1], line_no, "d");
        rec.adverse_effect = parse_int_field(f[2], line_no, "e");
        if (has_id) rec.id = f[3];
        records.push_back(std::move(rec));
    }
    return records;
}

TrialEvidence ingest(const std::vector<SubjectRecord>& records, const DoseGrid& grid) {
    if (records.empty()) throw IngestError("ingest: no subject records");

    std::map<int, std::array<std::int64_t, 4>> counts;
    std::size_t index = 0;
    for (const SubjectRecord& rec : records) {
        ++index;
        const std::string label =
            rec.id.empty() ? "record " + std::to_string(index) : "record '" + rec.id + "'";
        if (!grid.valid_dose(rec.arm_dose))
            throw IngestError(label + ": dose " + std::to_string(rec.arm_dose) +
                              " outside 0.." + std::to_string(grid.max_dose()));
        if ((rec.disease != 0 && rec.disease != 1) ||
            (rec.adverse_effect != 0 && rec.adverse_effect != 1))
            throw IngestError(label + ": outcome fields must be 0 or 1");
        const OutcomeCell cell = make_outcome_cell(rec.disease, rec.adverse_effect);
        counts[rec.arm_dose][static_cast<std::size_t>(cell)] += 1;
    }

    std::vector<TrialArm> arms;
    for (const auto& [dose, cells] : counts) {
        const std::int64_t n = cells[0] + cells[1] + cells[2] + cells[3];
        std::array<double, 4> p{};
        for (std::size_t c = 0; c < 4; ++c)
            p[c] = static_cast<double>(cells[c]) / static_cast<double>(n);
        arms.push_back(TrialArm{dose, OutcomeDistribution(p), n});
    }
    return TrialEvidence(std::move(arms), grid);
}

TrialEvidence repair_evidence(const TrialEvidence& evidence,
                              const Restrictions& restrictions, const DoseGrid& grid) {
    // One LP: find adjusted arm distributions p~ within epsilon (l-infinity)
    // of the observed ones that some threshold distribution reproduces, with
    // epsilon minimal. Variables: q, p~, epsilon, and slacks for the two
    // absolute-deviation inequalities per arm cell.
    const int nthr = grid.threshold_count();
    const std::size_t nq = static_cast<std::size_t>(nthr) * nthr;
    const std::size_t n_arm_cells = evidence.arm_count() * 4;
    const std::size_t p_off = nq;
    const std::size_t eps_off = p_off + n_arm_cells;
    const std::size_t sp_off = eps_off + 1;
    const std::size_t sm_off = sp_off + n_arm_cells;
    const std::size_t nvars = sm_off + n_arm_cells;

    std::vector<double> matrix;
    std::vector<double> rhs;
    auto add_row = [&](const std::vector<double>& row, double value) {
        matrix.insert(matrix.end(), row.begin(), row.end());
        rhs.push_back(value);
    };

    add_row([&] {
        std::vector<double> row(nvars, 0.0);
        for (std::size_t j = 0; j < nq; ++j) row[j] = 1.0;
        return row;
    }(), 1.0);

    std::size_t cell_index = 0;
    for (const TrialArm& arm : evidence.arms()) {
        for (OutcomeCell cell : kOutcomeCells) {
            std::vector<double> row(nvars, 0.0);
            const std::vector<double> quad = quadrant_indicator(grid, arm.dose, cell);
            std::copy(quad.begin(), quad.end(), row.begin());
            row[p_off + cell_index] = -1.0;
            add_row(row, 0.0);
            ++cell_index;
        }
    }

    if (restrictions.no_ae_at_zero) {
        for (int h = 0; h < nthr; ++h) {
            std::vector<double> row(nvars, 0.0);
            row[static_cast<std::size_t>(h) * nthr] = 1.0;
            add_row(row, 0.0);
        }
    }
    if (restrictions.concurrent_thresholds) {
        for (int h = 0; h < nthr; ++h)
            for (int i = 0; i < nthr; ++i) {
                if (h == i) continue;
                std::vector<double> row(nvars, 0.0);
                row[static_cast<std::size_t>(h) * nthr + i] = 1.0;
                add_row(row, 0.0);
            }
    }

    cell_index = 0;
    for (const TrialArm& arm : evidence.arms()) {
        for (OutcomeCell cell : kOutcomeCells) {
            const double observed = arm.outcomes.at(cell);
            std::vector<double> row(nvars, 0.0);
            row[p_off + cell_index] = 1.0;
            row[eps_off] = -1.0;
            row[sp_off + cell_index] = 1.0;
            add_row(row, observed);  // p~ - eps <= observed

            std::vector<double> row2(nvars, 0.0);
            row2[p_off + cell_index] = -1.0;
            row2[eps_off] = -1.0;
            row2[sm_off + cell_index] = 1.0;
            add_row(row2, -observed);  // observed - p~ <= eps
            ++cell_index;
        }
    }

    linprog::LinearProgram lp;
    lp.sense = linprog::Sense::Minimize;
    lp.objective.assign(nvars, 0.0);
    lp.objective[eps_off] = 1.0;
    lp.eq_matrix = std::move(matrix);
    lp.eq_rhs = std::move(rhs);

    linprog::LpOutcome out = linprog::solve(lp);
    if (out.status != linprog::LpStatus::Optimal)
        throw NumericalError("repair_evidence: projection LP did not solve");

    std::vector<TrialArm> arms;
    cell_index = 0;
    for (const TrialArm& arm : evidence.arms()) {
        std::array<double, 4> p{};
        for (std::size_t c = 0; c < 4; ++c)
            p[c] = std::max(out.point[p_off + cell_index + c], 0.0);
        cell_index += 4;
        arms.push_back(TrialArm{arm.dose, OutcomeDistribution(p, /*renormalize=*/true),
                                arm.sample_size});
    }
    return TrialEvidence(std::move(arms), grid);
}

Decision as_if_decide(const TrialEvidence& evidence, const DoseGrid& grid,
                      const WelfareSpec& w, const CostSpec& g,
                      const Restrictions& restrictions, DecisionMode mode,
                      const DecideOptions& options) {
    ConstraintSystem cs = build_constraints(evidence, restrictions, grid);
    if (!cs.feasible()) {
        if (!options.repair) {
            ConsistencyReport report = check_consistency(evidence, restrictions, grid);
            throw InconsistentEvidenceError(
                "as_if_decide: empirical evidence is inconsistent with monotone dose "
                "response (enable repair to project onto the consistent set)",
                report.violated_necessary_conditions);
        }
        cs = build_constraints(repair_evidence(evidence, restrictions, grid),
                               restrictions, grid);
    }
    if (mode == DecisionMode::Clinical) return clinical_mmr(cs, w, g);
    return allocation_mmr_auto(cs, w, g, options.grid);
}

Decision as_if_decide(const std::vector<SubjectRecord>& records, const DoseGrid& grid,
                      const WelfareSpec& w, const CostSpec& g,
                      const Restrictions& restrictions, DecisionMode mode,
                      const DecideOptions& options) {
    return as_if_decide(ingest(records, grid), grid, w, g, restrictions, mode, options);
}

RegretReport simulate_regret(const ThresholdDistribution& true_q,
                             const TrialDesign& design, const WelfareSpec& w,
                             const CostSpec& g, const Restrictions& restrictions,
                             DecisionMode mode, int replications, std::uint64_t seed,
                             const DecideOptions& options) {
    const DoseGrid& grid = true_q.grid();
    if (replications < 1) throw ArgumentError("simulate_regret: replications must be >= 1");
    if (design.doses.empty() || design.doses.size() != design.sizes.size())
        throw ArgumentError("simulate_regret: design doses/sizes mismatch");
    int prev = -1;
    for (std::size_t k = 0; k < design.doses.size(); ++k) {
        if (!grid.valid_dose(design.doses[k]) || design.doses[k] <= prev)
            throw ArgumentError("simulate_regret: design doses must be strictly "
                                "increasing and within 0..T");
        if (design.sizes[k] < 1) throw ArgumentError("simulate_regret: arm size must be >= 1");
        prev = design.doses[k];
    }

    std::vector<double> omega_true(grid.dose_count());
    for (int t = 0; t < grid.dose_count(); ++t)
        omega_true[t] = net_welfare(true_q, t, w, g);
    const double best = *std::max_element(omega_true.begin(), omega_true.end());

    std::vector<OutcomeDistribution> arm_truth;
    arm_truth.reserve(design.doses.size());
    for (int dose : design.doses) arm_truth.push_back(push_forward(true_q, dose));

    RegretReport report;
    report.replications = replications;
    report.seed = seed;
    std::map<std::string, int> frequency;

    for (int rep = 0; rep < replications; ++rep) {
        SplitMix64 rng{substream_seed(seed, static_cast<std::uint64_t>(rep))};

        std::vector<TrialArm> arms;
        for (std::size_t k = 0; k < design.doses.size(); ++k) {
            const std::array<double, 4>& p = arm_truth[k].probabilities();
            std::array<std::int64_t, 4> counts{};
            for (std::int64_t n = 0; n < design.sizes[k]; ++n) {
                const double u = rng.uniform01();
                double acc = 0.0;
                std::size_t cell = 3;  // last cell absorbs rounding remainder
                for (std::size_t c = 0; c < 3; ++c) {
                    acc += p[c];
                    if (u < acc) { cell = c; break; }
                }
                counts[cell] += 1;
            }
            std::array<double, 4> freq{};
            for (std::size_t c = 0; c < 4; ++c)
                freq[c] = static_cast<double>(counts[c]) /
                          static_cast<double>(design.sizes[k]);
            arms.push_back(TrialArm{design.doses[k], OutcomeDistribution(freq),
                                    design.sizes[k]});
        }

        Decision decision;
        try {
            decision = as_if_decide(TrialEvidence(std::move(arms), grid), grid, w, g,
                                    restrictions, mode, options);
        } catch (const InconsistentEvidenceError&) {
            report.inconsistent_count += 1;
            continue;
        }

        double achieved = 0.0;
        std::string key;
        if (const auto* clinical = std::get_if<ClinicalDecision>(&decision)) {
            achieved = omega_true[clinical->chosen_dose];
            key = "t=" + std::to_string(clinical->chosen_dose);
        } else {
            const auto& alloc = std::get<AllocationDecision>(decision);
            for (int t = 0; t < grid.dose_count(); ++t)
                achieved += alloc.allocation[t] * omega_true[t];
            key = allocation_key(alloc.allocation);
        }
        report.regrets.push_back(std::max(best - achieved, 0.0));
        frequency[key] += 1;
    }

    const std::size_t decided = report.regrets.size();
    if (decided > 0) {
        report.mean = std::accumulate(report.regrets.begin(), report.regrets.end(), 0.0) /
                      static_cast<double>(decided);
        std::vector<double> sorted = report.regrets;
        std::sort(sorted.begin(), sorted.end());
        report.max = sorted.back();
        report.q50 = nearest_rank_quantile(sorted, 0.50);
        report.q90 = nearest_rank_quantile(sorted, 0.90);
        report.q99 = nearest_rank_quantile(sorted, 0.99);
        for (const auto& [key, count] : frequency)
            report.decision_frequency.emplace_back(
                key, static_cast<double>(count) / static_cast<double>(decided));
    }
    return report;
}

}  // namespace dosage
