#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dosage/illustration.hpp"
#include "dosage/problem.hpp"

namespace {

using dosage::Interval;
using nlohmann::json;

struct GlobalOptions {
    std::string output_path;
    bool no_timings = false;
};

class Stopwatch {
public:
    void lap(const std::string& name) {
        const auto now = clock::now();
        laps_.emplace_back(name, std::chrono::duration<double, std::milli>(now - mark_).count());
        mark_ = now;
    }

    json to_json() const {
        json j = json::object();
        for (const auto& [name, ms] : laps_) j[name + "_ms"] = ms;
        return j;
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point mark_ = clock::now();
    std::vector<std::pair<std::string, double>> laps_;
};

json result_document(const std::string& command, json result, json diagnostics,
                     const GlobalOptions& g, const Stopwatch* watch,
                     const json* echo = nullptr) {
    if (!g.no_timings && watch) diagnostics["timings"] = watch->to_json();
    json doc{{"schema_version", dosage::kSchemaVersion},
             {"command", command},
             {"result", std::move(result)},
             {"diagnostics", std::move(diagnostics)}};
    if (echo) doc["echo"] = *echo;
    return doc;
}

void emit(const json& doc, const GlobalOptions& g) {
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!g.output_path.empty()) {
        std::ofstream out(g.output_path);
        if (!out) throw dosage::ArgumentError("cannot write output file '" + g.output_path + "'");
        out << text;
    }
}

json evidence_diagnostics(const dosage::ConstraintSystem& cs) {
    return json{{"constraint_rows", cs.num_rows()},
                {"equality_rank", cs.equality_rank()},
                {"lp_count", cs.maximizer().lp_count()}};
}

int cmd_check(const dosage::Problem& p, const GlobalOptions& g) {
    Stopwatch watch;
    dosage::ConsistencyReport report =
        dosage::check_consistency(p.evidence, p.restrictions, p.grid);
    watch.lap("check");

    json result{{"consistent", report.consistent}};
    if (report.consistent) {
        result["witness"] = report.witness->mass();
    } else {
        result["violated_necessary_conditions"] = report.violated_necessary_conditions;
        result["certificate"] = report.certificate;
    }
    emit(result_document("check", std::move(result), json::object(), g, &watch, &p.raw), g);
    if (!report.consistent) {
        std::cerr << "evidence is inconsistent with monotone dose response\n";
        for (const auto& v : report.violated_necessary_conditions) std::cerr << "  " << v << "\n";
        return 2;
    }
    return 0;
}

json independence_block(const dosage::Problem& p, int t) {
    dosage::IndependenceBounds b =
        dosage::independence_bounds(p.evidence, p.grid, t, p.welfare, p.cost);
    return json{{"p_disease", dosage::interval_json(b.p_disease)},
                {"p_ae", dosage::interval_json(b.p_ae)},
                {"net_welfare", dosage::interval_json(b.net_welfare)}};
}

int cmd_bounds(const dosage::Problem& p, std::optional<int> dose, const GlobalOptions& g) {
    if (dose && !p.grid.valid_dose(*dose))
        throw dosage::ArgumentError("--dose must lie in 0..T");

    Stopwatch watch;
    std::vector<int> doses;
    if (dose)
        doses.push_back(*dose);
    else
        for (int t = 0; t <= p.grid.max_dose(); ++t) doses.push_back(t);

    json per_dose = json::array();
    if (p.restrictions.independence) {
        for (int t : doses) {
            json block = independence_block(p, t);
            block["dose"] = t;
            per_dose.push_back(std::move(block));
        }
        watch.lap("bounds");
        json result{{"method", "independence_factorized"}, {"per_dose", per_dose}};
        emit(result_document("bounds", std::move(result), json::object(), g, &watch, &p.raw), g);
        return 0;
    }

    dosage::ConstraintSystem cs =
        dosage::build_constraints(p.evidence, p.restrictions, p.grid);
    watch.lap("build");
    for (int t : doses) {
        json cells = json::object();
        for (dosage::OutcomeCell cell : dosage::kOutcomeCells)
            cells[dosage::cell_name(cell)] =
                dosage::interval_json(dosage::bound_outcome_prob(cs, t, cell));
        json block{{"dose", t},
                   {"outcome_cells", std::move(cells)},
                   {"net_welfare",
                    dosage::interval_json(dosage::bound_net_welfare(cs, t, p.welfare, p.cost))}};
        per_dose.push_back(std::move(block));
    }
    watch.lap("bounds");
    json result{{"method", "polytope_lp"}, {"per_dose", per_dose}};
    emit(result_document("bounds", std::move(result), evidence_diagnostics(cs), g, &watch,
                         &p.raw),
         g);
    return 0;
}

int cmd_decide(const dosage::Problem& p, const std::string& mode_name, bool repair,
               const GlobalOptions& g) {
    const dosage::DecisionMode mode = (mode_name == "clinical")
                                          ? dosage::DecisionMode::Clinical
                                          : dosage::DecisionMode::Allocation;
    dosage::DecideOptions opts;
    opts.repair = repair || p.options.repair;
    opts.grid = p.options.grid;

    Stopwatch watch;
    dosage::Decision decision =
        dosage::as_if_decide(p.evidence, p.grid, p.welfare, p.cost, p.restrictions, mode, opts);
    watch.lap("decide");

    json result = std::holds_alternative<dosage::ClinicalDecision>(decision)
                      ? dosage::clinical_decision_json(std::get<dosage::ClinicalDecision>(decision))
                      : dosage::allocation_decision_json(
                            std::get<dosage::AllocationDecision>(decision));
    json diagnostics{{"repair", opts.repair}};
    emit(result_document("decide", std::move(result), std::move(diagnostics), g, &watch, &p.raw),
         g);
    return 0;
}

int cmd_simulate(const dosage::Problem& p, const std::string& mode_name, bool repair,
                 std::optional<int> replications, std::optional<std::uint64_t> seed,
                 const GlobalOptions& g) {
    if (!p.true_q) throw dosage::ArgumentError("simulate requires 'true_q' in the problem file");
    if (!p.design) throw dosage::ArgumentError("simulate requires 'design' in the problem file");
    const dosage::DecisionMode mode = (mode_name == "clinical")
                                          ? dosage::DecisionMode::Clinical
                                          : dosage::DecisionMode::Allocation;
    dosage::DecideOptions opts;
    opts.repair = repair || p.options.repair;
    opts.grid = p.options.grid;

    Stopwatch watch;
    dosage::RegretReport report = dosage::simulate_regret(
        *p.true_q, *p.design, p.welfare, p.cost, p.restrictions, mode,
        replications.value_or(p.options.replications), seed.value_or(p.options.seed), opts);
    watch.lap("simulate");

    emit(result_document("simulate", dosage::regret_report_json(report), json::object(), g,
                         &watch, &p.raw),
         g);
    return 0;
}

struct Check {
    std::string name;
    bool pass;
    json got;
    json want;
    double tol;
};

class CheckList {
public:
    void scalar(const std::string& name, double got, double want, double tol) {
        checks_.push_back({name, std::fabs(got - want) <= tol, got, want, tol});
    }

    void exact_int(const std::string& name, int got, int want) {
        checks_.push_back({name, got == want, got, want, 0.0});
    }

    void interval(const std::string& name, Interval got, Interval want, double tol) {
        const bool ok = std::fabs(got.lo - want.lo) <= tol && std::fabs(got.hi - want.hi) <= tol;
        checks_.push_back({name, ok, json::array({got.lo, got.hi}),
                           json::array({want.lo, want.hi}), tol});
    }

    void vector(const std::string& name, const std::vector<double>& got,
                const std::vector<double>& want, double tol) {
        bool ok = got.size() == want.size();
        for (std::size_t i = 0; ok && i < got.size(); ++i)
            ok = std::fabs(got[i] - want[i]) <= tol;
        checks_.push_back({name, ok, got, want, tol});
    }

    bool all_pass() const {
        for (const Check& c : checks_)
            if (!c.pass) return false;
        return true;
    }

    void print(std::ostream& out) const {
        for (const Check& c : checks_) {
            out << (c.pass ? "PASS " : "FAIL ") << c.name << "  got " << c.got.dump()
                << "  want " << c.want.dump();
            if (c.tol > 0.0) out << " +-" << c.tol;
            out << "\n";
        }
    }

    json to_json() const {
        json arr = json::array();
        for (const Check& c : checks_)
            arr.push_back(json{{"name", c.name},
                               {"pass", c.pass},
                               {"got", c.got},
                               {"want", c.want},
                               {"tolerance", c.tol}});
        return arr;
    }

private:
    std::vector<Check> checks_;
};

int cmd_illustrate(double perturb_welfare, const GlobalOptions& g) {
    namespace ill = dosage::illustration;
    const dosage::DoseGrid grid = ill::grid();
    dosage::WelfareSpec w = ill::welfare();
    w.values[0] += perturb_welfare;
    const dosage::ThresholdDistribution q = ill::threshold_distribution();
    const dosage::TrialEvidence evidence = ill::evidence();
    const dosage::CostSpec zero_cost = dosage::CostSpec::zero(grid);

    Stopwatch watch;
    CheckList checks;

    // Outcome probabilities at each dose from the known threshold distribution.
    const double table[3][4] = {{0.25, 0.75, 0.0, 0.0},
                                {0.333, 0.333, 0.167, 0.167},
                                {0.25, 0.083, 0.5, 0.167}};
    for (int t = 0; t <= 2; ++t) {
        const dosage::OutcomeDistribution p = dosage::push_forward(q, t);
        for (dosage::OutcomeCell cell : dosage::kOutcomeCells) {
            const int i = static_cast<int>(cell);
            checks.scalar("push_forward t=" + std::to_string(t) + " " + dosage::cell_name(cell),
                          p.at(cell), table[t][i], 0.001);
        }
    }

    // Expected welfare per dose (no cost).
    const double welfare_table[3] = {0.4375, 0.542, 0.6458};
    for (int t = 0; t <= 2; ++t)
        checks.scalar("welfare t=" + std::to_string(t),
                      dosage::expected_welfare(dosage::push_forward(q, t), w),
                      welfare_table[t], 0.001);
    watch.lap("push_forward");

    // Identification bounds at the untested dose t = 1.
    dosage::ConstraintSystem cs = dosage::build_constraints(evidence, {}, grid);
    const Interval cell_bounds[4] = {{0.0, 0.75}, {0.083, 0.75}, {0.0, 0.5}, {0.0, 0.67}};
    for (dosage::OutcomeCell cell : dosage::kOutcomeCells)
        checks.interval(std::string("bounds t=1 ") + dosage::cell_name(cell),
                        dosage::bound_outcome_prob(cs, 1, cell),
                        cell_bounds[static_cast<int>(cell)], 0.005);
    checks.interval("bounds t=1 net_welfare", dosage::bound_net_welfare(cs, 1, w, zero_cost),
                    {0.2708, 0.8125}, 0.001);
    watch.lap("bounds");

    // Decisions under the five cost settings.
    const std::vector<dosage::CostSpec> costs = ill::cost_scenarios();
    const std::vector<std::string> labels = ill::cost_labels();
    const int want_dose[5] = {2, 2, 2, 0, 1};
    const double want_clinical_value[5] = {0.167, 0.217, 0.267, 0.225, 0.167};
    const std::vector<std::vector<double>> want_alloc = {{0.0, 0.308, 0.692},
                                                         {0.0, 0.4, 0.6},
                                                         {0.0, 0.49, 0.51},
                                                         {0.59, 0.41, 0.0},
                                                         {0.308, 0.692, 0.0}};
    const double want_alloc_value[5] = {0.116, 0.13, 0.136, 0.132, 0.115};
    for (int s = 0; s < 5; ++s) {
        const dosage::CostSpec& cost = costs[static_cast<std::size_t>(s)];
        dosage::ClinicalDecision clin = dosage::clinical_mmr(cs, w, cost);
        checks.exact_int("clinical dose " + labels[s], clin.chosen_dose, want_dose[s]);
        checks.scalar("clinical value " + labels[s], clin.mmr_value, want_clinical_value[s],
                      0.001);
        dosage::AllocationDecision alloc = dosage::allocation_mmr_auto(cs, w, cost);
        checks.vector("allocation " + labels[s], alloc.allocation, want_alloc[s], 0.002);
        checks.scalar("allocation value " + labels[s], alloc.mmr_value, want_alloc_value[s],
                      0.002);
    }
    watch.lap("decisions");

    checks.print(std::cout);
    const bool ok = checks.all_pass();
    std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";

    json result{{"checks", checks.to_json()}, {"all_pass", ok}};
    json doc = result_document("illustrate", std::move(result), evidence_diagnostics(cs), g,
                               &watch);
    if (!g.output_path.empty()) {
        std::ofstream out(g.output_path);
        if (!out) throw dosage::ArgumentError("cannot write output file '" + g.output_path + "'");
        out << doc.dump(2) << "\n";
    }
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial-identification bounds and minimax-regret dose decisions "
                 "from K-armed trial evidence"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--output", global.output_path, "Write the result document to FILE");
    app.add_flag("--no-timings", global.no_timings, "Omit timings from diagnostics");

    std::string problem_path;
    std::string mode = "clinical";
    std::optional<int> dose;
    std::optional<int> replications;
    std::optional<std::uint64_t> seed;
    bool repair = false;
    double perturb_welfare = 0.0;

    CLI::App* check = app.add_subcommand("check", "Consistency of evidence with monotonicity");
    check->add_option("problem", problem_path, "Problem file (JSON)")->required();

    CLI::App* bounds = app.add_subcommand("bounds", "Sharp bounds per dose");
    bounds->add_option("problem", problem_path, "Problem file (JSON)")->required();
    bounds->add_option("--dose", dose, "Single dose (default: all doses)");

    CLI::App* decide = app.add_subcommand("decide", "Minimax-regret decision");
    decide->add_option("problem", problem_path, "Problem file (JSON)")->required();
    decide->add_option("--mode", mode, "clinical | allocate")
        ->check(CLI::IsMember({"clinical", "allocate"}));
    decide->add_flag("--repair", repair, "Project inconsistent evidence before deciding");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo regret of the as-if rule");
    simulate->add_option("problem", problem_path, "Problem file with true_q and design")
        ->required();
    simulate->add_option("--mode", mode, "clinical | allocate")
        ->check(CLI::IsMember({"clinical", "allocate"}));
    simulate->add_option("--replications", replications, "Replication count");
    simulate->add_option("--seed", seed, "Master RNG seed");
    simulate->add_flag("--repair", repair, "Project inconsistent draws before deciding");

    CLI::App* illustrate =
        app.add_subcommand("illustrate", "Run the built-in worked example end to end");
    illustrate->add_option("--perturb-welfare", perturb_welfare, "")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (illustrate->parsed()) return cmd_illustrate(perturb_welfare, global);
        dosage::Problem problem = dosage::load_problem_file(problem_path);
        if (check->parsed()) return cmd_check(problem, global);
        if (bounds->parsed()) return cmd_bounds(problem, dose, global);
        if (decide->parsed()) return cmd_decide(problem, mode, repair, global);
        if (simulate->parsed())
            return cmd_simulate(problem, mode, repair, replications, seed, global);
    } catch (const dosage::InconsistentEvidenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
        return 2;
    } catch (const dosage::RestrictionRefutedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
