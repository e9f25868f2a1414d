#include "dosage/problem.hpp"

#include <cstdio>
#include <fstream>

namespace dosage {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("problem file: missing '") + key + "'");
    return *it;
}

std::array<double, 4> parse_cell_array(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError(std::string(what) + " must be an array of 4 values in cell "
                                             "order (0,0),(1,0),(0,1),(1,1)");
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number()) throw ParseError(std::string(what) + ": non-numeric entry");
        out[i] = j[i].get<double>();
    }
    return out;
}

TrialArm parse_arm(const json& j, const DoseGrid&, bool renormalize) {
    if (!j.is_object() || !j.contains("dose"))
        throw ParseError("each arm needs a 'dose' and either 'probabilities' or 'counts'");
    const int dose = j.at("dose").get<int>();
    const bool has_p = j.contains("probabilities");
    const bool has_c = j.contains("counts");
    if (has_p == has_c)
        throw ParseError("arm at dose " + std::to_string(dose) +
                         ": exactly one of 'probabilities' or 'counts' is required");

    if (has_p) {
        std::array<double, 4> p = parse_cell_array(j.at("probabilities"), "arm probabilities");
        std::optional<std::int64_t> n;
        if (j.contains("sample_size")) n = j.at("sample_size").get<std::int64_t>();
        try {
            return TrialArm{dose, OutcomeDistribution(p, renormalize), n};
        } catch (const ArgumentError& e) {
            throw ParseError("arm at dose " + std::to_string(dose) + ": " + e.what());
        }
    }

    const json& counts = j.at("counts");
    if (!counts.is_array() || counts.size() != 4)
        throw ParseError("arm counts must be an array of 4 non-negative integers");
    std::array<double, 4> p{};
    std::int64_t total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!counts[i].is_number_integer() || counts[i].get<std::int64_t>() < 0)
            throw ParseError("arm counts must be non-negative integers");
        total += counts[i].get<std::int64_t>();
    }
    if (total == 0)
        throw ParseError("arm at dose " + std::to_string(dose) + ": zero total count");
    for (std::size_t i = 0; i < 4; ++i)
        p[i] = static_cast<double>(counts[i].get<std::int64_t>()) /
               static_cast<double>(total);
    return TrialArm{dose, OutcomeDistribution(p), total};
}

CostSpec parse_cost(const json& j, const DoseGrid& grid) {
    if (j.is_array()) {
        std::vector<double> v = j.get<std::vector<double>>();
        return CostSpec(grid, std::move(v));
    }
    if (!j.is_object() || !j.contains("form"))
        throw ParseError("cost must be a vector or an object with a 'form'");
    const std::string form = j.at("form").get<std::string>();
    if (form == "zero") return CostSpec::zero(grid);
    if (form == "linear") return CostSpec::linear(grid, require(j, "slope").get<double>());
    if (form == "vector")
        return CostSpec(grid, require(j, "values").get<std::vector<double>>());
    throw ParseError("unknown cost form '" + form + "' (expected zero|linear|vector)");
}

Restrictions parse_restrictions(const json& doc) {
    Restrictions r;
    if (!doc.contains("restrictions")) return r;
    for (const auto& item : doc.at("restrictions")) {
        const std::string name = item.get<std::string>();
        if (name == "no_ae_at_zero")
            r.no_ae_at_zero = true;
        else if (name == "concurrent_thresholds")
            r.concurrent_thresholds = true;
        else if (name == "independence")
            r.independence = true;
        else
            throw ParseError("unknown restriction '" + name + "'");
    }
    if (r.independence && r.concurrent_thresholds)
        throw ParseError("restrictions 'independence' and 'concurrent_thresholds' "
                         "are contradictory");
    return r;
}

ProblemOptions parse_options(const json& doc) {
    ProblemOptions o;
    if (!doc.contains("options")) return o;
    const json& j = doc.at("options");
    if (j.contains("grid_resolution")) o.grid.resolution = j.at("grid_resolution").get<int>();
    if (j.contains("max_grid_points"))
        o.grid.max_points = j.at("max_grid_points").get<std::uint64_t>();
    if (j.contains("coarse_to_fine")) o.grid.coarse_to_fine = j.at("coarse_to_fine").get<bool>();
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replications")) o.replications = j.at("replications").get<int>();
    if (j.contains("renormalize")) o.renormalize = j.at("renormalize").get<bool>();
    if (j.contains("strict")) o.strict = j.at("strict").get<bool>();
    if (j.contains("repair")) o.repair = j.at("repair").get<bool>();
    return o;
}

}  // namespace

Problem parse_problem(const json& doc) {
    if (!doc.is_object()) throw ParseError("problem file must be a JSON object");
    if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != kSchemaVersion)
        throw ParseError("unsupported schema_version");

    int max_dose = 0;
    try {
        max_dose = require(doc, "T").get<int>();
    } catch (const json::exception&) {
        throw ParseError("'T' must be an integer");
    }
    if (max_dose < 1) throw ParseError("'T' must be >= 1");
    DoseGrid grid(max_dose);

    ProblemOptions options = parse_options(doc);

    const json& arms_json = require(doc, "arms");
    if (!arms_json.is_array() || arms_json.empty())
        throw ParseError("'arms' must be a non-empty array");
    std::vector<TrialArm> arms;
    for (const auto& a : arms_json) arms.push_back(parse_arm(a, grid, options.renormalize));
    TrialEvidence evidence = [&] {
        try {
            return TrialEvidence(std::move(arms), grid);
        } catch (const ArgumentError& e) {
            throw ParseError(std::string("arms: ") + e.what());
        }
    }();

    WelfareSpec welfare{parse_cell_array(require(doc, "welfare"), "welfare")};
    CostSpec cost = parse_cost(require(doc, "cost"), grid);
    Restrictions restrictions = parse_restrictions(doc);

    if (options.strict) {
        if (!welfare.realistic())
            throw ParseError("strict mode: welfare must satisfy "
                             "w(0,0) > max[w(0,1), w(1,0)] and min[w(0,1), w(1,0)] > w(1,1)");
        if (!cost.nonnegative_increasing())
            throw ParseError("strict mode: cost must be non-negative and weakly increasing");
    }

    std::optional<ThresholdDistribution> true_q;
    if (doc.contains("true_q")) {
        const json& qj = doc.at("true_q");
        const int n = grid.threshold_count();
        if (!qj.is_array() || static_cast<int>(qj.size()) != n)
            throw ParseError("'true_q' must be a (T+2)x(T+2) matrix");
        std::vector<double> mass;
        mass.reserve(static_cast<std::size_t>(n) * n);
        for (const auto& row : qj) {
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw ParseError("'true_q' must be a (T+2)x(T+2) matrix");
            for (const auto& v : row) mass.push_back(v.get<double>());
        }
        try {
            true_q.emplace(grid, std::move(mass), options.renormalize);
        } catch (const ArgumentError& e) {
            throw ParseError(std::string("true_q: ") + e.what());
        }
    }

    std::optional<TrialDesign> design;
    if (doc.contains("design")) {
        const json& dj = doc.at("design");
        TrialDesign d;
        d.doses = require(dj, "doses").get<std::vector<int>>();
        d.sizes = require(dj, "sizes").get<std::vector<std::int64_t>>();
        design = std::move(d);
    }

    return Problem{grid,   std::move(evidence), welfare, cost,
                   restrictions, options,       std::move(true_q), std::move(design), doc};
}

Problem load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("problem file '" + path + "': " + e.what());
    }
    return parse_problem(doc);
}

std::string format_probability(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string format_regret(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

json interval_json(const Interval& iv, bool regret_style) {
    auto fmt = regret_style ? format_regret : format_probability;
    return json{{"lo", iv.lo},
                {"hi", iv.hi},
                {"display", json::array({fmt(iv.lo), fmt(iv.hi)})}};
}

json clinical_decision_json(const ClinicalDecision& d) {
    json pairs = json::array();
    const std::size_t doses = d.per_dose_max_regret.size();
    for (std::size_t c = 0; c < doses; ++c) {
        json row = json::array();
        for (std::size_t t = 0; t < doses; ++t)
            row.push_back(d.per_pair_worst_case[c * doses + t]);
        pairs.push_back(row);
    }
    return json{{"mode", "clinical"},
                {"chosen_dose", d.chosen_dose},
                {"mmr_value", d.mmr_value},
                {"mmr_value_display", format_regret(d.mmr_value)},
                {"per_dose_max_regret", d.per_dose_max_regret},
                {"per_pair_worst_case", pairs}};
}

json allocation_decision_json(const AllocationDecision& d) {
    json display = json::array();
    for (double s : d.allocation) display.push_back(format_probability(s));
    return json{{"mode", "allocation"},
                {"allocation", d.allocation},
                {"allocation_display", display},
                {"mmr_value", d.mmr_value},
                {"mmr_value_display", format_regret(d.mmr_value)},
                {"grid_step", d.grid_step},
                {"method",
                 d.method == AllocationMethod::AnalyticalT2 ? "analytical_t2" : "grid"}};
}

json regret_report_json(const RegretReport& r) {
    json freq = json::object();
    for (const auto& [key, share] : r.decision_frequency) freq[key] = share;
    return json{{"replications", r.replications},
                {"seed", r.seed},
                {"regrets", r.regrets},
                {"inconsistent_replications", r.inconsistent_count},
                {"summary",
                 json{{"mean", r.mean},
                      {"max", r.max},
                      {"q50", r.q50},
                      {"q90", r.q90},
                      {"q99", r.q99}}},
                {"decision_frequency", freq}};
}

}  // namespace dosage
