#include "dosage/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dosage {

namespace {

void validate_probability_vector(std::vector<double>& v, bool renormalize,
                                 const char* what) {
    double sum = 0.0;
    for (double& x : v) {
        if (!std::isfinite(x)) throw ArgumentError(std::string(what) + ": non-finite entry");
        if (x < 0.0) {
            if (x < -kProbabilityTol)
                throw ArgumentError(std::string(what) + ": negative entry " + std::to_string(x));
            x = 0.0;  // tolerated rounding noise
        }
        sum += x;
    }
    if (renormalize) {
        if (sum <= 0.0) throw ArgumentError(std::string(what) + ": cannot renormalize zero mass");
        for (double& x : v) x /= sum;
    } else if (std::fabs(sum - 1.0) > kProbabilityTol) {
        throw ArgumentError(std::string(what) + ": entries sum to " + std::to_string(sum) +
                            ", expected 1 within 1e-9");
    }
}

}  // namespace

OutcomeCell make_outcome_cell(int disease, int adverse_effect) {
    if ((disease != 0 && disease != 1) || (adverse_effect != 0 && adverse_effect != 1))
        throw ArgumentError("OutcomeCell: d and e must be 0 or 1");
    static constexpr OutcomeCell table[2][2] = {
        {OutcomeCell::NoDiseaseNoAe, OutcomeCell::NoDiseaseAe},
        {OutcomeCell::DiseaseNoAe, OutcomeCell::DiseaseAe},
    };
    return table[disease][adverse_effect];
}

int disease_of(OutcomeCell cell) {
    return (cell == OutcomeCell::DiseaseNoAe || cell == OutcomeCell::DiseaseAe) ? 1 : 0;
}

int ae_of(OutcomeCell cell) {
    return (cell == OutcomeCell::NoDiseaseAe || cell == OutcomeCell::DiseaseAe) ? 1 : 0;
}

const char* cell_name(OutcomeCell cell) {
    switch (cell) {
        case OutcomeCell::NoDiseaseNoAe: return "d0e0";
        case OutcomeCell::DiseaseNoAe: return "d1e0";
        case OutcomeCell::NoDiseaseAe: return "d0e1";
        case OutcomeCell::DiseaseAe: return "d1e1";
    }
    return "?";
}

ThresholdDistribution::ThresholdDistribution(DoseGrid grid, std::vector<double> mass,
                                             bool renormalize)
    : grid_(grid), mass_(std::move(mass)) {
    const std::size_t n = static_cast<std::size_t>(grid_.threshold_count());
    if (mass_.size() != n * n)
        throw ArgumentError("ThresholdDistribution: mass must be (T+2)^2 entries");
    validate_probability_vector(mass_, renormalize, "ThresholdDistribution");
}

ThresholdDistribution ThresholdDistribution::point_mass(DoseGrid grid, int t_d, int t_e) {
    if (!grid.valid_threshold(t_d) || !grid.valid_threshold(t_e))
        throw ArgumentError("point_mass: threshold out of range");
    const int n = grid.threshold_count();
    std::vector<double> mass(static_cast<std::size_t>(n) * n, 0.0);
    mass[static_cast<std::size_t>(t_d) * n + t_e] = 1.0;
    return ThresholdDistribution(grid, std::move(mass));
}

double ThresholdDistribution::at(int t_d, int t_e) const {
    if (!grid_.valid_threshold(t_d) || !grid_.valid_threshold(t_e))
        throw ArgumentError("ThresholdDistribution::at: index out of range");
    return mass_[static_cast<std::size_t>(t_d) * grid_.threshold_count() + t_e];
}

OutcomeDistribution::OutcomeDistribution(std::array<double, 4> p, bool renormalize)
    : p_(p) {
    std::vector<double> v(p_.begin(), p_.end());
    validate_probability_vector(v, renormalize, "OutcomeDistribution");
    std::copy(v.begin(), v.end(), p_.begin());
}

bool WelfareSpec::realistic() const {
    const double w00 = at(OutcomeCell::NoDiseaseNoAe);
    const double w10 = at(OutcomeCell::DiseaseNoAe);
    const double w01 = at(OutcomeCell::NoDiseaseAe);
    const double w11 = at(OutcomeCell::DiseaseAe);
    return w00 > std::max(w01, w10) && std::min(w01, w10) > w11;
}

CostSpec::CostSpec(const DoseGrid& grid, std::vector<double> values)
    : values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid.dose_count())
        throw ArgumentError("CostSpec: expected T+1 values");
    for (double v : values_)
        if (!std::isfinite(v)) throw ArgumentError("CostSpec: non-finite cost");
}

CostSpec CostSpec::zero(const DoseGrid& grid) {
    return CostSpec(grid, std::vector<double>(grid.dose_count(), 0.0));
}

CostSpec CostSpec::linear(const DoseGrid& grid, double slope) {
    std::vector<double> v(grid.dose_count());
    for (int t = 0; t < grid.dose_count(); ++t) v[t] = slope * t;
    return CostSpec(grid, std::move(v));
}

double CostSpec::at(int t) const {
    if (t < 0 || t >= static_cast<int>(values_.size()))
        throw ArgumentError("CostSpec::at: dose out of range");
    return values_[t];
}

bool CostSpec::nonnegative_increasing() const {
    double prev = 0.0;
    for (double v : values_) {
        if (v < 0.0 || v < prev) return false;
        prev = v;
    }
    return true;
}

TrialEvidence::TrialEvidence(std::vector<TrialArm> arms, const DoseGrid& grid)
    : arms_(std::move(arms)) {
    if (arms_.empty()) throw ArgumentError("TrialEvidence: at least one arm required");
    if (static_cast<int>(arms_.size()) > grid.dose_count())
        throw ArgumentError("TrialEvidence: more arms than feasible doses");
    int prev = -1;
    for (const TrialArm& arm : arms_) {
        if (!grid.valid_dose(arm.dose))
            throw ArgumentError("TrialEvidence: arm dose " + std::to_string(arm.dose) +
                                " outside 0.." + std::to_string(grid.max_dose()));
        if (arm.dose <= prev)
            throw ArgumentError("TrialEvidence: arm doses must be strictly increasing");
        if (arm.sample_size && *arm.sample_size <= 0)
            throw ArgumentError("TrialEvidence: non-positive sample size");
        prev = arm.dose;
    }
}

const TrialArm* TrialEvidence::arm_at_dose(int dose) const {
    for (const TrialArm& arm : arms_)
        if (arm.dose == dose) return &arm;
    return nullptr;
}

OutcomeCell outcome_of(const DoseGrid& grid, int t, int t_d, int t_e) {
    if (!grid.valid_dose(t)) throw ArgumentError("outcome_of: dose out of range");
    if (!grid.valid_threshold(t_d) || !grid.valid_threshold(t_e))
        throw ArgumentError("outcome_of: threshold out of range");
    const int d = (t < t_d) ? 1 : 0;
    const int e = (t >= t_e) ? 1 : 0;
    return make_outcome_cell(d, e);
}

OutcomeDistribution push_forward(const ThresholdDistribution& q, int t) {
    const DoseGrid& grid = q.grid();
    if (!grid.valid_dose(t)) throw ArgumentError("push_forward: dose out of range");
    std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};
    const int n = grid.threshold_count();
    for (int h = 0; h < n; ++h)
        for (int i = 0; i < n; ++i)
            p[static_cast<int>(outcome_of(grid, t, h, i))] += q.at(h, i);
    return OutcomeDistribution(p, /*renormalize=*/false);
}

double expected_welfare(const OutcomeDistribution& p, const WelfareSpec& w) {
    double total = 0.0;
    for (OutcomeCell cell : kOutcomeCells) total += w.at(cell) * p.at(cell);
    return total;
}

WelfareCoefficients net_welfare_coefficients(const DoseGrid& grid, int t,
                                             const WelfareSpec& w, const CostSpec& g) {
    if (!grid.valid_dose(t))
        throw ArgumentError("net_welfare_coefficients: dose out of range");
    const int n = grid.threshold_count();
    WelfareCoefficients out;
    out.cell.resize(static_cast<std::size_t>(n) * n);
    for (int h = 0; h < n; ++h)
        for (int i = 0; i < n; ++i)
            out.cell[static_cast<std::size_t>(h) * n + i] = w.at(outcome_of(grid, t, h, i));
    out.offset = -g.at(t);
    return out;
}

double contract(const WelfareCoefficients& c, const ThresholdDistribution& q) {
    const std::vector<double>& mass = q.mass();
    if (c.cell.size() != mass.size())
        throw ArgumentError("contract: coefficient/mass size mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) total += c.cell[k] * mass[k];
    return total + c.offset;
}

double net_welfare(const ThresholdDistribution& q, int t, const WelfareSpec& w,
                   const CostSpec& g) {
    return expected_welfare(push_forward(q, t), w) - g.at(t);
}

}  // namespace dosage
