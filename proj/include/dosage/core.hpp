#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dosage/errors.hpp"

namespace dosage {

inline constexpr double kProbabilityTol = 1e-9;

// Integer dose grid 0..T; threshold support is 0..T+1 where T+1 means the
// event never occurs at any feasible dose.
class DoseGrid {
public:
    explicit DoseGrid(int max_dose) : max_dose_(max_dose) {
        if (max_dose < 1) throw ArgumentError("DoseGrid: max dose must be >= 1");
    }

    int max_dose() const { return max_dose_; }
    int dose_count() const { return max_dose_ + 1; }
    // Threshold values live in 0..T+1.
    int threshold_count() const { return max_dose_ + 2; }
    int never() const { return max_dose_ + 1; }

    bool valid_dose(int t) const { return t >= 0 && t <= max_dose_; }
    bool valid_threshold(int v) const { return v >= 0 && v <= max_dose_ + 1; }

    friend bool operator==(const DoseGrid&, const DoseGrid&) = default;

private:
    int max_dose_;
};

// The four (disease, adverse effect) outcomes, in the fixed order
// (0,0), (1,0), (0,1), (1,1) used by every array and serialized output.
enum class OutcomeCell : int {
    NoDiseaseNoAe = 0,
    DiseaseNoAe = 1,
    NoDiseaseAe = 2,
    DiseaseAe = 3,
};

inline constexpr std::array<OutcomeCell, 4> kOutcomeCells = {
    OutcomeCell::NoDiseaseNoAe,
    OutcomeCell::DiseaseNoAe,
    OutcomeCell::NoDiseaseAe,
    OutcomeCell::DiseaseAe,
};

OutcomeCell make_outcome_cell(int disease, int adverse_effect);
int disease_of(OutcomeCell cell);
int ae_of(OutcomeCell cell);
const char* cell_name(OutcomeCell cell);  // "d0e0" etc.

// Joint probability mass q(t_d, t_e) over threshold pairs, stored row-major
// as a (T+2)x(T+2) array indexed (t_d, t_e).
class ThresholdDistribution {
public:
    ThresholdDistribution(DoseGrid grid, std::vector<double> mass,
                          bool renormalize = false);

    static ThresholdDistribution point_mass(DoseGrid grid, int t_d, int t_e);

    const DoseGrid& grid() const { return grid_; }
    double at(int t_d, int t_e) const;
    double operator()(int t_d, int t_e) const { return at(t_d, t_e); }
    const std::vector<double>& mass() const { return mass_; }

private:
    DoseGrid grid_;
    std::vector<double> mass_;
};

// Distribution over the four outcome cells at a single dose.
class OutcomeDistribution {
public:
    explicit OutcomeDistribution(std::array<double, 4> p, bool renormalize = false);

    double at(OutcomeCell cell) const { return p_[static_cast<int>(cell)]; }
    double operator[](OutcomeCell cell) const { return at(cell); }
    const std::array<double, 4>& probabilities() const { return p_; }

    double p_disease() const {
        return at(OutcomeCell::DiseaseNoAe) + at(OutcomeCell::DiseaseAe);
    }
    double p_ae() const {
        return at(OutcomeCell::NoDiseaseAe) + at(OutcomeCell::DiseaseAe);
    }

private:
    std::array<double, 4> p_;
};

// Outcome-contingent expected welfare E[w(d, e)] in cell order.
struct WelfareSpec {
    std::array<double, 4> values;

    double at(OutcomeCell cell) const { return values[static_cast<int>(cell)]; }
    double operator[](OutcomeCell cell) const { return at(cell); }

    // The realistic regime: no disease / no AE is best, both is worst.
    // Not required by the analysis; enforced only on explicit request.
    bool realistic() const;
};

// Dose-dependent expected cost E[g(t)], t = 0..T, in welfare units.
class CostSpec {
public:
    CostSpec(const DoseGrid& grid, std::vector<double> values);

    static CostSpec zero(const DoseGrid& grid);
    static CostSpec linear(const DoseGrid& grid, double slope);

    double at(int t) const;
    double operator[](int t) const { return at(t); }
    const std::vector<double>& values() const { return values_; }

    // True when costs are non-negative and weakly increasing.
    bool nonnegative_increasing() const;

private:
    std::vector<double> values_;
};

struct TrialArm {
    int dose;
    OutcomeDistribution outcomes;
    std::optional<std::int64_t> sample_size;
};

// K-armed trial evidence: strictly increasing doses, each with an observed
// (or estimated) joint outcome distribution.
class TrialEvidence {
public:
    TrialEvidence(std::vector<TrialArm> arms, const DoseGrid& grid);

    const std::vector<TrialArm>& arms() const { return arms_; }
    std::size_t arm_count() const { return arms_.size(); }
    const TrialArm* arm_at_dose(int dose) const;

private:
    std::vector<TrialArm> arms_;
};

// Outcome realized at dose t by a patient with thresholds (t_d, t_e):
// disease iff t < t_d, adverse effect iff t >= t_e.
OutcomeCell outcome_of(const DoseGrid& grid, int t, int t_d, int t_e);

// Outcome distribution at dose t induced by the threshold distribution q
// (the four quadrant sums of q around (t, t)).
OutcomeDistribution push_forward(const ThresholdDistribution& q, int t);

// Expected welfare, the cell-wise contraction of p with w (cost excluded).
double expected_welfare(const OutcomeDistribution& p, const WelfareSpec& w);

// Linear representation of net welfare at dose t: omega_t(q) equals the
// contraction of `cell` with q plus `offset` (= -g(t)), for every q.
struct WelfareCoefficients {
    std::vector<double> cell;  // (T+2)^2 row-major, entry (h,i) = w(outcome_of(t,h,i))
    double offset;
};

WelfareCoefficients net_welfare_coefficients(const DoseGrid& grid, int t,
                                             const WelfareSpec& w, const CostSpec& g);

double contract(const WelfareCoefficients& c, const ThresholdDistribution& q);

// Net welfare omega_t(q) = expected_welfare(push_forward(q,t), w) - g(t).
double net_welfare(const ThresholdDistribution& q, int t, const WelfareSpec& w,
                   const CostSpec& g);

}  // namespace dosage
