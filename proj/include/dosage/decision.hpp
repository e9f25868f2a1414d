#pragma once

#include <cstdint>
#include <vector>

#include "dosage/identification.hpp"

namespace dosage {

// Fractional assignment of a population over doses 0..T (point on the simplex).
class Allocation {
public:
    Allocation(const DoseGrid& grid, std::vector<double> shares);

    static Allocation degenerate(const DoseGrid& grid, int dose);

    const std::vector<double>& shares() const { return shares_; }
    double at(int t) const { return shares_.at(static_cast<std::size_t>(t)); }

private:
    std::vector<double> shares_;
};

struct ClinicalDecision {
    int chosen_dose = 0;
    double mmr_value = 0.0;
    std::vector<double> per_dose_max_regret;  // clamped at zero
    // Raw pairwise LP values max_q[omega_d - omega_c], row-major (c, d),
    // diagonal zero; kept unclamped for diagnostics.
    std::vector<double> per_pair_worst_case;
};

enum class AllocationMethod { AnalyticalT2, Grid };

struct AllocationDecision {
    std::vector<double> allocation;  // T+1 shares
    double mmr_value = 0.0;
    double grid_step = 0.0;          // 0 when analytical
    AllocationMethod method = AllocationMethod::Grid;
};

// max over q in Q of [omega_d(q) - omega_c(q)]; exactly 0 when c == d.
double pairwise_worst_case(const ConstraintSystem& cs, int c, int d,
                           const WelfareSpec& w, const CostSpec& g);

// Minimax-regret single-dose choice; ties broken toward the lowest dose.
ClinicalDecision clinical_mmr(const ConstraintSystem& cs, const WelfareSpec& w,
                              const CostSpec& g);

// Planner's maximum regret of a fixed allocation: max over pure doses d of
// the LP max of [omega_d(q) - sum_t delta(t) omega_t(q)], clamped at zero.
// Maximizing over pure doses is exact because the inner best response is
// linear in the allocation and so attained at a simplex vertex.
double allocation_worst_case_regret(const ConstraintSystem& cs, const Allocation& delta,
                                    const WelfareSpec& w, const CostSpec& g);

struct GridOptions {
    int resolution = 100;                   // allocations in multiples of 1/resolution
    std::uint64_t max_points = 5'000'000;   // enumeration budget
    bool coarse_to_fine = false;            // M=20 pass, then refine near incumbent
};

// Grid search over allocations with entries in multiples of 1/resolution.
// Ties broken by the lexicographically smallest allocation vector. The value
// is within (welfare range)/resolution of the simplex optimum.
AllocationDecision allocation_mmr_grid(const ConstraintSystem& cs, const WelfareSpec& w,
                                       const CostSpec& g, const GridOptions& options = {});

// Closed-form T=2 allocation when omega_0 and omega_2 are point-identified
// and omega_1 is an interval. When omega_0 == omega_2 exactly, the remainder
// goes to dose 0 (convention; any split is minimax-regret optimal).
AllocationDecision allocation_mmr_t2(double omega0, double omega2, Interval omega1);

// Dispatch: analytical rule when T = 2 and the endpoint doses are
// point-identified, otherwise the grid.
AllocationDecision allocation_mmr_auto(const ConstraintSystem& cs, const WelfareSpec& w,
                                       const CostSpec& g, const GridOptions& options = {});

}  // namespace dosage
