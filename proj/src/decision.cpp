#include "dosage/decision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace dosage {

namespace {

constexpr double kRegretSlack = 1e-9;

// C(m + t, t) with saturation, the number of compositions of m into t+1 parts.
std::uint64_t composition_count(int m, int t) {
    long double v = 1.0L;
    for (int i = 1; i <= t; ++i) v *= static_cast<long double>(m + i) / i;
    if (v > 1e18L) return UINT64_MAX;
    return static_cast<std::uint64_t>(v + 0.5L);
}

struct RegretEvaluator {
    const ConstraintSystem& cs;
    std::vector<WelfareCoefficients> coeffs;  // per dose
    std::vector<double> scratch;

    RegretEvaluator(const ConstraintSystem& cs_, const WelfareSpec& w, const CostSpec& g)
        : cs(cs_) {
        const int doses = cs.grid().dose_count();
        coeffs.reserve(doses);
        for (int t = 0; t < doses; ++t)
            coeffs.push_back(net_welfare_coefficients(cs.grid(), t, w, g));
        scratch.resize(coeffs[0].cell.size());
    }

    // max_q [omega_d(q) - sum_t delta(t) omega_t(q)] for one pure dose d.
    double versus_dose(const std::vector<double>& delta, int d) {
        const std::size_t n = scratch.size();
        double offset = coeffs[d].offset;
        for (std::size_t k = 0; k < n; ++k) scratch[k] = coeffs[d].cell[k];
        for (std::size_t t = 0; t < delta.size(); ++t) {
            const double share = delta[t];
            if (share == 0.0) continue;
            const double* ct = coeffs[t].cell.data();
            for (std::size_t k = 0; k < n; ++k) scratch[k] -= share * ct[k];
            offset -= share * coeffs[t].offset;
        }
        return cs.maximizer().maximize(scratch) + offset;
    }

    // Worst-case regret of an allocation, with early exit once the partial
    // maximum already exceeds `prune_above`.
    double worst_case(const std::vector<double>& delta,
                      double prune_above = std::numeric_limits<double>::infinity()) {
        double worst = 0.0;
        for (int d = 0; d < static_cast<int>(coeffs.size()); ++d) {
            if (delta[d] == 1.0) continue;  // identical objective, maximum is 0
            worst = std::max(worst, versus_dose(delta, d));
            if (worst > prune_above) break;
        }
        return std::max(worst, 0.0);
    }
};

void require_feasible(const ConstraintSystem& cs) {
    if (!cs.feasible())
        throw InconsistentEvidenceError(
            "decision: constraint system is infeasible; evidence is inconsistent "
            "with monotone dose response");
}

}  // namespace

Allocation::Allocation(const DoseGrid& grid, std::vector<double> shares)
    : shares_(std::move(shares)) {
    if (static_cast<int>(shares_.size()) != grid.dose_count())
        throw ArgumentError("Allocation: expected T+1 shares");
    double sum = 0.0;
    for (double& s : shares_) {
        if (!std::isfinite(s)) throw ArgumentError("Allocation: non-finite share");
        if (s < 0.0) {
            if (s < -kProbabilityTol) throw ArgumentError("Allocation: negative share");
            s = 0.0;
        }
        sum += s;
    }
    if (std::fabs(sum - 1.0) > kProbabilityTol)
        throw ArgumentError("Allocation: shares sum to " + std::to_string(sum));
}

Allocation Allocation::degenerate(const DoseGrid& grid, int dose) {
    if (!grid.valid_dose(dose)) throw ArgumentError("Allocation: dose out of range");
    std::vector<double> s(grid.dose_count(), 0.0);
    s[dose] = 1.0;
    return Allocation(grid, std::move(s));
}

double pairwise_worst_case(const ConstraintSystem& cs, int c, int d,
                           const WelfareSpec& w, const CostSpec& g) {
    require_feasible(cs);
    const DoseGrid& grid = cs.grid();
    if (!grid.valid_dose(c) || !grid.valid_dose(d))
        throw ArgumentError("pairwise_worst_case: dose out of range");
    if (c == d) return 0.0;

    const WelfareCoefficients cc = net_welfare_coefficients(grid, c, w, g);
    const WelfareCoefficients cd = net_welfare_coefficients(grid, d, w, g);
    std::vector<double> obj(cc.cell.size());
    for (std::size_t k = 0; k < obj.size(); ++k) obj[k] = cd.cell[k] - cc.cell[k];
    return cs.maximizer().maximize(obj) + (cd.offset - cc.offset);
}

ClinicalDecision clinical_mmr(const ConstraintSystem& cs, const WelfareSpec& w,
                              const CostSpec& g) {
    require_feasible(cs);
    const int doses = cs.grid().dose_count();

    ClinicalDecision out;
    out.per_pair_worst_case.assign(static_cast<std::size_t>(doses) * doses, 0.0);
    out.per_dose_max_regret.assign(doses, 0.0);

    for (int c = 0; c < doses; ++c) {
        double worst = -std::numeric_limits<double>::infinity();
        for (int d = 0; d < doses; ++d) {
            if (d == c) continue;
            const double v = pairwise_worst_case(cs, c, d, w, g);
            out.per_pair_worst_case[static_cast<std::size_t>(c) * doses + d] = v;
            worst = std::max(worst, v);
        }
        out.per_dose_max_regret[c] = std::max(worst, 0.0);
    }

    out.chosen_dose = 0;
    for (int c = 1; c < doses; ++c) {
        if (out.per_dose_max_regret[c] < out.per_dose_max_regret[out.chosen_dose] - 0.0)
            out.chosen_dose = c;  // strict improvement only: lowest dose wins ties
    }
    out.mmr_value = out.per_dose_max_regret[out.chosen_dose];
    return out;
}

double allocation_worst_case_regret(const ConstraintSystem& cs, const Allocation& delta,
                                    const WelfareSpec& w, const CostSpec& g) {
    require_feasible(cs);
    if (static_cast<int>(delta.shares().size()) != cs.grid().dose_count())
        throw ArgumentError("allocation_worst_case_regret: allocation size mismatch");
    RegretEvaluator eval(cs, w, g);
    double worst = 0.0;
    for (int d = 0; d < cs.grid().dose_count(); ++d)
        worst = std::max(worst, eval.versus_dose(delta.shares(), d));
    return std::max(worst, 0.0);
}

AllocationDecision allocation_mmr_grid(const ConstraintSystem& cs, const WelfareSpec& w,
                                       const CostSpec& g, const GridOptions& options) {
    require_feasible(cs);
    if (options.resolution < 1)
        throw ArgumentError("allocation_mmr_grid: resolution must be >= 1");

    const int parts = cs.grid().dose_count();
    const int coarse_m = 20;

    RegretEvaluator eval(cs, w, g);

    // Enumerates compositions of `m` into `parts` entries, in lexicographic
    // order of the allocation vector, restricted to per-part [lo, hi] counts.
    // Keeps the first strict improvement, so ties resolve to the
    // lexicographically smallest allocation.
    auto search = [&](int m, const std::vector<int>& lo, const std::vector<int>& hi,
                      std::vector<double>* best_delta, double* best_value) {
        std::vector<int> counts(parts, 0);
        std::vector<double> delta(parts, 0.0);
        std::function<void(int, int)> recurse = [&](int idx, int remaining) {
            if (idx == parts - 1) {
                if (remaining < lo[idx] || remaining > hi[idx]) return;
                counts[idx] = remaining;
                for (int t = 0; t < parts; ++t)
                    delta[t] = static_cast<double>(counts[t]) / m;
                const double v = eval.worst_case(delta, *best_value);
                if (v < *best_value - 0.0) {  // strict improvement
                    *best_value = v;
                    *best_delta = delta;
                }
                return;
            }
            const int max_here = std::min(hi[idx], remaining);
            for (int k = lo[idx]; k <= max_here; ++k) {
                counts[idx] = k;
                recurse(idx + 1, remaining - k);
            }
        };
        recurse(0, m);
    };

    std::vector<double> best_delta;
    double best_value = std::numeric_limits<double>::infinity();
    int final_m = options.resolution;

    if (options.coarse_to_fine && options.resolution > coarse_m) {
        std::vector<int> lo(parts, 0), hi(parts, coarse_m);
        if (composition_count(coarse_m, parts - 1) > options.max_points)
            throw BudgetError("allocation grid: coarse pass exceeds the point budget");
        search(coarse_m, lo, hi, &best_delta, &best_value);

        // Refine inside a +-2/coarse_m box around the incumbent.
        const int m = options.resolution;
        const double halo = 2.0 / coarse_m;
        std::vector<int> flo(parts), fhi(parts);
        std::uint64_t box = 1;
        for (int t = 0; t < parts; ++t) {
            flo[t] = std::max(0, static_cast<int>(std::ceil((best_delta[t] - halo) * m - 1e-9)));
            fhi[t] = std::min(m, static_cast<int>(std::floor((best_delta[t] + halo) * m + 1e-9)));
            box *= static_cast<std::uint64_t>(fhi[t] - flo[t] + 1);
        }
        if (box > options.max_points)
            throw BudgetError("allocation grid: refinement box exceeds the point budget; "
                              "use a smaller resolution");
        best_value = std::numeric_limits<double>::infinity();
        best_delta.clear();
        search(m, flo, fhi, &best_delta, &best_value);
    } else {
        const int m = options.resolution;
        if (composition_count(m, parts - 1) > options.max_points)
            throw BudgetError(
                "allocation grid: " + std::to_string(composition_count(m, parts - 1)) +
                " grid points exceed the budget of " + std::to_string(options.max_points) +
                "; lower the resolution or enable coarse-to-fine refinement");
        std::vector<int> lo(parts, 0), hi(parts, m);
        search(m, lo, hi, &best_delta, &best_value);
    }

    AllocationDecision out;
    out.allocation = std::move(best_delta);
    out.mmr_value = best_value;
    out.grid_step = 1.0 / final_m;
    out.method = AllocationMethod::Grid;
    return out;
}

AllocationDecision allocation_mmr_t2(double omega0, double omega2, Interval omega1) {
    if (!std::isfinite(omega0) || !std::isfinite(omega2) || !std::isfinite(omega1.lo) ||
        !std::isfinite(omega1.hi) || omega1.lo > omega1.hi + kRegretSlack)
        throw ArgumentError("allocation_mmr_t2: invalid inputs");

    const double omega_max = std::max(omega0, omega2);
    // Remainder goes to dose 0 on an exact tie.
    const int best_endpoint = (omega2 > omega0) ? 2 : 0;

    std::vector<double> delta(3, 0.0);
    if (omega1.lo >= omega_max) {
        delta[1] = 1.0;  // dose 1 dominates: no ambiguity
    } else if (omega1.hi <= omega_max) {
        delta[best_endpoint] = 1.0;  // dose 1 dominated
    } else {
        const double range = omega1.hi - omega1.lo;
        delta[1] = (omega1.hi - omega_max) / range;
        delta[best_endpoint] = (omega_max - omega1.lo) / range;
    }

    // The state space collapses to omega_1 in [lo, hi]; regret is linear in
    // omega_1, so its maximum over states sits at an interval endpoint.
    double worst = 0.0;
    for (double o1 : {omega1.lo, omega1.hi}) {
        const double best = std::max({omega0, o1, omega2});
        const double achieved = delta[0] * omega0 + delta[1] * o1 + delta[2] * omega2;
        worst = std::max(worst, best - achieved);
    }
    worst = std::max(worst, 0.0);

    // Cross-check against the closed-form value in the ambiguous regime.
    if (omega1.lo < omega_max && omega_max < omega1.hi) {
        const double closed = (omega1.hi - omega_max) * (omega_max - omega1.lo) /
                              (omega1.hi - omega1.lo);
        if (std::fabs(worst - closed) > 1e-9)
            throw NumericalError("allocation_mmr_t2: closed-form cross-check failed");
    }

    AllocationDecision out;
    out.allocation = std::move(delta);
    out.mmr_value = worst;
    out.grid_step = 0.0;
    out.method = AllocationMethod::AnalyticalT2;
    return out;
}

AllocationDecision allocation_mmr_auto(const ConstraintSystem& cs, const WelfareSpec& w,
                                       const CostSpec& g, const GridOptions& options) {
    require_feasible(cs);
    if (cs.grid().max_dose() == 2) {
        const Interval iv0 = bound_net_welfare(cs, 0, w, g);
        const Interval iv2 = bound_net_welfare(cs, 2, w, g);
        if (iv0.width() <= 1e-9 && iv2.width() <= 1e-9) {
            const Interval iv1 = bound_net_welfare(cs, 1, w, g);
            return allocation_mmr_t2(iv0.lo, iv2.lo, iv1);
        }
    }
    return allocation_mmr_grid(cs, w, g, options);
}

}  // namespace dosage
