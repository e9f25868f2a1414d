#include "dosage/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dosage {

namespace {

std::string arm_row_label(int dose, OutcomeCell cell) {
    std::ostringstream os;
    os << "arm t=" << dose << " cell " << cell_name(cell);
    return os.str();
}

}  // namespace

std::vector<std::string> Restrictions::names() const {
    std::vector<std::string> out;
    if (no_ae_at_zero) out.push_back("no_ae_at_zero");
    if (concurrent_thresholds) out.push_back("concurrent_thresholds");
    if (independence) out.push_back("independence");
    return out;
}

std::vector<double> quadrant_indicator(const DoseGrid& grid, int t, OutcomeCell cell) {
    if (!grid.valid_dose(t)) throw ArgumentError("quadrant_indicator: dose out of range");
    const int n = grid.threshold_count();
    std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
    for (int h = 0; h < n; ++h)
        for (int i = 0; i < n; ++i)
            if (outcome_of(grid, t, h, i) == cell)
                c[static_cast<std::size_t>(h) * n + i] = 1.0;
    return c;
}

ConstraintSystem::ConstraintSystem(DoseGrid grid, TrialEvidence evidence,
                                   Restrictions restrictions)
    : grid_(grid), evidence_(std::move(evidence)), restrictions_(restrictions) {
    if (restrictions_.independence && restrictions_.concurrent_thresholds)
        throw ArgumentError(
            "Restrictions: independence contradicts concurrent_thresholds");
    if (restrictions_.independence)
        throw UnsupportedRestrictionError(
            "independence is bilinear in q and not expressible as constraint rows; "
            "use independence_bounds()");

    const int ncols = num_columns();
    auto add_row = [&](const std::vector<double>& coeffs, double value,
                       std::string label) {
        matrix_.insert(matrix_.end(), coeffs.begin(), coeffs.end());
        rhs_.push_back(value);
        row_labels_.push_back(std::move(label));
    };

    // Law of total probability.
    add_row(std::vector<double>(ncols, 1.0), 1.0, "total-probability");

    // One row per arm per outcome cell (5a)-(5d). All four are kept even
    // though only three are independent per arm; provenance stays legible and
    // the LP tolerates the redundancy.
    for (const TrialArm& arm : evidence_.arms()) {
        for (OutcomeCell cell : kOutcomeCells) {
            add_row(quadrant_indicator(grid_, arm.dose, cell), arm.outcomes.at(cell),
                    arm_row_label(arm.dose, cell));
        }
    }

    const int n = grid_.threshold_count();
    if (restrictions_.no_ae_at_zero) {
        for (int h = 0; h < n; ++h) {
            std::vector<double> row(ncols, 0.0);
            row[static_cast<std::size_t>(h) * n + 0] = 1.0;
            add_row(row, 0.0, "restriction no_ae_at_zero q(" + std::to_string(h) + ",0)=0");
        }
    }
    if (restrictions_.concurrent_thresholds) {
        for (int h = 0; h < n; ++h) {
            for (int i = 0; i < n; ++i) {
                if (h == i) continue;
                std::vector<double> row(ncols, 0.0);
                row[static_cast<std::size_t>(h) * n + i] = 1.0;
                add_row(row, 0.0,
                        "restriction concurrent_thresholds q(" + std::to_string(h) + "," +
                            std::to_string(i) + ")=0");
            }
        }
    }

    maximizer_ = std::make_shared<linprog::PolytopeMaximizer>(
        matrix_, rhs_, static_cast<std::size_t>(ncols));
}

int ConstraintSystem::column(int t_d, int t_e) const {
    if (!grid_.valid_threshold(t_d) || !grid_.valid_threshold(t_e))
        throw ArgumentError("ConstraintSystem::column: threshold out of range");
    return t_d * grid_.threshold_count() + t_e;
}

int ConstraintSystem::equality_rank() const {
    const std::size_t m = rhs_.size();
    const std::size_t n = static_cast<std::size_t>(num_columns());
    std::vector<double> a = matrix_;
    double max_abs = 0.0;
    for (double v : a) max_abs = std::max(max_abs, std::fabs(v));
    const double tol = 1e-9 * std::max(1.0, max_abs);

    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t best = row;
        for (std::size_t i = row + 1; i < m; ++i)
            if (std::fabs(a[i * n + col]) > std::fabs(a[best * n + col])) best = i;
        if (std::fabs(a[best * n + col]) <= tol) continue;
        if (best != row)
            for (std::size_t k = col; k < n; ++k)
                std::swap(a[row * n + k], a[best * n + k]);
        const double p = a[row * n + col];
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = a[i * n + col] / p;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[i * n + k] -= f * a[row * n + k];
        }
        ++rank;
        ++row;
    }
    return rank;
}

ThresholdDistribution ConstraintSystem::witness() const {
    if (!feasible())
        throw InconsistentEvidenceError("witness requested on infeasible evidence");
    return ThresholdDistribution(grid_, maximizer_->witness());
}

ConstraintSystem build_constraints(const TrialEvidence& evidence,
                                   const Restrictions& restrictions,
                                   const DoseGrid& grid) {
    return ConstraintSystem(grid, evidence, restrictions);
}

ConsistencyReport check_consistency(const TrialEvidence& evidence,
                                    const Restrictions& restrictions,
                                    const DoseGrid& grid) {
    ConsistencyReport report;

    // Fast necessary conditions across arms sorted by dose.
    const auto& arms = evidence.arms();
    for (std::size_t k = 1; k < arms.size(); ++k) {
        const TrialArm& lo = arms[k - 1];
        const TrialArm& hi = arms[k];
        auto violation = [&](const char* what, double vlo, double vhi) {
            std::ostringstream os;
            os << what << " between t=" << lo.dose << " (" << vlo << ") and t="
               << hi.dose << " (" << vhi << ")";
            report.violated_necessary_conditions.push_back(os.str());
        };
        if (hi.outcomes.p_disease() > lo.outcomes.p_disease() + kProbabilityTol)
            violation("p[d=1] must be nonincreasing", lo.outcomes.p_disease(),
                      hi.outcomes.p_disease());
        if (hi.outcomes.p_ae() + kProbabilityTol < lo.outcomes.p_ae())
            violation("p[e=1] must be nondecreasing", lo.outcomes.p_ae(),
                      hi.outcomes.p_ae());
        if (hi.outcomes.at(OutcomeCell::NoDiseaseAe) + kProbabilityTol <
            lo.outcomes.at(OutcomeCell::NoDiseaseAe))
            violation("p[(0,1)] must be nondecreasing",
                      lo.outcomes.at(OutcomeCell::NoDiseaseAe),
                      hi.outcomes.at(OutcomeCell::NoDiseaseAe));
        if (hi.outcomes.at(OutcomeCell::DiseaseNoAe) >
            lo.outcomes.at(OutcomeCell::DiseaseNoAe) + kProbabilityTol)
            violation("p[(1,0)] must be nonincreasing",
                      lo.outcomes.at(OutcomeCell::DiseaseNoAe),
                      hi.outcomes.at(OutcomeCell::DiseaseNoAe));
    }

    ConstraintSystem cs = build_constraints(evidence, restrictions, grid);
    if (cs.feasible()) {
        report.consistent = true;
        report.witness = cs.witness();
    } else {
        report.consistent = false;
        report.certificate = cs.maximizer().farkas_certificate();
    }
    return report;
}

Interval bound_linear(const ConstraintSystem& cs, std::span<const double> coefficients) {
    if (!cs.feasible())
        throw InconsistentEvidenceError(
            "bound_linear: constraint system is infeasible; evidence is inconsistent "
            "with monotone dose response");
    if (coefficients.size() != static_cast<std::size_t>(cs.num_columns()))
        throw ArgumentError("bound_linear: coefficient size mismatch");

    const double hi = cs.maximizer().maximize(coefficients);
    std::vector<double> neg(coefficients.begin(), coefficients.end());
    for (double& v : neg) v = -v;
    const double lo = -cs.maximizer().maximize(neg);
    return Interval{lo, hi};
}

Interval bound_outcome_prob(const ConstraintSystem& cs, int t, OutcomeCell cell) {
    return bound_linear(cs, quadrant_indicator(cs.grid(), t, cell));
}

Interval bound_net_welfare(const ConstraintSystem& cs, int t, const WelfareSpec& w,
                           const CostSpec& g) {
    const WelfareCoefficients c = net_welfare_coefficients(cs.grid(), t, w, g);
    Interval iv = bound_linear(cs, c.cell);
    return Interval{iv.lo + c.offset, iv.hi + c.offset};
}

IndependenceBounds independence_bounds(const TrialEvidence& evidence,
                                       const DoseGrid& grid, int t,
                                       const WelfareSpec& w, const CostSpec& g,
                                       double factorization_tol) {
    if (!grid.valid_dose(t)) throw ArgumentError("independence_bounds: dose out of range");

    // The restriction is refutable: each observed joint must equal the product
    // of its marginals.
    for (const TrialArm& arm : evidence.arms()) {
        const double pd = arm.outcomes.p_disease();
        const double pe = arm.outcomes.p_ae();
        double worst = 0.0;
        for (OutcomeCell cell : kOutcomeCells) {
            const double md = disease_of(cell) ? pd : 1.0 - pd;
            const double me = ae_of(cell) ? pe : 1.0 - pe;
            worst = std::max(worst, std::fabs(arm.outcomes.at(cell) - md * me));
        }
        if (worst > factorization_tol) {
            std::ostringstream os;
            os << "independence refuted by arm t=" << arm.dose
               << ": joint deviates from product of marginals by " << worst;
            throw RestrictionRefutedError(os.str(), arm.dose, worst);
        }
    }

    // Marginal intervals from monotonicity between bracketing trial doses,
    // with 1 and 0 as the outer extrapolation endpoints.
    const TrialArm* below = nullptr;  // largest trial dose < t
    const TrialArm* above = nullptr;  // smallest trial dose > t
    const TrialArm* exact = nullptr;
    for (const TrialArm& arm : evidence.arms()) {
        if (arm.dose == t) { exact = &arm; break; }
        if (arm.dose < t) below = &arm;
        if (arm.dose > t) { above = &arm; break; }
    }

    double pd_lo, pd_hi, pe_lo, pe_hi;
    if (exact) {
        pd_lo = pd_hi = exact->outcomes.p_disease();
        pe_lo = pe_hi = exact->outcomes.p_ae();
    } else {
        pd_hi = below ? below->outcomes.p_disease() : 1.0;  // d nonincreasing in t
        pd_lo = above ? above->outcomes.p_disease() : 0.0;
        pe_lo = below ? below->outcomes.p_ae() : 0.0;       // e nondecreasing in t
        pe_hi = above ? above->outcomes.p_ae() : 1.0;
    }

    auto factorized_welfare = [&](double pd, double pe) {
        return (1.0 - pd) * (1.0 - pe) * w.at(OutcomeCell::NoDiseaseNoAe) +
               pd * (1.0 - pe) * w.at(OutcomeCell::DiseaseNoAe) +
               (1.0 - pd) * pe * w.at(OutcomeCell::NoDiseaseAe) +
               pd * pe * w.at(OutcomeCell::DiseaseAe);
    };

    // Bilinear in (pd, pe): extremes over the rectangle sit at its corners.
    double wlo = std::numeric_limits<double>::infinity();
    double whi = -std::numeric_limits<double>::infinity();
    for (double pd : {pd_lo, pd_hi}) {
        for (double pe : {pe_lo, pe_hi}) {
            const double v = factorized_welfare(pd, pe);
            wlo = std::min(wlo, v);
            whi = std::max(whi, v);
        }
    }

    IndependenceBounds out;
    out.p_disease = Interval{pd_lo, pd_hi};
    out.p_ae = Interval{pe_lo, pe_hi};
    out.net_welfare = Interval{wlo - g.at(t), whi - g.at(t)};
    return out;
}

}  // namespace dosage
