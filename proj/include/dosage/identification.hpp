#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dosage/core.hpp"
#include "dosage/linprog.hpp"

namespace dosage {

// Linear-constraint toggles on the threshold distribution.
// `independence` is bilinear in q and handled by independence_bounds(), never
// by constraint rows; combining it with concurrent_thresholds is rejected.
struct Restrictions {
    bool no_ae_at_zero = false;
    bool concurrent_thresholds = false;
    bool independence = false;

    std::vector<std::string> names() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x, double slack = 0.0) const {
        return x >= lo - slack && x <= hi + slack;
    }
};

// The identification polytope Q: all non-negative q with total mass one that
// reproduce the observed arm outcome distributions, plus restriction rows.
class ConstraintSystem {
public:
    ConstraintSystem(DoseGrid grid, TrialEvidence evidence, Restrictions restrictions);

    const DoseGrid& grid() const { return grid_; }
    const TrialEvidence& evidence() const { return evidence_; }
    const Restrictions& restrictions() const { return restrictions_; }

    int column(int t_d, int t_e) const;
    int num_columns() const { return grid_.threshold_count() * grid_.threshold_count(); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }

    const std::vector<double>& matrix() const { return matrix_; }
    const std::vector<double>& rhs() const { return rhs_; }
    const std::vector<std::string>& row_labels() const { return row_labels_; }

    // Numerical rank of the equality matrix (3K+1 without restrictions).
    int equality_rank() const;

    bool feasible() const { return maximizer_->feasible(); }
    ThresholdDistribution witness() const;
    const linprog::PolytopeMaximizer& maximizer() const { return *maximizer_; }

private:
    DoseGrid grid_;
    TrialEvidence evidence_;
    Restrictions restrictions_;
    std::vector<double> matrix_;
    std::vector<double> rhs_;
    std::vector<std::string> row_labels_;
    std::shared_ptr<const linprog::PolytopeMaximizer> maximizer_;
};

ConstraintSystem build_constraints(const TrialEvidence& evidence,
                                   const Restrictions& restrictions,
                                   const DoseGrid& grid);

struct ConsistencyReport {
    bool consistent = false;
    std::optional<ThresholdDistribution> witness;
    std::vector<double> certificate;
    // Violated necessary monotonicity conditions, in plain language.
    std::vector<std::string> violated_necessary_conditions;
};

ConsistencyReport check_consistency(const TrialEvidence& evidence,
                                    const Restrictions& restrictions,
                                    const DoseGrid& grid);

// Sharp [min, max] of sum c(h,i) q(h,i) over Q.
Interval bound_linear(const ConstraintSystem& cs, std::span<const double> coefficients);

Interval bound_outcome_prob(const ConstraintSystem& cs, int t, OutcomeCell cell);

// Sharp bounds on net welfare omega_t = E{w[d(t), e(t)]} - g(t).
Interval bound_net_welfare(const ConstraintSystem& cs, int t, const WelfareSpec& w,
                           const CostSpec& g);

// Quadrant indicator coefficients: entry (h,i) = 1 iff outcome_of(t,h,i) == cell.
std::vector<double> quadrant_indicator(const DoseGrid& grid, int t, OutcomeCell cell);

struct IndependenceBounds {
    Interval p_disease;    // p[d(t) = 1]
    Interval p_ae;         // p[e(t) = 1]
    Interval net_welfare;  // omega_t
};

// Bounds under statistical independence of t_d and t_e. Marginal intervals
// come from monotonicity between bracketing trial doses; the welfare interval
// is the range of the factorized welfare over the marginal rectangle, which a
// bilinear function attains at the rectangle corners.
IndependenceBounds independence_bounds(const TrialEvidence& evidence,
                                       const DoseGrid& grid, int t,
                                       const WelfareSpec& w, const CostSpec& g,
                                       double factorization_tol = 1e-6);

}  // namespace dosage
