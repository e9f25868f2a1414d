#include "dosage/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dosage::linprog {

namespace {

constexpr double kRedCostTol = 1e-9;

enum class RunStatus { Optimal, Unbounded };

// Bland's-rule simplex over an explicit dense tableau.
// `rows` is m x width with the rhs in the last column; `obj` holds reduced
// costs with -z in the last cell. Only columns below `col_limit` may enter.
struct Tableau {
    std::vector<double>& rows;
    std::vector<double>& obj;
    std::vector<int>& basis;
    std::size_t width;

    std::size_t row_count() const { return basis.size(); }
    double* row(std::size_t i) { return rows.data() + i * width; }
    const double* crow(std::size_t i) const { return rows.data() + i * width; }
    double rhs(std::size_t i) const { return crow(i)[width - 1]; }

    void eliminate(double* target, const double* pivot_row, std::size_t j) const {
        const double f = target[j];
        if (f == 0.0) return;
        for (std::size_t k = 0; k < width; ++k) target[k] -= f * pivot_row[k];
        target[j] = 0.0;
    }

    void pivot(std::size_t r, std::size_t j) {
        double* pr = row(r);
        const double p = pr[j];
        for (std::size_t k = 0; k < width; ++k) pr[k] /= p;
        pr[j] = 1.0;
        for (std::size_t i = 0; i < row_count(); ++i) {
            if (i != r) eliminate(row(i), pr, j);
        }
        eliminate(obj.data(), pr, j);
        basis[r] = static_cast<int>(j);
    }

    RunStatus run(std::size_t col_limit) {
        const std::size_t max_iter = 10000 * (row_count() + col_limit + 1);
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            // Entering column: lowest index with an improving reduced cost.
            std::size_t enter = col_limit;
            for (std::size_t j = 0; j < col_limit; ++j) {
                if (obj[j] < -kRedCostTol) { enter = j; break; }
            }
            if (enter == col_limit) return RunStatus::Optimal;

            // Ratio test; ties resolved by the lowest basic column index.
            std::size_t leave = row_count();
            double best_ratio = std::numeric_limits<double>::infinity();
            double largest_positive = 0.0;
            for (std::size_t i = 0; i < row_count(); ++i) {
                const double a = crow(i)[enter];
                if (a > largest_positive) largest_positive = a;
                if (a <= kPivotTol) continue;
                const double ratio = rhs(i) / a;
                if (ratio < best_ratio - 1e-12) {
                    best_ratio = ratio;
                    leave = i;
                } else if (ratio <= best_ratio + 1e-12 && leave < row_count() &&
                           basis[i] < basis[leave]) {
                    leave = i;
                }
            }
            if (leave == row_count()) {
                if (largest_positive > 0.0) {
                    throw NumericalError(
                        "simplex: all candidate pivots below 1e-11 in column " +
                        std::to_string(enter));
                }
                return RunStatus::Unbounded;
            }
            pivot(leave, enter);
        }
        throw NumericalError("simplex: iteration limit exceeded");
    }
};

void validate_inputs(const std::vector<double>& eq_matrix,
                     const std::vector<double>& eq_rhs, std::size_t n_vars) {
    const std::size_t m = eq_rhs.size();
    if (eq_matrix.size() != m * n_vars)
        throw ArgumentError("linprog: eq_matrix size does not match rows x vars");
    if (n_vars == 0) throw ArgumentError("linprog: at least one variable required");
    for (double v : eq_matrix)
        if (!std::isfinite(v)) throw ArgumentError("linprog: non-finite matrix entry");
    for (double v : eq_rhs)
        if (!std::isfinite(v)) throw ArgumentError("linprog: non-finite rhs entry");
}

}  // namespace

PolytopeMaximizer::PolytopeMaximizer(std::vector<double> eq_matrix,
                                     std::vector<double> eq_rhs, std::size_t n_vars) {
    validate_inputs(eq_matrix, eq_rhs, n_vars);
    n_ = n_vars;
    m0_ = eq_rhs.size();
    width_ = n_ + m0_ + 1;

    flip_.assign(m0_, 1.0);
    rows_.assign(m0_ * width_, 0.0);
    basis_.resize(m0_);

    for (std::size_t i = 0; i < m0_; ++i) {
        const double s = (eq_rhs[i] < 0.0) ? -1.0 : 1.0;
        flip_[i] = s;
        double* r = rows_.data() + i * width_;
        for (std::size_t j = 0; j < n_; ++j) r[j] = s * eq_matrix[i * n_ + j];
        r[n_ + i] = 1.0;                    // artificial
        r[width_ - 1] = s * eq_rhs[i];
        basis_[i] = static_cast<int>(n_ + i);
    }

    // Phase 1: minimize the sum of artificials. With the all-artificial basis
    // the reduced cost of structural column j is -sum_i a_ij.
    std::vector<double> obj(width_, 0.0);
    for (std::size_t i = 0; i < m0_; ++i) {
        const double* r = rows_.data() + i * width_;
        for (std::size_t j = 0; j < n_; ++j) obj[j] -= r[j];
        obj[width_ - 1] -= r[width_ - 1];
    }

    Tableau tab{rows_, obj, basis_, width_};
    if (tab.run(n_ + m0_) != RunStatus::Optimal)
        throw NumericalError("phase 1 unbounded (should be impossible)");

    const double infeas = -obj[width_ - 1];
    if (infeas > kFeasibilityTol) {
        feasible_ = false;
        farkas_.assign(m0_, 0.0);
        for (std::size_t i = 0; i < m0_; ++i)
            farkas_[i] = flip_[i] * (1.0 - obj[n_ + i]);
        return;
    }
    feasible_ = true;

    // Drive artificials out of the basis; rows where no structural pivot
    // exists are redundant and dropped.
    for (std::size_t i = 0; i < basis_.size();) {
        if (basis_[i] < static_cast<int>(n_)) { ++i; continue; }
        double* r = rows_.data() + i * width_;
        std::size_t piv = n_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (std::fabs(r[j]) > kPivotTol) { piv = j; break; }
        }
        if (piv < n_) {
            Tableau t{rows_, obj, basis_, width_};
            t.pivot(i, piv);
            ++i;
        } else {
            const std::size_t last = basis_.size() - 1;
            if (i != last) {
                std::copy(rows_.begin() + last * width_, rows_.begin() + (last + 1) * width_,
                          rows_.begin() + i * width_);
                basis_[i] = basis_[last];
            }
            rows_.resize(last * width_);
            basis_.resize(last);
        }
    }

    witness_.assign(n_, 0.0);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double v = rows_[i * width_ + width_ - 1];
        witness_[static_cast<std::size_t>(basis_[i])] = std::max(v, 0.0);
    }
}

const std::vector<double>& PolytopeMaximizer::witness() const {
    if (!feasible_) throw NumericalError("witness requested on infeasible system");
    return witness_;
}

const std::vector<double>& PolytopeMaximizer::farkas_certificate() const {
    if (feasible_) throw NumericalError("certificate requested on feasible system");
    return farkas_;
}

PolytopeMaximizer::Result
PolytopeMaximizer::maximize_full(std::span<const double> objective) const {
    if (!feasible_) throw NumericalError("maximize called on infeasible system");
    if (objective.size() != n_)
        throw ArgumentError("maximize: objective size mismatch");
    for (double v : objective)
        if (!std::isfinite(v)) throw ArgumentError("maximize: non-finite objective");
    lp_count_.fetch_add(1, std::memory_order_relaxed);

    std::vector<double> rows = rows_;
    std::vector<int> basis = basis_;

    // Minimize -c'x; price out the cached basis (all structural after drive-out).
    std::vector<double> obj(width_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj[j] = -objective[j];
    const std::size_t m = basis.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double cb = obj[static_cast<std::size_t>(basis[i])];
        if (cb == 0.0) continue;
        const double* r = rows.data() + i * width_;
        for (std::size_t k = 0; k < width_; ++k) obj[k] -= cb * r[k];
        obj[static_cast<std::size_t>(basis[i])] = 0.0;
    }

    Tableau tab{rows, obj, basis, width_};
    Result res;
    if (tab.run(n_) == RunStatus::Unbounded) {
        res.bounded = false;
        return res;
    }
    res.value = obj[width_ - 1];  // -z of the minimized negated objective
    res.point.assign(n_, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        res.point[static_cast<std::size_t>(basis[i])] = rows[i * width_ + width_ - 1];
    // The artificial columns carry the multipliers of every original row,
    // including rows dropped as redundant during phase 1.
    res.duals.assign(m0_, 0.0);
    for (std::size_t orig = 0; orig < m0_; ++orig)
        res.duals[orig] = flip_[orig] * obj[n_ + orig];
    return res;
}

double PolytopeMaximizer::maximize(std::span<const double> objective) const {
    Result res = maximize_full(objective);
    if (!res.bounded) throw NumericalError("maximize: objective unbounded over polytope");
    return res.value;
}

LpOutcome solve(const LinearProgram& lp) {
    if (lp.objective.empty()) throw ArgumentError("solve: empty objective");
    PolytopeMaximizer pm(lp.eq_matrix, lp.eq_rhs, lp.num_vars());
    LpOutcome out;
    if (!pm.feasible()) {
        out.status = LpStatus::Infeasible;
        out.certificate = pm.farkas_certificate();
        return out;
    }
    std::vector<double> c = lp.objective;
    if (lp.sense == Sense::Minimize)
        for (double& v : c) v = -v;
    PolytopeMaximizer::Result res = pm.maximize_full(c);
    if (!res.bounded) {
        out.status = LpStatus::Unbounded;
        return out;
    }
    out.status = LpStatus::Optimal;
    out.point = std::move(res.point);
    if (lp.sense == Sense::Minimize) {
        out.value = -res.value;
        for (double& y : res.duals) y = -y;
    } else {
        out.value = res.value;
    }
    out.certificate = std::move(res.duals);
    return out;
}

Feasibility check_feasible(const std::vector<double>& eq_matrix,
                           const std::vector<double>& eq_rhs, std::size_t n_vars) {
    PolytopeMaximizer pm(eq_matrix, eq_rhs, n_vars);
    Feasibility f;
    f.feasible = pm.feasible();
    if (f.feasible)
        f.point = pm.witness();
    else
        f.certificate = pm.farkas_certificate();
    return f;
}

}  // namespace dosage::linprog
