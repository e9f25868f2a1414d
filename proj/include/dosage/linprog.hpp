#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dosage/errors.hpp"

namespace dosage::linprog {

inline constexpr double kFeasibilityTol = 1e-8;
inline constexpr double kPivotTol = 1e-11;
inline constexpr double kValueTol = 1e-9;

enum class Sense { Maximize, Minimize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

// Dense LP in standard equality form: optimize c'x over {x >= 0, A x = b}.
struct LinearProgram {
    Sense sense = Sense::Maximize;
    std::vector<double> objective;   // n entries
    std::vector<double> eq_matrix;   // m*n, row-major
    std::vector<double> eq_rhs;      // m entries

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return eq_rhs.size(); }
};

struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    double value = 0.0;
    std::vector<double> point;        // when Optimal
    // Dual multipliers per original row when Optimal; Farkas certificate when
    // Infeasible (y with y'A <= 0 componentwise and y'b > 0).
    std::vector<double> certificate;
};

struct Feasibility {
    bool feasible = false;
    std::vector<double> point;        // when feasible: x >= 0, A x = b within 1e-8
    std::vector<double> certificate;  // when infeasible: Farkas vector
};

// Repeated maximization over a fixed polytope {x >= 0, A x = b}.
// Phase-1 work (feasibility, basis construction) is done once at build time;
// each maximize() call restarts phase 2 from the cached feasible basis.
// maximize() is const and allocates its own scratch, so distinct objectives
// may be evaluated concurrently on one instance.
class PolytopeMaximizer {
public:
    // n_vars = number of structural variables; matrix is rows x n_vars row-major.
    PolytopeMaximizer(std::vector<double> eq_matrix, std::vector<double> eq_rhs,
                      std::size_t n_vars);

    bool feasible() const { return feasible_; }
    std::size_t num_vars() const { return n_; }

    const std::vector<double>& witness() const;          // feasible point
    const std::vector<double>& farkas_certificate() const;  // infeasibility proof

    struct Result {
        bool bounded = true;
        double value = 0.0;
        std::vector<double> point;
        std::vector<double> duals;  // per original row
    };

    Result maximize_full(std::span<const double> objective) const;
    // Value-only convenience; throws NumericalError if the LP is unbounded.
    double maximize(std::span<const double> objective) const;

    // Number of phase-2 solves performed so far (diagnostics).
    std::uint64_t lp_count() const { return lp_count_.load(std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> lp_count_{0};
    std::size_t n_ = 0;       // structural columns
    std::size_t m0_ = 0;      // original rows
    std::size_t width_ = 0;   // n + m0 + 1 (structurals, artificials, rhs)
    bool feasible_ = false;
    std::vector<double> rows_;      // post-phase-1 tableau, kept rows only
    std::vector<int> basis_;        // basic column per kept row
    std::vector<double> flip_;      // per original row, +-1 applied to make b >= 0
    std::vector<double> witness_;
    std::vector<double> farkas_;
};

LpOutcome solve(const LinearProgram& lp);

// Phase-1 feasibility of {x >= 0, A x = b}.
Feasibility check_feasible(const std::vector<double>& eq_matrix,
                           const std::vector<double>& eq_rhs, std::size_t n_vars);

}  // namespace dosage::linprog
