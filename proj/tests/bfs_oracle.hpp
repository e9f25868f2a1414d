#pragma once

// Test-only oracle: exhaustive basic-feasible-solution enumeration for
// optimizing c'x over {x >= 0, A x = b}. Independent of the production
// solver (own Gaussian elimination); practical only for small n.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace testutil {

struct BfsExtremes {
    bool feasible = false;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::vector<double>> vertices;
};

namespace detail {

// Solve the square system M y = r by Gaussian elimination with partial
// pivoting; empty result when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<double> m,
                                                       std::vector<double> r) {
    const std::size_t k = r.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t best = col;
        for (std::size_t i = col + 1; i < k; ++i)
            if (std::fabs(m[i * k + col]) > std::fabs(m[best * k + col])) best = i;
        if (std::fabs(m[best * k + col]) < 1e-10) return std::nullopt;
        if (best != col) {
            for (std::size_t j = 0; j < k; ++j) std::swap(m[col * k + j], m[best * k + j]);
            std::swap(r[col], r[best]);
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (i == col) continue;
            const double f = m[i * k + col] / m[col * k + col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < k; ++j) m[i * k + j] -= f * m[col * k + j];
            r[i] -= f * r[col];
        }
    }
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) y[i] = r[i] / m[i * k + i];
    return y;
}

// Row-reduce [A | b] to a maximal independent row set.
inline void independent_rows(std::vector<double>& a, std::vector<double>& b,
                             std::size_t n) {
    std::size_t m = b.size();
    std::vector<double> work = a;
    std::vector<double> rhs = b;
    std::vector<std::size_t> keep;
    std::vector<bool> used(m, false);
    for (std::size_t col = 0; col < n && keep.size() < m; ++col) {
        std::size_t best = m;
        double best_abs = 1e-9;
        for (std::size_t i = 0; i < m; ++i) {
            if (used[i]) continue;
            if (std::fabs(work[i * n + col]) > best_abs) {
                best = i;
                best_abs = std::fabs(work[i * n + col]);
            }
        }
        if (best == m) continue;
        used[best] = true;
        keep.push_back(best);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == best) continue;
            const double f = work[i * n + col] / work[best * n + col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) work[i * n + j] -= f * work[best * n + j];
            rhs[i] -= f * rhs[best];
        }
    }
    std::vector<double> a2;
    std::vector<double> b2;
    for (std::size_t i : keep) {
        a2.insert(a2.end(), a.begin() + static_cast<std::ptrdiff_t>(i * n),
                  a.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        b2.push_back(b[i]);
    }
    a = std::move(a2);
    b = std::move(b2);
}

}  // namespace detail

inline BfsExtremes bfs_extremes(const std::vector<double>& objective,
                                std::vector<double> eq_matrix,
                                std::vector<double> eq_rhs) {
    const std::size_t n = objective.size();
    const std::vector<double> full_a = eq_matrix;
    const std::vector<double> full_b = eq_rhs;
    detail::independent_rows(eq_matrix, eq_rhs, n);
    const std::size_t r = eq_rhs.size();

    BfsExtremes out;
    if (r > n) return out;

    std::vector<std::size_t> pick(r);
    for (std::size_t i = 0; i < r; ++i) pick[i] = i;

    auto consider = [&](const std::vector<std::size_t>& cols) {
        std::vector<double> sub(r * r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) sub[i * r + j] = eq_matrix[i * n + cols[j]];
        auto y = detail::solve_square(sub, eq_rhs);
        if (!y) return;
        std::vector<double> x(n, 0.0);
        for (std::size_t j = 0; j < r; ++j) x[cols[j]] = (*y)[j];
        for (double v : x)
            if (v < -1e-9) return;
        // Verify against the full (possibly redundant) original system.
        for (std::size_t i = 0; i < full_b.size(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += full_a[i * n + j] * x[j];
            if (std::fabs(dot - full_b[i]) > 1e-7) return;
        }
        double val = 0.0;
        for (std::size_t j = 0; j < n; ++j) val += objective[j] * x[j];
        if (!out.feasible) {
            out.feasible = true;
            out.min = out.max = val;
        } else {
            if (val < out.min) out.min = val;
            if (val > out.max) out.max = val;
        }
        out.vertices.push_back(std::move(x));
    };

    // All column subsets of size r, in lexicographic order.
    if (r == 0) {
        consider({});
        return out;
    }
    while (true) {
        consider(pick);
        std::size_t i = r;
        while (i > 0) {
            --i;
            if (pick[i] != n - r + i) break;
            if (i == 0) return out;
        }
        if (pick[i] == n - r + i) return out;
        ++pick[i];
        for (std::size_t j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
    }
}

}  // namespace testutil
