#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/matrix.hpp"

namespace tslin {

/// Linear feasibility problem:  rows[i] . x <= rhs[i],  x_j >= lower[j]
/// (lower bound -inf means the variable is free below).
struct LpProblem {
    std::vector<Vector> rows;
    Vector rhs;
    Vector lower;
};

namespace detail {

/// Dense two-phase primal simplex with Bland's rule. Minimizes c.y subject to
/// T y = g, y >= 0, where the initial basis (slacks/artificials) is identity.
class SimplexTableau {
public:
    SimplexTableau(std::vector<Vector> tableau, Vector rhs, std::vector<std::size_t> basis,
                   std::size_t num_cols)
        : t_(std::move(tableau)), g_(std::move(rhs)), basis_(std::move(basis)), cols_(num_cols) {}

    /// Minimizes the given cost vector starting from the current basis.
    /// Columns marked blocked never enter. Returns the objective value.
    double minimize(const Vector& cost, const std::vector<bool>& blocked) {
        const std::size_t m = g_.size();
        obj_.assign(cols_ + 1, 0.0);
        for (std::size_t j = 0; j < cols_; ++j)
            obj_[j] = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0)
                continue;
            for (std::size_t j = 0; j < cols_; ++j)
                obj_[j] -= cb * t_[i][j];
            obj_[cols_] -= cb * g_[i];
        }

        const double eps = 1e-11;
        for (;;) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!blocked[j] && obj_[j] < -eps) {
                    enter = j;
                    break; // Bland: smallest index
                }
            }
            if (enter == cols_)
                break;

            std::size_t leave = m;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (t_[i][enter] > eps) {
                    const double ratio = g_[i] / t_[i][enter];
                    if (leave == m || ratio < best_ratio - eps ||
                        (ratio < best_ratio + eps && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == m)
                throw NumericalError("simplex: unbounded direction in a bounded problem");
            pivot(leave, enter);
        }
        return -obj_[cols_];
    }

    void pivot(std::size_t row, std::size_t col) {
        const std::size_t m = g_.size();
        const double p = t_[row][col];
        for (std::size_t j = 0; j < cols_; ++j)
            t_[row][j] /= p;
        g_[row] /= p;
        t_[row][col] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row)
                continue;
            const double f = t_[i][col];
            if (f == 0.0)
                continue;
            for (std::size_t j = 0; j < cols_; ++j)
                t_[i][j] -= f * t_[row][j];
            t_[i][col] = 0.0;
            g_[i] -= f * g_[row];
        }
        const double fo = obj_[col];
        if (fo != 0.0) {
            for (std::size_t j = 0; j < cols_; ++j)
                obj_[j] -= fo * t_[row][j];
            obj_[col] = 0.0;
            obj_[cols_] -= fo * g_[row];
        }
        basis_[row] = col;
    }

    /// Pivots basic artificials (columns >= first_artificial) out where possible.
    void expel_artificials(std::size_t first_artificial) {
        const std::size_t m = g_.size();
        for (std::size_t i = 0; i < m; ++i) {
            if (basis_[i] < first_artificial)
                continue;
            for (std::size_t j = 0; j < first_artificial; ++j) {
                if (std::abs(t_[i][j]) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    Vector solution() const {
        Vector y(cols_, 0.0);
        for (std::size_t i = 0; i < g_.size(); ++i)
            y[basis_[i]] = std::max(0.0, g_[i]); // pivoting keeps g >= 0 up to rounding
        return y;
    }

private:
    std::vector<Vector> t_;
    Vector g_;
    std::vector<std::size_t> basis_;
    std::size_t cols_;
    Vector obj_;
};

struct LpEncoding {
    std::vector<std::size_t> pos_col; ///< column of x_j (shifted) or of x_j^+
    std::vector<std::size_t> neg_col; ///< column of x_j^- (npos when bounded)
    std::size_t slack_radius_col = 0;
    std::size_t num_structural = 0;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

} // namespace detail

/// Any point of the margin-tightened polytope, or nullopt when it is empty.
/// When max_slack is set, the point additionally maximizes the minimum row
/// slack (scaled by `scales`) up to the cap; the achieved radius is returned.
inline std::optional<std::pair<Vector, double>>
lp_solve(const LpProblem& problem, const std::optional<Vector>& max_slack_scales = std::nullopt,
         double slack_cap = 1.0) {
    const std::size_t n = problem.lower.size();
    const std::size_t m = problem.rows.size();
    const bool with_radius = max_slack_scales.has_value();

    detail::LpEncoding enc;
    enc.pos_col.assign(n, 0);
    enc.neg_col.assign(n, detail::LpEncoding::npos);
    std::size_t col = 0;
    for (std::size_t j = 0; j < n; ++j) {
        enc.pos_col[j] = col++;
        if (std::isinf(problem.lower[j]))
            enc.neg_col[j] = col++;
    }
    if (with_radius)
        enc.slack_radius_col = col++;
    enc.num_structural = col;

    const std::size_t rows_total = m + (with_radius ? 1 : 0);
    const std::size_t cols_total = enc.num_structural + 2 * rows_total; // slacks + artificials
    const std::size_t first_slack = enc.num_structural;
    const std::size_t first_artificial = first_slack + rows_total;

    std::vector<Vector> tab(rows_total, Vector(cols_total, 0.0));
    Vector g(rows_total, 0.0);
    std::vector<std::size_t> basis(rows_total, 0);
    std::size_t artificials_used = 0;

    auto encode_row = [&](std::size_t r, const Vector& coeffs, double rhs, double radius_coef) {
        double shifted = rhs;
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isinf(problem.lower[j]))
                shifted -= coeffs[j] * problem.lower[j];
        }
        Vector& row = tab[r];
        for (std::size_t j = 0; j < n; ++j) {
            row[enc.pos_col[j]] = coeffs[j];
            if (enc.neg_col[j] != detail::LpEncoding::npos)
                row[enc.neg_col[j]] = -coeffs[j];
        }
        if (with_radius)
            row[enc.slack_radius_col] = radius_coef;
        row[first_slack + r] = 1.0;
        g[r] = shifted;

        double scale = std::abs(shifted);
        for (double v : row)
            scale = std::max(scale, std::abs(v));
        if (scale > 0.0) {
            for (double& v : row)
                v /= scale;
            g[r] /= scale;
        }
        if (g[r] < 0.0) {
            for (double& v : row)
                v = -v;
            g[r] = -g[r];
            row[first_artificial + r] = 1.0;
            basis[r] = first_artificial + r;
            ++artificials_used;
        } else {
            basis[r] = first_slack + r;
        }
    };

    for (std::size_t i = 0; i < m; ++i)
        encode_row(i, problem.rows[i], problem.rhs[i], with_radius ? (*max_slack_scales)[i] : 0.0);
    if (with_radius) {
        Vector none(n, 0.0);
        encode_row(m, none, slack_cap, 1.0);
    }

    detail::SimplexTableau simplex(std::move(tab), std::move(g), std::move(basis), cols_total);
    std::vector<bool> blocked(cols_total, false);

    if (artificials_used > 0) {
        Vector phase1(cols_total, 0.0);
        for (std::size_t r = 0; r < rows_total; ++r)
            phase1[first_artificial + r] = 1.0;
        const double infeas = simplex.minimize(phase1, blocked);
        if (infeas > 1e-9)
            return std::nullopt;
        simplex.expel_artificials(first_artificial);
    }
    for (std::size_t r = 0; r < rows_total; ++r)
        blocked[first_artificial + r] = true;

    double radius = 0.0;
    if (with_radius) {
        Vector phase2(cols_total, 0.0);
        phase2[enc.slack_radius_col] = -1.0; // maximize the radius
        radius = -simplex.minimize(phase2, blocked);
    }

    const Vector y = simplex.solution();
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isinf(problem.lower[j]))
            x[j] = y[enc.pos_col[j]] - y[enc.neg_col[j]];
        else
            x[j] = problem.lower[j] + y[enc.pos_col[j]];
    }
    return std::make_pair(std::move(x), radius);
}

} // namespace tslin
