#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dfrs {

/// Result of a dense-simplex solve.
struct SimplexResult {
    bool optimal = false;
    double objective = 0.0;
    std::vector<double> x;
};

/// Maximizes c.x subject to A x <= b and 0 <= x <= upper, with b >= 0 so the
/// origin is feasible. Upper bounds are handled as explicit rows; intended
/// for the small allocation-layer programs (up to a few hundred variables).
/// Dantzig pricing with a Bland fallback against cycling; deterministic.
inline SimplexResult simplex_maximize(const std::vector<double>& c,
                                      const std::vector<std::vector<double>>& a,
                                      const std::vector<double>& b,
                                      const std::vector<double>& upper) {
    const std::size_t n = c.size();
    std::size_t m = a.size();
    if (b.size() != m) throw std::invalid_argument("simplex: rhs size mismatch");
    for (const auto& row : a)
        if (row.size() != n) throw std::invalid_argument("simplex: row size mismatch");
    if (upper.size() != n) throw std::invalid_argument("simplex: bound size mismatch");

    std::size_t rows = m + n;           // capacity rows + bound rows
    std::size_t cols = n + rows + 1;    // vars + slacks + rhs
    std::vector<std::vector<double>> t(rows + 1, std::vector<double>(cols, 0.0));

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i] < 0.0 ? 0.0 : b[i];  // clamp rounding noise
    }
    for (std::size_t j = 0; j < n; ++j) {
        t[m + j][j] = 1.0;
        t[m + j][n + m + j] = 1.0;
        t[m + j][cols - 1] = upper[j] < 0.0 ? 0.0 : upper[j];
    }
    for (std::size_t j = 0; j < n; ++j) t[rows][j] = -c[j];

    std::vector<std::size_t> basis(rows);
    for (std::size_t i = 0; i < rows; ++i) basis[i] = n + i;

    const double eps = 1e-11;
    const std::size_t bland_after = 20 * (rows + n);
    std::size_t iter = 0;

    for (;;) {
        if (++iter > 200 * (rows + n) + 10000)
            throw std::runtime_error("simplex: iteration limit");
        bool bland = iter > bland_after;

        std::size_t enter = cols;  // sentinel
        double best = -eps;
        for (std::size_t j = 0; j + 1 < cols; ++j) {
            double rc = t[rows][j];
            if (rc < -eps) {
                if (bland) { enter = j; break; }
                if (rc < best) { best = rc; enter = j; }
            }
        }
        if (enter == cols) break;  // optimal

        std::size_t leave = rows;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (t[i][enter] > eps) {
                double ratio = t[i][cols - 1] / t[i][enter];
                if (leave == rows || ratio < best_ratio - 1e-15 ||
                    (ratio < best_ratio + 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave == rows) throw std::runtime_error("simplex: unbounded");

        double piv = t[leave][enter];
        for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= piv;
        for (std::size_t i = 0; i <= rows; ++i) {
            if (i == leave) continue;
            double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }

    SimplexResult res;
    res.optimal = true;
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        if (basis[i] < n) res.x[basis[i]] = t[i][cols - 1];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
    return res;
}

}  // namespace dfrs
