#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dfrs/core.hpp"
#include "dfrs/simplex.hpp"

namespace dfrs {

/// A fixed task->node mapping for which per-job yields are to be chosen.
/// The memory constraint is assumed to hold already; only CPU is optimized.
struct AllocProblem {
    struct Entry {
        int job_id = 0;
        double cpu_need = 1.0;
        std::vector<int> mapping;  // task -> node
    };
    int num_nodes = 0;
    std::vector<Entry> jobs;
};

/// Extra per-job state needed by the stretch-objective optimizers,
/// parallel to AllocProblem::jobs.
struct StretchContext {
    std::vector<double> flow_time;
    std::vector<double> virtual_time;
    double period = 0.0;
};

enum class StretchMode { average, max };

namespace detail {

/// coef[node][k] = cpu_need of job k times its task multiplicity on node.
inline std::vector<std::vector<double>> node_coefficients(const AllocProblem& p) {
    std::vector<std::vector<double>> coef(p.num_nodes, std::vector<double>(p.jobs.size(), 0.0));
    for (std::size_t k = 0; k < p.jobs.size(); ++k) {
        for (int node : p.jobs[k].mapping) {
            if (node < 0 || node >= p.num_nodes)
                throw std::invalid_argument("allocation: node index out of range");
            coef[node][k] += p.jobs[k].cpu_need;
        }
    }
    return coef;
}

}  // namespace detail

/// Uniform yield that maximizes the minimum given the mapping: 1/max(1, L)
/// where L is the maximum CPU load over all nodes.
inline double min_yield_base(const AllocProblem& p) {
    if (p.jobs.empty()) throw std::invalid_argument("min_yield_base: empty mapping");
    auto coef = detail::node_coefficients(p);
    double lambda = 0.0;
    for (const auto& node : coef) {
        double load = 0.0;
        for (double c : node) load += c;
        lambda = std::max(lambda, load);
    }
    return lambda <= 1.0 ? 1.0 : 1.0 / lambda;
}

/// Maximizes the sum of yields subject to the floor, the cap of 1, and the
/// per-node CPU capacity. Returns one optimal vertex (deterministic).
inline std::vector<double> optimize_avg(const AllocProblem& p, double floor) {
    const std::size_t n = p.jobs.size();
    auto coef = detail::node_coefficients(p);

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (int i = 0; i < p.num_nodes; ++i) {
        double load = 0.0;
        for (double c : coef[i]) load += c;
        if (load <= 0.0) continue;
        double residual = 1.0 - floor * load;
        if (residual < -kResourceTol)
            throw std::runtime_error("optimize_avg: floor infeasible on node " + std::to_string(i));
        rows.push_back(coef[i]);
        rhs.push_back(std::max(residual, 0.0));
    }
    std::vector<double> objective(n, 1.0), upper(n, std::max(0.0, 1.0 - floor));
    SimplexResult r = simplex_maximize(objective, rows, rhs, upper);
    std::vector<double> yields(n);
    for (std::size_t k = 0; k < n; ++k) yields[k] = std::min(1.0, floor + r.x[k]);
    return yields;
}

/// Iterative maximization of the minimum yield: all unfrozen jobs share a
/// common yield, raised until a node saturates or the cap is reached; jobs
/// that can no longer improve are frozen and the rest continue.
inline std::vector<double> optimize_maxmin(const AllocProblem& p, double floor) {
    const std::size_t n = p.jobs.size();
    auto coef = detail::node_coefficients(p);
    std::vector<double> yields(n, floor);
    std::vector<bool> frozen(n, false);
    std::size_t frozen_count = 0;

    while (frozen_count < n) {
        std::vector<double> frozen_use(p.num_nodes, 0.0), open_coef(p.num_nodes, 0.0);
        for (int i = 0; i < p.num_nodes; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (frozen[k]) frozen_use[i] += yields[k] * coef[i][k];
                else open_coef[i] += coef[i][k];
            }
        }
        double level = 1.0;
        for (int i = 0; i < p.num_nodes; ++i) {
            if (open_coef[i] > 0.0)
                level = std::min(level, std::max(0.0, 1.0 - frozen_use[i]) / open_coef[i]);
        }
        for (std::size_t k = 0; k < n; ++k)
            if (!frozen[k]) yields[k] = level;
        if (level >= 1.0) {
            for (std::size_t k = 0; k < n; ++k)
                if (!frozen[k]) { frozen[k] = true; ++frozen_count; }
            break;
        }
        // A job freezes once any node hosting it is saturated.
        std::vector<bool> saturated(p.num_nodes, false);
        for (int i = 0; i < p.num_nodes; ++i)
            saturated[i] = open_coef[i] > 0.0 &&
                           (1.0 - frozen_use[i]) - level * open_coef[i] < kResourceTol;
        std::size_t newly = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (frozen[k]) continue;
            bool stuck = false;
            for (int node : p.jobs[k].mapping)
                if (saturated[node]) { stuck = true; break; }
            if (stuck) { frozen[k] = true; ++frozen_count; ++newly; }
        }
        if (newly == 0) {  // numerical stall guard
            for (std::size_t k = 0; k < n; ++k)
                if (!frozen[k]) { frozen[k] = true; ++frozen_count; }
        }
    }
    return yields;
}

namespace detail {

inline double predicted_stretch(double ft, double vt, double period, double yield) {
    return (ft + period) / (vt + yield * period);
}

/// Yield a job needs during the next period to land at predicted stretch s.
inline double yield_for_stretch(double ft, double vt, double period, double s) {
    return ((ft + period) / s - vt) / period;
}

}  // namespace detail

/// Stretch-objective allocation refinement on a fixed mapping.
/// average: one linear pass maximizing the first-order stretch decrease,
/// never lowering a yield below its search value. max: iterative freezing
/// that minimizes the maximum predicted stretch level by level.
inline std::vector<double> optimize_stretch(const AllocProblem& p, const StretchContext& ctx,
                                            const std::vector<double>& initial, StretchMode mode,
                                            double min_progress = 0.01) {
    const std::size_t n = p.jobs.size();
    if (ctx.flow_time.size() != n || ctx.virtual_time.size() != n || initial.size() != n)
        throw std::invalid_argument("optimize_stretch: context size mismatch");
    if (!(ctx.period > 0.0)) throw std::invalid_argument("optimize_stretch: period <= 0");
    const double T = ctx.period;
    auto coef = detail::node_coefficients(p);

    if (mode == StretchMode::average) {
        std::vector<std::vector<double>> rows;
        std::vector<double> rhs;
        for (int i = 0; i < p.num_nodes; ++i) {
            double used = 0.0, load = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                used += initial[k] * coef[i][k];
                load += coef[i][k];
            }
            if (load <= 0.0) continue;
            rows.push_back(coef[i]);
            rhs.push_back(std::max(0.0, 1.0 - used));
        }
        std::vector<double> w(n), upper(n);
        for (std::size_t k = 0; k < n; ++k) {
            double denom = ctx.virtual_time[k] + initial[k] * T;
            w[k] = (ctx.flow_time[k] + T) * T / (denom * denom);
            upper[k] = std::max(0.0, 1.0 - initial[k]);
        }
        SimplexResult r = simplex_maximize(w, rows, rhs, upper);
        std::vector<double> yields(n);
        for (std::size_t k = 0; k < n; ++k) yields[k] = std::min(1.0, initial[k] + r.x[k]);
        return yields;
    }

    // mode == max: lexicographically minimize the predicted maximum stretch.
    std::vector<double> yields = initial;
    std::vector<bool> frozen(n, false);
    std::size_t frozen_count = 0;

    auto clamp_yield = [&](double y) { return std::clamp(y, min_progress, 1.0); };
    auto feasible_at = [&](double s) {
        for (int i = 0; i < p.num_nodes; ++i) {
            double use = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (coef[i][k] <= 0.0) continue;
                double y = frozen[k] ? yields[k]
                                     : clamp_yield(detail::yield_for_stretch(
                                           ctx.flow_time[k], ctx.virtual_time[k], T, s));
                use += y * coef[i][k];
            }
            if (use > 1.0 + kResourceTol) return false;
        }
        return true;
    };

    double level = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        level = std::max(level, detail::predicted_stretch(ctx.flow_time[k], ctx.virtual_time[k],
                                                          T, clamp_yield(initial[k])));
    while (frozen_count < n) {
        double lo = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (!frozen[k])
                lo = std::max(lo, detail::predicted_stretch(ctx.flow_time[k],
                                                            ctx.virtual_time[k], T, 1.0));
        double hi = std::max(level, lo);
        if (!feasible_at(hi)) hi = level = std::max(hi * 2.0, hi + 1.0);  // guard; not expected
        if (feasible_at(lo)) {
            hi = lo;
        } else {
            while (hi - lo > 1e-9 * std::max(1.0, hi)) {
                double mid = 0.5 * (lo + hi);
                if (feasible_at(mid)) hi = mid;
                else lo = mid;
            }
        }
        level = hi;
        for (std::size_t k = 0; k < n; ++k)
            if (!frozen[k])
                yields[k] = clamp_yield(detail::yield_for_stretch(ctx.flow_time[k],
                                                                  ctx.virtual_time[k], T, level));
        // Freeze capped jobs and jobs on saturated nodes.
        std::vector<double> use(p.num_nodes, 0.0);
        for (int i = 0; i < p.num_nodes; ++i)
            for (std::size_t k = 0; k < n; ++k) use[i] += yields[k] * coef[i][k];
        std::size_t newly = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (frozen[k]) continue;
            bool stuck = yields[k] >= 1.0 - 1e-12;
            for (int node : p.jobs[k].mapping)
                if (use[node] >= 1.0 - kResourceTol) { stuck = true; break; }
            if (stuck) { frozen[k] = true; ++frozen_count; ++newly; }
        }
        if (newly == 0) {
            // Freeze the stretch-critical job to guarantee progress.
            std::size_t worst = n;
            double worst_s = -1.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (frozen[k]) continue;
                double s = detail::predicted_stretch(ctx.flow_time[k], ctx.virtual_time[k], T,
                                                     yields[k]);
                if (s > worst_s) { worst_s = s; worst = k; }
            }
            frozen[worst] = true;
            ++frozen_count;
        }
    }
    return yields;
}

}  // namespace dfrs
