#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "dfrs/core.hpp"

namespace dfrs {

/// Consecutive, non-overlapping, left-closed intervals whose endpoints are
/// exactly the release dates and deadlines of the instance.
struct IntervalSet {
    std::vector<double> edges;  // sorted, deduplicated; intervals are [edges[i], edges[i+1])

    std::size_t size() const { return edges.empty() ? 0 : edges.size() - 1; }
    double lo(std::size_t i) const { return edges[i]; }
    double hi(std::size_t i) const { return edges[i + 1]; }
    double length(std::size_t i) const { return edges[i + 1] - edges[i]; }
};

/// Deadline rule: d_j = r_j + S * p_j.
inline IntervalSet build_intervals(const std::vector<JobSpec>& jobs, double stretch) {
    if (jobs.empty()) throw std::invalid_argument("build_intervals: no jobs");
    if (!(stretch >= 1.0)) throw std::invalid_argument("build_intervals: stretch < 1");
    IntervalSet set;
    set.edges.reserve(jobs.size() * 2);
    for (const auto& j : jobs) {
        set.edges.push_back(j.release);
        set.edges.push_back(j.release + stretch * j.proc_time);
    }
    std::sort(set.edges.begin(), set.edges.end());
    set.edges.erase(std::unique(set.edges.begin(), set.edges.end()), set.edges.end());
    return set;
}

/// Work fractions alpha[j][t]: the portion of job j done in interval t.
struct BoundCertificate {
    IntervalSet intervals;
    std::vector<std::vector<double>> alpha;
};

namespace detail {

/// Dinic max-flow on double capacities.
class MaxFlow {
  public:
    explicit MaxFlow(int n) : graph_(static_cast<std::size_t>(n)) {}

    struct EdgeRef {
        int from = 0;
        std::size_t index = 0;
    };

    EdgeRef add_edge(int u, int v, double cap) {
        graph_[static_cast<std::size_t>(u)].push_back(
            {v, cap, static_cast<int>(graph_[static_cast<std::size_t>(v)].size())});
        graph_[static_cast<std::size_t>(v)].push_back(
            {u, 0.0, static_cast<int>(graph_[static_cast<std::size_t>(u)].size()) - 1});
        return {u, graph_[static_cast<std::size_t>(u)].size() - 1};
    }

    double flow_on(const EdgeRef& e) const {
        const Edge& fwd = graph_[static_cast<std::size_t>(e.from)][e.index];
        return graph_[static_cast<std::size_t>(fwd.to)][static_cast<std::size_t>(fwd.rev)].cap;
    }

    double run(int s, int t, double eps) {
        double total = 0.0;
        while (bfs(s, t, eps)) {
            iter_.assign(graph_.size(), 0);
            for (;;) {
                double f = dfs(s, t, infinity(), eps);
                if (f <= eps) break;
                total += f;
            }
        }
        return total;
    }

  private:
    struct Edge {
        int to;
        double cap;
        int rev;
    };

    bool bfs(int s, int t, double eps) {
        level_.assign(graph_.size(), -1);
        std::queue<int> q;
        level_[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const Edge& e : graph_[static_cast<std::size_t>(u)]) {
                if (e.cap > eps && level_[static_cast<std::size_t>(e.to)] < 0) {
                    level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    q.push(e.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    double dfs(int u, int t, double limit, double eps) {
        if (u == t) return limit;
        for (std::size_t& i = iter_[static_cast<std::size_t>(u)];
             i < graph_[static_cast<std::size_t>(u)].size(); ++i) {
            Edge& e = graph_[static_cast<std::size_t>(u)][i];
            if (e.cap > eps && level_[static_cast<std::size_t>(u)] <
                                   level_[static_cast<std::size_t>(e.to)]) {
                double f = dfs(e.to, t, std::min(limit, e.cap), eps);
                if (f > eps) {
                    e.cap -= f;
                    graph_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += f;
                    return f;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Edge>> graph_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
};

}  // namespace detail

/// Decides whether a schedule with maximum stretch S can exist: every job
/// fully processed within its release/deadline window, no job running longer
/// than an interval within it, and per-interval work bounded by the
/// cluster's capacity. Memory is ignored. Returns the work-fraction
/// certificate when feasible.
inline std::optional<BoundCertificate> bound_feasible(const std::vector<JobSpec>& jobs,
                                                      int num_nodes, double stretch) {
    if (num_nodes < 1) throw std::invalid_argument("bound_feasible: num_nodes < 1");
    IntervalSet intervals = build_intervals(jobs, stretch);
    const std::size_t nj = jobs.size(), ni = intervals.size();

    // Source -> job (total work), job -> interval (rate cap), interval -> sink
    // (cluster capacity). The linear system is feasible iff every source edge
    // saturates.
    const int source = 0, sink = 1;
    detail::MaxFlow flow(static_cast<int>(2 + nj + ni));
    auto job_node = [&](std::size_t j) { return static_cast<int>(2 + j); };
    auto interval_node = [&](std::size_t t) { return static_cast<int>(2 + nj + t); };

    double max_cap = 1.0;
    std::vector<detail::MaxFlow::EdgeRef> source_edges(nj);
    std::vector<std::vector<std::pair<std::size_t, detail::MaxFlow::EdgeRef>>> work_edges(nj);
    for (std::size_t j = 0; j < nj; ++j) {
        double w = jobs[j].proc_time * jobs[j].cpu_need * jobs[j].num_tasks;
        source_edges[j] = flow.add_edge(source, job_node(j), w);
        max_cap = std::max(max_cap, w);
        double deadline = jobs[j].release + stretch * jobs[j].proc_time;
        for (std::size_t t = 0; t < ni; ++t) {
            if (jobs[j].release >= intervals.hi(t)) continue;
            if (deadline <= intervals.lo(t)) continue;
            double cap = intervals.length(t) * jobs[j].cpu_need * jobs[j].num_tasks;
            work_edges[j].emplace_back(t, flow.add_edge(job_node(j), interval_node(t), cap));
        }
    }
    for (std::size_t t = 0; t < ni; ++t) {
        double cap = num_nodes * intervals.length(t);
        flow.add_edge(interval_node(t), sink, cap);
        max_cap = std::max(max_cap, cap);
    }

    double pushed = flow.run(source, sink, 1e-13 * max_cap);
    double total_work = 0.0;
    for (std::size_t j = 0; j < nj; ++j)
        total_work += jobs[j].proc_time * jobs[j].cpu_need * jobs[j].num_tasks;
    if (pushed > total_work * (1.0 + 1e-6) + 1e-9)
        throw std::runtime_error("bound_feasible: numerical failure (flow exceeds total work)");

    for (std::size_t j = 0; j < nj; ++j) {
        double w = jobs[j].proc_time * jobs[j].cpu_need * jobs[j].num_tasks;
        if (flow.flow_on(source_edges[j]) < w - 1e-9 * std::max(1.0, w)) return std::nullopt;
    }

    BoundCertificate cert;
    cert.intervals = std::move(intervals);
    cert.alpha.assign(nj, std::vector<double>(ni, 0.0));
    for (std::size_t j = 0; j < nj; ++j) {
        double w = jobs[j].proc_time * jobs[j].cpu_need * jobs[j].num_tasks;
        for (const auto& [t, ref] : work_edges[j]) cert.alpha[j][t] = flow.flow_on(ref) / w;
    }
    return cert;
}

/// Replays a certificate against all five constraint families.
inline bool certificate_valid(const std::vector<JobSpec>& jobs, int num_nodes, double stretch,
                              const BoundCertificate& cert, double eps = 1e-9) {
    const std::size_t nj = jobs.size(), ni = cert.intervals.size();
    if (cert.alpha.size() != nj) return false;
    for (std::size_t j = 0; j < nj; ++j) {
        if (cert.alpha[j].size() != ni) return false;
        double sum = 0.0;
        double deadline = jobs[j].release + stretch * jobs[j].proc_time;
        for (std::size_t t = 0; t < ni; ++t) {
            double a = cert.alpha[j][t];
            if (a < -eps) return false;
            if (jobs[j].release >= cert.intervals.hi(t) && a > eps) return false;
            if (deadline <= cert.intervals.lo(t) && a > eps) return false;
            if (a * jobs[j].proc_time >
                cert.intervals.length(t) + eps * std::max(1.0, cert.intervals.length(t)))
                return false;
            sum += a;
        }
        if (std::abs(sum - 1.0) > eps) return false;
    }
    for (std::size_t t = 0; t < ni; ++t) {
        double used = 0.0;
        for (std::size_t j = 0; j < nj; ++j)
            used += cert.alpha[j][t] * jobs[j].proc_time * jobs[j].cpu_need * jobs[j].num_tasks;
        double cap = num_nodes * cert.intervals.length(t);
        if (used > cap + eps * std::max(1.0, cap)) return false;
    }
    return true;
}

/// Offline lower bound on the optimal maximum stretch, with the bracketing
/// certificate. s_lower is the certified-infeasible end (or 1) and is the
/// value safe to use as a denominator.
struct BoundResult {
    double s_lower = 1.0;
    double s_upper = 1.0;
    BoundCertificate certificate;
};

inline BoundResult lower_bound_stretch(const std::vector<JobSpec>& jobs, int num_nodes,
                                       double tol = 1e-3) {
    if (jobs.empty()) throw std::invalid_argument("lower_bound_stretch: no jobs");
    if (!(tol > 0.0)) throw std::invalid_argument("lower_bound_stretch: tol <= 0");

    if (auto cert = bound_feasible(jobs, num_nodes, 1.0)) {
        return {1.0, 1.0, std::move(*cert)};
    }

    // Serial execution by release order is always achievable.
    std::vector<const JobSpec*> order;
    order.reserve(jobs.size());
    for (const auto& j : jobs) order.push_back(&j);
    std::sort(order.begin(), order.end(), [](const JobSpec* a, const JobSpec* b) {
        return a->release != b->release ? a->release < b->release : a->id < b->id;
    });
    double t = 0.0, s_hi = 1.0;
    for (const JobSpec* j : order) {
        double duration = j->proc_time * std::max(1.0, j->cpu_need * j->num_tasks / num_nodes);
        double end = std::max(t, j->release) + duration;
        s_hi = std::max(s_hi, (end - j->release) / j->proc_time);
        t = end;
    }

    auto upper = bound_feasible(jobs, num_nodes, s_hi);
    while (!upper) {  // not expected; guards rounding at the serial point
        s_hi *= 2.0;
        upper = bound_feasible(jobs, num_nodes, s_hi);
    }

    double lo = 1.0, hi = s_hi;
    BoundCertificate cert = std::move(*upper);
    while (hi - lo > tol * hi) {
        double mid = 0.5 * (lo + hi);
        if (auto c = bound_feasible(jobs, num_nodes, mid)) {
            hi = mid;
            cert = std::move(*c);
        } else {
            lo = mid;
        }
    }
    return {lo, hi, std::move(cert)};
}

}  // namespace dfrs
