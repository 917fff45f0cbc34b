#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dfrs/bound.hpp"
#include "dfrs/core.hpp"
#include "dfrs/engine.hpp"

namespace dfrs {

struct StretchStats {
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Bounded-stretch statistics over the completed jobs of a run.
inline StretchStats bounded_stretch_stats(const SimReport& report,
                                          double threshold = kStretchThreshold) {
    StretchStats s;
    std::size_t n = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& j : report.jobs) {
        if (j.rejected) continue;
        double v = bounded_stretch(j.completion - j.release, j.proc_time, threshold);
        s.max = std::max(s.max, v);
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    if (n > 0) {
        s.mean = sum / n;
        s.stddev = std::sqrt(std::max(0.0, sum_sq / n - s.mean * s.mean));
    }
    return s;
}

inline double max_raw_stretch(const SimReport& report) {
    double worst = 0.0;
    for (const auto& j : report.jobs)
        if (!j.rejected) worst = std::max(worst, raw_stretch(j.completion - j.release, j.proc_time));
    return worst;
}

/// Ratio between the maximum bounded stretch achieved and the offline lower
/// bound on the optimal maximum stretch.
inline double degradation(const SimReport& report, const BoundResult& bound,
                          double threshold = kStretchThreshold) {
    return bounded_stretch_stats(report, threshold).max / bound.s_lower;
}

struct Underutilization {
    double node_seconds = 0.0;
    double normalized = 0.0;  // fraction of the total work required by the trace
};

/// Integral of min(capacity, demand) - utilization over the run, computed
/// exactly from the piecewise-constant curves.
inline Underutilization underutilization(const SimReport& report, int num_nodes) {
    Underutilization u;
    for (std::size_t i = 0; i + 1 < report.curve.size(); ++i) {
        const CurvePoint& a = report.curve[i];
        double dt = report.curve[i + 1].time - a.time;
        u.node_seconds += (std::min(static_cast<double>(num_nodes), a.demand) - a.utilization) * dt;
    }
    double total_work = 0.0;
    for (const auto& j : report.jobs)
        if (!j.rejected) total_work += j.cpu_need * j.num_tasks * j.proc_time;
    if (total_work > 0.0) u.normalized = u.node_seconds / total_work;
    return u;
}

struct BandwidthStats {
    double total_gbps = 0.0;
    double preempt_gbps = 0.0;
    double migrate_gbps = 0.0;
    double preemptions_per_hour = 0.0;
    double migrations_per_hour = 0.0;
    double preemptions_per_job = 0.0;
    double migrations_per_job = 0.0;
};

inline BandwidthStats bandwidth_stats(const Ledger& ledger, double span, std::size_t num_jobs) {
    if (!(span > 0.0)) throw std::invalid_argument("bandwidth_stats: span <= 0");
    BandwidthStats b;
    const double gb = 1e9;
    b.preempt_gbps = ledger.preempt_bytes / span / gb;
    b.migrate_gbps = ledger.migrate_bytes / span / gb;
    b.total_gbps = ledger.bytes_moved() / span / gb;
    double hours = span / 3600.0;
    b.preemptions_per_hour = ledger.preemptions / hours;
    b.migrations_per_hour = ledger.migrations / hours;
    if (num_jobs > 0) {
        b.preemptions_per_job = static_cast<double>(ledger.preemptions) / num_jobs;
        b.migrations_per_job = static_cast<double>(ledger.migrations) / num_jobs;
    }
    return b;
}

/// Everything the experiment driver reports for one run.
struct MetricsRecord {
    StretchStats bounded;
    double max_raw_stretch = 0.0;
    std::optional<double> degradation;  // absent when the bound was not computed
    Underutilization underutil;
    BandwidthStats bandwidth;
};

inline MetricsRecord compute_metrics(const SimReport& report, int num_nodes,
                                     const std::optional<BoundResult>& bound,
                                     double threshold = kStretchThreshold) {
    MetricsRecord m;
    m.bounded = bounded_stretch_stats(report, threshold);
    m.max_raw_stretch = max_raw_stretch(report);
    if (bound) m.degradation = m.bounded.max / bound->s_lower;
    m.underutil = underutilization(report, num_nodes);
    double span = report.last_completion - report.first_release;
    std::size_t completed = 0;
    for (const auto& j : report.jobs)
        if (!j.rejected) ++completed;
    if (span > 0.0) m.bandwidth = bandwidth_stats(report.ledger, span, completed);
    return m;
}

}  // namespace dfrs
