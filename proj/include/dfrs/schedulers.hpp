#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfrs/core.hpp"

namespace dfrs {

enum class SubmitAction { none, greedy, greedy_p, greedy_pm, mcb8 };
enum class CompleteAction { none, greedy, mcb8 };
enum class PeriodicAction { none, mcb8, mcb8_stretch };
enum class Optimizer { min, avg, max };
enum class RemapLimitKind { none, mvt, mft };

struct RemapLimit {
    RemapLimitKind kind = RemapLimitKind::none;
    double bound = 0.0;  // seconds
};

/// One row of the policy-composition table, plus the scheduling period.
struct PolicyConfig {
    SubmitAction on_submit = SubmitAction::none;
    CompleteAction on_complete = CompleteAction::none;
    PeriodicAction periodic = PeriodicAction::none;
    Optimizer optimizer = Optimizer::min;
    RemapLimit remap_limit;
    double period = 600.0;
};

/// Jobs whose progress is below the remap bound may be paused but not moved:
/// they hand their current mapping to the packer as pinned nodes.
struct JobProgress {
    int id = 0;
    double flow_time = 0.0;
    double virtual_time = 0.0;
};

inline std::set<int> remap_pin_set(const std::vector<JobProgress>& jobs, const RemapLimit& limit) {
    std::set<int> pinned;
    if (limit.kind == RemapLimitKind::none) return pinned;
    for (const auto& j : jobs) {
        double v = limit.kind == RemapLimitKind::mft ? j.flow_time : j.virtual_time;
        if (v < limit.bound) pinned.insert(j.id);
    }
    return pinned;
}

/// Places each task on the memory-feasible node with the lowest CPU load
/// (ties to the lowest node id), updating loads between tasks. All or
/// nothing: returns no placement when some task cannot fit.
inline std::optional<std::vector<int>> greedy_place(const JobView& job,
                                                    const std::vector<NodeState>& nodes) {
    std::vector<double> cpu(nodes.size()), mem(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        cpu[i] = nodes[i].cpu_load;
        mem[i] = nodes[i].mem_used;
    }
    std::vector<int> placement;
    placement.reserve(job.num_tasks);
    for (int t = 0; t < job.num_tasks; ++t) {
        int best = -1;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (job.mem_req > 1.0 - mem[i] + kResourceTol) continue;
            if (best < 0 || cpu[i] < cpu[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
        }
        if (best < 0) return std::nullopt;
        cpu[static_cast<std::size_t>(best)] += job.cpu_need;
        mem[static_cast<std::size_t>(best)] += job.mem_req;
        placement.push_back(best);
    }
    return placement;
}

struct RunningJob {
    JobView job;
    std::vector<int> mapping;  // task -> node
    PriorityKey priority;
};

struct AdmitPlan {
    std::vector<int> placement;               // incoming job's task -> node
    std::vector<int> pause_ids;               // jobs to pause
    std::map<int, std::vector<int>> moved;    // migrations (greedyPM only)
};

enum class AdmitStatus { placed, postponed, impossible };

/// Greedy admission with pausing (and optionally migration). Marks running
/// jobs the incoming one outranks, in increasing priority order, until the
/// incoming job could be placed were they paused; then sweeps the marked
/// jobs in decreasing priority order, keeping any whose memory still fits.
/// With `migrate` set, still-marked jobs are rescheduled elsewhere when
/// possible instead of being paused.
inline AdmitStatus greedy_admit(const JobView& incoming, PriorityKey incoming_priority,
                                const std::vector<RunningJob>& running,
                                const std::vector<NodeState>& nodes, bool migrate,
                                AdmitPlan& plan) {
    plan = AdmitPlan{};
    std::vector<NodeState> empty(nodes.size());
    for (std::size_t i = 0; i < empty.size(); ++i) empty[i].node_id = static_cast<int>(i);
    if (!greedy_place(incoming, empty)) return AdmitStatus::impossible;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < running.size(); ++i)
        if (incoming_priority.outranks(running[i].priority)) candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return running[b].priority.outranks(running[a].priority);  // increasing priority
    });

    std::vector<double> cpu(nodes.size()), mem(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        cpu[i] = nodes[i].cpu_load;
        mem[i] = nodes[i].mem_used;
    }
    auto remove_job = [&](const RunningJob& r) {
        for (int node : r.mapping) {
            cpu[static_cast<std::size_t>(node)] -= r.job.cpu_need;
            mem[static_cast<std::size_t>(node)] -= r.job.mem_req;
        }
    };
    auto add_job = [&](const RunningJob& r) {
        for (int node : r.mapping) {
            cpu[static_cast<std::size_t>(node)] += r.job.cpu_need;
            mem[static_cast<std::size_t>(node)] += r.job.mem_req;
        }
    };
    auto try_place = [&](const JobView& j) -> std::optional<std::vector<int>> {
        std::vector<NodeState> view(nodes.size());
        for (std::size_t i = 0; i < view.size(); ++i) {
            view[i].node_id = static_cast<int>(i);
            view[i].cpu_load = cpu[i];
            view[i].mem_used = mem[i];
        }
        return greedy_place(j, view);
    };

    std::vector<std::size_t> marked;
    std::optional<std::vector<int>> placement = try_place(incoming);
    std::size_t next = 0;
    while (!placement && next < candidates.size()) {
        marked.push_back(candidates[next]);
        remove_job(running[candidates[next]]);
        ++next;
        placement = try_place(incoming);
    }
    if (!placement) return AdmitStatus::postponed;

    // Commit the incoming job's tentative placement.
    for (int node : *placement) {
        cpu[static_cast<std::size_t>(node)] += incoming.cpu_need;
        mem[static_cast<std::size_t>(node)] += incoming.mem_req;
    }
    plan.placement = *placement;

    // Unmark sweep, decreasing priority: keep jobs whose memory still fits.
    std::sort(marked.begin(), marked.end(), [&](std::size_t a, std::size_t b) {
        return running[a].priority.outranks(running[b].priority);
    });
    std::vector<std::size_t> still_marked;
    for (std::size_t idx : marked) {
        const RunningJob& r = running[idx];
        std::map<int, double> extra;
        for (int node : r.mapping) extra[node] += r.job.mem_req;
        bool fits = true;
        for (const auto& [node, need] : extra)
            if (need > 1.0 - mem[static_cast<std::size_t>(node)] + kResourceTol) { fits = false; break; }
        if (fits) add_job(r);
        else still_marked.push_back(idx);
    }

    for (std::size_t idx : still_marked) {
        const RunningJob& r = running[idx];
        if (migrate) {
            if (auto alt = try_place(r.job)) {
                RunningJob moved = r;
                moved.mapping = *alt;
                add_job(moved);
                plan.moved[r.job.id] = std::move(*alt);
                continue;
            }
        }
        plan.pause_ids.push_back(r.job.id);
    }
    return AdmitStatus::placed;
}

/// Uniform share under the single-node fully-parallel abstraction.
inline double equipartition_share(int active_jobs) {
    if (active_jobs < 1) throw std::invalid_argument("equipartition_share: no active jobs");
    return 1.0 / active_jobs;
}

inline double harmonic(int n) {
    double h = 0.0;
    for (int i = 1; i <= n; ++i) h += 1.0 / i;
    return h;
}

/// Single-node adversarial instance for equal-share scheduling: two jobs of
/// length n-1 released at 0, then successively shorter jobs released
/// back-to-back, sized so that equal sharing finishes everything at r_n + n.
inline std::vector<JobSpec> equal_share_adversary(int n) {
    if (n < 3) throw std::invalid_argument("equal_share_adversary: n < 3");
    std::vector<JobSpec> jobs(static_cast<std::size_t>(n));
    double mem = std::min(0.1, 1.0 / n);
    for (int k = 0; k < n; ++k) {
        jobs[static_cast<std::size_t>(k)].id = k;
        jobs[static_cast<std::size_t>(k)].num_tasks = 1;
        jobs[static_cast<std::size_t>(k)].cpu_need = 1.0;
        jobs[static_cast<std::size_t>(k)].mem_req = mem;
        jobs[static_cast<std::size_t>(k)].proc_time =
            k < 2 ? static_cast<double>(n - 1) : static_cast<double>(n - 1) / k;
    }
    jobs[0].release = jobs[1].release = 0.0;
    for (int k = 2; k < n; ++k)
        jobs[static_cast<std::size_t>(k)].release =
            jobs[static_cast<std::size_t>(k - 1)].release +
            jobs[static_cast<std::size_t>(k - 1)].proc_time;
    return jobs;
}

/// The best max stretch of the instance's one-at-a-time schedule
/// (everything but the first job runs at release; the first job runs last).
inline double equal_share_adversary_serial_stretch(int n) {
    return 1.0 + harmonic(n - 1);
}

/// Batch scheduling over whole nodes: FCFS starts the queue head whenever
/// enough nodes are idle; EASY additionally reserves the earliest feasible
/// start for the head and backfills jobs that cannot delay that reservation.
/// Jobs occupy one dedicated node per task for exactly their processing
/// time, which EASY is allowed to know.
class BatchScheduler {
  public:
    enum class Mode { fcfs, easy };

    struct Start {
        int job_id = 0;
        std::vector<int> nodes;
    };

    BatchScheduler(Mode mode, int num_nodes) : mode_(mode), num_nodes_(num_nodes) {
        if (num_nodes < 1) throw std::invalid_argument("batch: num_nodes < 1");
        for (int i = 0; i < num_nodes; ++i) free_nodes_.insert(i);
    }

    std::vector<Start> on_submit(const JobSpec& job, double now) {
        if (job.num_tasks > num_nodes_) {
            rejected_.push_back(job.id);
            return {};
        }
        queue_.push_back({job.id, job.num_tasks, job.proc_time});
        return schedule(now);
    }

    std::vector<Start> on_complete(int job_id, double now) {
        for (auto it = running_.begin(); it != running_.end(); ++it) {
            if (it->id == job_id) {
                for (int n : it->nodes) free_nodes_.insert(n);
                running_.erase(it);
                break;
            }
        }
        return schedule(now);
    }

    const std::vector<int>& rejected() const { return rejected_; }
    bool queue_empty() const { return queue_.empty(); }
    double head_reservation() const { return reservation_time_; }
    int reservation_regressions() const { return regressions_; }

  private:
    struct Queued {
        int id;
        int width;
        double proc_time;
    };
    struct Running {
        int id;
        int width;
        double end;
        std::vector<int> nodes;
    };

    std::vector<int> take_nodes(int width) {
        std::vector<int> picked;
        auto it = free_nodes_.begin();
        for (int i = 0; i < width; ++i) picked.push_back(*it++);
        for (int n : picked) free_nodes_.erase(n);
        return picked;
    }

    Start start_job(const Queued& q, double now) {
        Start s{q.id, take_nodes(q.width)};
        running_.push_back({q.id, q.width, now + q.proc_time, s.nodes});
        return s;
    }

    std::vector<Start> schedule(double now) {
        std::vector<Start> starts;
        while (!queue_.empty() &&
               queue_.front().width <= static_cast<int>(free_nodes_.size())) {
            starts.push_back(start_job(queue_.front(), now));
            queue_.pop_front();
            reservation_holder_ = -1;
            reservation_time_ = infinity();
        }
        if (mode_ == Mode::fcfs || queue_.empty()) {
            if (queue_.empty()) {
                reservation_holder_ = -1;
                reservation_time_ = infinity();
            }
            return starts;
        }

        // Reservation: earliest time the head could start under FCFS.
        const Queued& head = queue_.front();
        std::vector<Running> ends = running_;
        std::sort(ends.begin(), ends.end(),
                  [](const Running& a, const Running& b) { return a.end < b.end; });
        int avail = static_cast<int>(free_nodes_.size());
        double shadow = now;
        int at_shadow = avail;
        for (std::size_t i = 0; i < ends.size();) {
            double t = ends[i].end;
            while (i < ends.size() && ends[i].end == t) avail += ends[i++].width;
            if (avail >= head.width) {
                shadow = t;
                at_shadow = avail;
                break;
            }
        }
        if (head.id == reservation_holder_) {
            if (shadow > reservation_time_ + 1e-9) ++regressions_;
        } else {
            reservation_holder_ = head.id;
        }
        reservation_time_ = shadow;
        int extra = at_shadow - head.width;

        // Backfill pass over the rest of the queue, in order.
        for (auto it = std::next(queue_.begin()); it != queue_.end();) {
            bool fits_now = it->width <= static_cast<int>(free_nodes_.size());
            bool before_shadow = now + it->proc_time <= reservation_time_ + 1e-9;
            bool within_extra = it->width <= extra;
            if (fits_now && (before_shadow || within_extra)) {
                if (!before_shadow) extra -= it->width;
                starts.push_back(start_job(*it, now));
                it = queue_.erase(it);
            } else {
                ++it;
            }
        }
        return starts;
    }

    Mode mode_;
    int num_nodes_;
    std::deque<Queued> queue_;
    std::vector<Running> running_;
    std::set<int> free_nodes_;
    std::vector<int> rejected_;
    int reservation_holder_ = -1;
    double reservation_time_ = infinity();
    int regressions_ = 0;
};

}  // namespace dfrs
