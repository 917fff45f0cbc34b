#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfrs/allocation.hpp"
#include "dfrs/core.hpp"
#include "dfrs/packing.hpp"
#include "dfrs/schedulers.hpp"

namespace dfrs {

enum class JobStatus { pending, running, paused, penalty, complete };

/// Mutable per-job simulation state.
struct JobRuntime {
    const JobSpec* spec = nullptr;
    JobStatus status = JobStatus::pending;
    bool submitted = false;
    bool rejected_forever = false;
    double virtual_time = 0.0;
    double yield = 0.0;
    std::vector<int> mapping;  // task -> node while mapped
    double penalty_until = -1.0;
    double start_time = -1.0;
    double completion_time = -1.0;
    int preemptions = 0;
    int migrations = 0;
    int resumes = 0;
    long long epoch = 0;  // invalidates queued completion predictions
    std::vector<std::pair<double, double>> rate_history;  // (time, progress rate)

    bool mapped() const { return status == JobStatus::running || status == JobStatus::penalty; }
};

/// Preemption/migration accounting. bytes are task-image transfers:
/// one write per preempted task, one read per resumed task, save+restore
/// for each migrated task.
struct Ledger {
    long long preemptions = 0;
    long long migrations = 0;
    long long resumes = 0;
    double preempt_bytes = 0.0;  // pause writes + resume reads
    double migrate_bytes = 0.0;
    std::map<int, int> per_job_preemptions;
    std::map<int, int> per_job_migrations;

    double bytes_moved() const { return preempt_bytes + migrate_bytes; }
};

struct JobRecord {
    int id = 0;
    double release = 0.0;
    double start = -1.0;
    double completion = -1.0;
    double proc_time = 0.0;
    int num_tasks = 1;
    double cpu_need = 1.0;
    double mem_req = 0.0;
    int preemptions = 0;
    int migrations = 0;
    int resumes = 0;
    double virtual_time = 0.0;
    double yield_integral = 0.0;
    bool rejected = false;
};

struct CurvePoint {
    double time = 0.0;
    double demand = 0.0;       // sum of cpu_need * num_tasks over live jobs
    double utilization = 0.0;  // sum of yield * cpu_need * num_tasks over progressing jobs
};

struct SimReport {
    std::vector<JobRecord> jobs;
    Ledger ledger;
    std::vector<CurvePoint> curve;
    std::size_t event_count = 0;
    double first_release = 0.0;
    double last_completion = 0.0;
    std::vector<int> rejected_ids;
};

enum class AlgorithmKind { dfrs, fcfs, easy, equipartition };

struct Algorithm {
    AlgorithmKind kind = AlgorithmKind::dfrs;
    PolicyConfig policy;
    std::string name;
};

struct SimConfig {
    double penalty = 300.0;  // seconds of dead time per preempt/resume/migrate
    std::ostream* event_log = nullptr;
    bool validate = true;  // re-check capacity invariants at every change
};

/// One discrete-event simulation: fluid yields between events, lazy
/// completion re-prediction, a rescheduling penalty that reserves the new
/// allocation at zero progress, and per-event demand/utilization sampling.
class Simulation {
  public:
    Simulation(std::vector<JobSpec> trace, Algorithm algo, ClusterConfig cluster, SimConfig cfg)
        : trace_(std::move(trace)), algo_(algo), cluster_(cluster), cfg_(cfg) {
        cluster_.validate();
        if (trace_.empty()) throw std::invalid_argument("simulation: empty trace");
        for (const auto& j : trace_) j.validate();
        if (algo_.kind == AlgorithmKind::equipartition) {
            if (cluster_.num_nodes != 1)
                throw std::invalid_argument("equipartition: single-node abstraction only");
            for (const auto& j : trace_)
                if (j.num_tasks != 1)
                    throw std::invalid_argument("equipartition: one-task jobs only");
        }
    }

    SimReport run() {
        init();
        while (!events_.empty()) {
            Event e = events_.top();
            events_.pop();
            if (e.kind == EventKind::completion) {
                JobRuntime& j = jobs_[static_cast<std::size_t>(e.job)];
                if (e.epoch != j.epoch || !j.mapped()) continue;  // stale prediction
            }
            if (e.kind == EventKind::penalty_end) {
                JobRuntime& j = jobs_[static_cast<std::size_t>(e.job)];
                if (j.status != JobStatus::penalty ||
                    std::abs(j.penalty_until - e.time) > 1e-9)
                    continue;  // superseded by a newer penalty
            }
            advance_to(e.time);
            ++report_.event_count;
            dispatch(e);
            sample_curve();
        }
        finalize();
        return std::move(report_);
    }

  private:
    enum class EventKind { completion = 0, penalty_end = 1, submit = 2, tick = 3 };

    struct Event {
        double time;
        EventKind kind;
        int job;  // -1 for ticks
        long long epoch;

        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            if (kind != o.kind) return kind > o.kind;
            return job > o.job;
        }
    };

    // ---- setup ----------------------------------------------------------

    void init() {
        jobs_.clear();
        jobs_.resize(trace_.size());
        nodes_.assign(static_cast<std::size_t>(cluster_.num_nodes), NodeState{});
        for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i].node_id = static_cast<int>(i);
        first_release_ = infinity();
        for (std::size_t i = 0; i < trace_.size(); ++i) {
            jobs_[i].spec = &trace_[i];
            if (!index_of_.emplace(trace_[i].id, static_cast<int>(i)).second)
                throw std::invalid_argument("simulation: duplicate job id " +
                                            std::to_string(trace_[i].id));
            first_release_ = std::min(first_release_, trace_[i].release);
            events_.push({trace_[i].release, EventKind::submit, static_cast<int>(i), 0});
        }
        if (algo_.kind == AlgorithmKind::fcfs)
            batch_.emplace(BatchScheduler::Mode::fcfs, cluster_.num_nodes);
        if (algo_.kind == AlgorithmKind::easy)
            batch_.emplace(BatchScheduler::Mode::easy, cluster_.num_nodes);
        if (algo_.kind == AlgorithmKind::dfrs &&
            algo_.policy.periodic != PeriodicAction::none) {
            if (!(algo_.policy.period > 0.0))
                throw std::invalid_argument("simulation: periodic policy needs period > 0");
            events_.push({first_release_ + algo_.policy.period, EventKind::tick, -1, 0});
        }
        now_ = first_release_;
        report_ = SimReport{};
        report_.first_release = first_release_;
    }

    // ---- time integration ------------------------------------------------

    void advance_to(double t) {
        if (t < now_ - 1e-9) throw std::logic_error("simulation: time went backwards");
        for (auto& j : jobs_) {
            if (j.status != JobStatus::running) continue;
            double from = std::max(now_, j.penalty_until);
            if (t > from && j.yield > 0.0) j.virtual_time += j.yield * (t - from);
        }
        now_ = std::max(now_, t);
    }

    // ---- event dispatch ---------------------------------------------------

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::submit: current_kind_ = "submit"; handle_submit(e.job); break;
            case EventKind::completion: current_kind_ = "completion"; handle_completion(e.job); break;
            case EventKind::penalty_end: current_kind_ = "penalty_end"; handle_penalty_end(e.job); break;
            case EventKind::tick: current_kind_ = "tick"; handle_tick(); break;
        }
    }

    void handle_submit(int idx) {
        JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
        j.submitted = true;
        log_event("submit", j, {});
        switch (algo_.kind) {
            case AlgorithmKind::fcfs:
            case AlgorithmKind::easy: {
                std::size_t before = batch_->rejected().size();
                apply_batch_starts(batch_->on_submit(*j.spec, now_));
                if (batch_->rejected().size() > before) reject_forever(j);
                return;
            }
            case AlgorithmKind::equipartition:
                equi_rebalance();
                return;
            case AlgorithmKind::dfrs: break;
        }

        if (!fits_empty_cluster(*j.spec)) {
            reject_forever(j);
            return;
        }
        switch (algo_.policy.on_submit) {
            case SubmitAction::none:
                break;
            case SubmitAction::greedy: {
                if (auto placement = greedy_place(view_of(*j.spec), nodes_)) {
                    start_job(j, *placement);
                    refresh_allocation();
                }
                break;
            }
            case SubmitAction::greedy_p:
            case SubmitAction::greedy_pm: {
                bool migrate = algo_.policy.on_submit == SubmitAction::greedy_pm;
                std::vector<RunningJob> running;
                for (auto& other : jobs_)
                    if (other.mapped())
                        running.push_back({view_of(*other.spec), other.mapping,
                                           priority_key(other)});
                AdmitPlan plan;
                AdmitStatus st = greedy_admit(view_of(*j.spec), priority_key(j), running,
                                              nodes_, migrate, plan);
                if (st == AdmitStatus::impossible) {
                    reject_forever(j);
                    return;
                }
                if (st == AdmitStatus::postponed) break;
                for (int id : plan.pause_ids) pause_job(job_by_id(id));
                // Vacate every migrating job before placing any of them.
                std::vector<int> moving;
                for (const auto& [id, new_map] : plan.moved)
                    if (begin_migration(job_by_id(id), new_map)) moving.push_back(id);
                for (int id : moving) finish_migration(job_by_id(id), plan.moved.at(id));
                start_job(j, plan.placement);
                refresh_allocation();
                break;
            }
            case SubmitAction::mcb8:
                global_remap();
                break;
        }
    }

    void handle_completion(int idx) {
        JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
        double p = j.spec->proc_time;
        if (j.virtual_time < p - 1e-6 * std::max(1.0, p))
            throw std::logic_error("simulation: completion fired before full progress");
        j.virtual_time = p;
        unmap_job(j);
        j.status = JobStatus::complete;
        j.completion_time = now_;
        j.yield = 0.0;
        j.rate_history.emplace_back(now_, 0.0);
        log_event("complete", j, {});

        switch (algo_.kind) {
            case AlgorithmKind::fcfs:
            case AlgorithmKind::easy:
                apply_batch_starts(batch_->on_complete(j.spec->id, now_));
                return;
            case AlgorithmKind::equipartition:
                equi_rebalance();
                return;
            case AlgorithmKind::dfrs: break;
        }
        switch (algo_.policy.on_complete) {
            case CompleteAction::none: break;
            case CompleteAction::greedy: resume_scan(); break;
            case CompleteAction::mcb8: global_remap(); break;
        }
    }

    void handle_penalty_end(int idx) {
        JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
        j.status = JobStatus::running;
        j.rate_history.emplace_back(now_, j.yield);
        predict_completion(j);
        log_event("penalty_end", j, {});
    }

    void handle_tick() {
        bool any_incomplete = false, any_live = false;
        for (const auto& j : jobs_) {
            if (j.rejected_forever) continue;
            if (j.status != JobStatus::complete) any_incomplete = true;
            if (j.submitted && j.status != JobStatus::complete) any_live = true;
        }
        if (any_incomplete)
            events_.push({now_ + algo_.policy.period, EventKind::tick, -1, 0});
        if (!any_live) return;
        log_tick();
        global_remap();
    }

    // ---- DFRS mechanics ---------------------------------------------------

    PriorityKey priority_key(const JobRuntime& j) const {
        return {priority(now_ - j.spec->release, j.virtual_time), j.spec->id};
    }

    JobRuntime& job_by_id(int id) { return jobs_[static_cast<std::size_t>(index_of_.at(id))]; }

    bool fits_empty_cluster(const JobSpec& spec) const {
        std::vector<NodeState> empty(nodes_.size());
        return greedy_place(view_of(spec), empty).has_value();
    }

    void reject_forever(JobRuntime& j) {
        j.rejected_forever = true;
        report_.rejected_ids.push_back(j.spec->id);
        log_event("reject", j, {});
    }

    void map_job(JobRuntime& j, const std::vector<int>& mapping) {
        j.mapping = mapping;
        for (std::size_t t = 0; t < mapping.size(); ++t)
            nodes_[static_cast<std::size_t>(mapping[t])].add_task(
                j.spec->id, static_cast<int>(t), j.spec->cpu_need, j.spec->mem_req);
    }

    void unmap_job(JobRuntime& j) {
        for (std::size_t t = 0; t < j.mapping.size(); ++t)
            nodes_[static_cast<std::size_t>(j.mapping[t])].remove_task(
                j.spec->id, static_cast<int>(t), j.spec->cpu_need, j.spec->mem_req);
        j.mapping.clear();
    }

    void arm_penalty(JobRuntime& j) {
        if (cfg_.penalty <= 0.0) return;
        j.penalty_until = now_ + cfg_.penalty;
        if (j.mapped()) {
            j.status = JobStatus::penalty;
            events_.push({j.penalty_until, EventKind::penalty_end,
                          index_of_.at(j.spec->id), 0});
        }
    }

    void start_job(JobRuntime& j, const std::vector<int>& placement) {
        map_job(j, placement);
        j.status = JobStatus::running;
        if (j.start_time < 0.0) j.start_time = now_;
        log_event("start", j, placement);
    }

    void pause_job(JobRuntime& j) {
        ++ledger_.preemptions;
        ++ledger_.per_job_preemptions[j.spec->id];
        ++j.preemptions;
        ledger_.preempt_bytes += j.spec->num_tasks * j.spec->mem_req * cluster_.node_mem_bytes;
        log_event("pause", j, j.mapping);
        unmap_job(j);
        j.status = JobStatus::paused;
        j.yield = 0.0;
        j.rate_history.emplace_back(now_, 0.0);
        j.penalty_until = now_ + cfg_.penalty;  // re-armed again on resume
        ++j.epoch;
    }

    void resume_job(JobRuntime& j, const std::vector<int>& placement) {
        ++ledger_.resumes;
        ++j.resumes;
        ledger_.preempt_bytes += j.spec->num_tasks * j.spec->mem_req * cluster_.node_mem_bytes;
        map_job(j, placement);
        j.status = JobStatus::running;
        arm_penalty(j);
        log_event("resume", j, placement);
    }

    /// Books a migration (counts, bytes, log) and vacates the old nodes.
    /// Returns false when the new mapping is the same node multiset: tasks
    /// are interchangeable, so nothing actually moves.
    bool begin_migration(JobRuntime& j, const std::vector<int>& new_mapping) {
        std::vector<int> old_sorted = j.mapping, new_sorted = new_mapping;
        std::sort(old_sorted.begin(), old_sorted.end());
        std::sort(new_sorted.begin(), new_sorted.end());
        if (old_sorted == new_sorted) return false;
        std::vector<int> common;
        std::set_intersection(old_sorted.begin(), old_sorted.end(), new_sorted.begin(),
                              new_sorted.end(), std::back_inserter(common));
        int moved = j.spec->num_tasks - static_cast<int>(common.size());
        ++ledger_.migrations;
        ++ledger_.per_job_migrations[j.spec->id];
        ++j.migrations;
        ledger_.migrate_bytes += 2.0 * moved * j.spec->mem_req * cluster_.node_mem_bytes;
        unmap_job(j);
        log_event("migrate", j, new_mapping);
        return true;
    }

    void finish_migration(JobRuntime& j, const std::vector<int>& new_mapping) {
        map_job(j, new_mapping);
        j.status = JobStatus::running;
        arm_penalty(j);
    }

    /// Paused and pending jobs re-enter in decreasing priority order.
    void resume_scan() {
        std::vector<int> waiting;
        for (auto& j : jobs_)
            if (j.submitted && !j.rejected_forever &&
                (j.status == JobStatus::pending || j.status == JobStatus::paused))
                waiting.push_back(index_of_.at(j.spec->id));
        std::sort(waiting.begin(), waiting.end(), [&](int a, int b) {
            return priority_key(jobs_[static_cast<std::size_t>(a)])
                .outranks(priority_key(jobs_[static_cast<std::size_t>(b)]));
        });
        bool changed = false;
        for (int idx : waiting) {
            JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
            if (auto placement = greedy_place(view_of(*j.spec), nodes_)) {
                if (j.status == JobStatus::paused) resume_job(j, *placement);
                else start_job(j, *placement);
                changed = true;
            }
        }
        if (changed) refresh_allocation();
    }

    /// Global MCB8 (or MCB8-stretch) pass over every live job.
    void global_remap() {
        std::vector<int> live;
        for (std::size_t i = 0; i < jobs_.size(); ++i)
            if (jobs_[i].submitted && !jobs_[i].rejected_forever &&
                jobs_[i].status != JobStatus::complete)
                live.push_back(static_cast<int>(i));
        if (live.empty()) return;

        std::vector<JobProgress> progress;
        for (int idx : live) {
            const JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
            if (j.mapped())
                progress.push_back({j.spec->id, now_ - j.spec->release, j.virtual_time});
        }
        std::set<int> pinned = remap_pin_set(progress, algo_.policy.remap_limit);

        bool stretch = algo_.policy.periodic == PeriodicAction::mcb8_stretch;
        PackOutcome outcome;
        if (stretch) {
            std::vector<StretchJob> sj;
            for (int idx : live) {
                const JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
                PackJob pj{j.spec->id, j.spec->num_tasks, j.spec->cpu_need, j.spec->mem_req,
                           priority_key(j),
                           pinned.count(j.spec->id) ? j.mapping : std::vector<int>{}};
                sj.push_back({std::move(pj), now_ - j.spec->release, j.virtual_time});
            }
            outcome = stretch_search(std::move(sj), algo_.policy.period, cluster_.num_nodes);
        } else {
            std::vector<PackJob> pj;
            for (int idx : live) {
                const JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
                pj.push_back({j.spec->id, j.spec->num_tasks, j.spec->cpu_need, j.spec->mem_req,
                              priority_key(j),
                              pinned.count(j.spec->id) ? j.mapping : std::vector<int>{}});
            }
            outcome = max_yield_search(std::move(pj), cluster_.num_nodes);
        }

        // Apply the mapping diff in two phases so that jobs swapping nodes
        // never overlap transiently: vacate every mover first, then place.
        enum class Apply { migrate, resume, start };
        std::vector<std::pair<int, Apply>> deferred;
        for (int idx : live) {
            JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
            auto it = outcome.mapping.find(j.spec->id);
            bool packed = it != outcome.mapping.end();
            if (j.mapped()) {
                if (!packed) pause_job(j);
                else if (begin_migration(j, it->second)) deferred.push_back({idx, Apply::migrate});
            } else if (packed) {
                deferred.push_back({idx, j.status == JobStatus::paused ? Apply::resume
                                                                       : Apply::start});
            }
        }
        for (const auto& [idx, apply] : deferred) {
            JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
            const std::vector<int>& mapping = outcome.mapping.at(j.spec->id);
            switch (apply) {
                case Apply::migrate: finish_migration(j, mapping); break;
                case Apply::resume: resume_job(j, mapping); break;
                case Apply::start: start_job(j, mapping); break;
            }
        }
        refresh_allocation(stretch ? &outcome : nullptr);
    }

    /// Recomputes yields for the current mapping and re-predicts completions.
    void refresh_allocation(const PackOutcome* stretch_outcome = nullptr) {
        AllocProblem problem;
        problem.num_nodes = cluster_.num_nodes;
        std::vector<int> mapped_idx;
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            if (!jobs_[i].mapped()) continue;
            problem.jobs.push_back({jobs_[i].spec->id, jobs_[i].spec->cpu_need, jobs_[i].mapping});
            mapped_idx.push_back(static_cast<int>(i));
        }
        if (problem.jobs.empty()) return;

        std::vector<double> yields;
        if (stretch_outcome) {
            StretchContext ctx;
            ctx.period = algo_.policy.period;
            std::vector<double> initial;
            for (int idx : mapped_idx) {
                const JobRuntime& j = jobs_[static_cast<std::size_t>(idx)];
                ctx.flow_time.push_back(now_ - j.spec->release);
                ctx.virtual_time.push_back(j.virtual_time);
                auto it = stretch_outcome->yields.find(j.spec->id);
                initial.push_back(it != stretch_outcome->yields.end() ? it->second : 0.01);
            }
            StretchMode mode = algo_.policy.optimizer == Optimizer::avg ? StretchMode::average
                                                                        : StretchMode::max;
            yields = optimize_stretch(problem, ctx, initial, mode);
        } else {
            double floor = min_yield_base(problem);
            yields = algo_.policy.optimizer == Optimizer::avg ? optimize_avg(problem, floor)
                                                              : optimize_maxmin(problem, floor);
        }

        for (std::size_t k = 0; k < mapped_idx.size(); ++k) {
            JobRuntime& j = jobs_[static_cast<std::size_t>(mapped_idx[k])];
            j.yield = yields[k];
            double rate = j.status == JobStatus::penalty ? 0.0 : j.yield;
            if (j.rate_history.empty() || j.rate_history.back().second != rate ||
                j.rate_history.back().first != now_)
                j.rate_history.emplace_back(now_, rate);
            predict_completion(j);
        }
        if (cfg_.validate) check_capacity();
    }

    void predict_completion(JobRuntime& j) {
        ++j.epoch;
        if (!j.mapped() || j.yield <= 0.0) return;
        double origin = j.status == JobStatus::penalty ? j.penalty_until : now_;
        double remaining = (j.spec->proc_time - j.virtual_time) / j.yield;
        double when = std::max(origin + remaining, now_);
        events_.push({when, EventKind::completion, index_of_.at(j.spec->id), j.epoch});
    }

    void check_capacity() const {
        std::vector<double> cpu(nodes_.size(), 0.0), mem(nodes_.size(), 0.0);
        for (const auto& j : jobs_) {
            if (!j.mapped()) continue;
            for (int node : j.mapping) {
                cpu[static_cast<std::size_t>(node)] += j.yield * j.spec->cpu_need;
                mem[static_cast<std::size_t>(node)] += j.spec->mem_req;
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (cpu[i] > 1.0 + kResourceTol)
                throw std::logic_error("simulation: CPU capacity exceeded on node " +
                                       std::to_string(i));
            if (mem[i] > 1.0 + kResourceTol)
                throw std::logic_error("simulation: memory capacity exceeded on node " +
                                       std::to_string(i));
        }
    }

    // ---- batch and equal-share policies -----------------------------------

    void apply_batch_starts(const std::vector<BatchScheduler::Start>& starts) {
        for (const auto& s : starts) {
            JobRuntime& j = job_by_id(s.job_id);
            start_job(j, s.nodes);
            j.yield = 1.0;
            j.rate_history.emplace_back(now_, 1.0);
            predict_completion(j);
        }
        if (cfg_.validate && !starts.empty()) check_capacity();
    }

    void equi_rebalance() {
        int active = 0;
        for (const auto& j : jobs_)
            if (j.submitted && !j.rejected_forever && j.status != JobStatus::complete) ++active;
        if (active == 0) return;
        double share = equipartition_share(active);
        for (auto& j : jobs_) {
            if (!j.submitted || j.rejected_forever || j.status == JobStatus::complete) continue;
            if (!j.mapped()) start_job(j, std::vector<int>(static_cast<std::size_t>(
                                              j.spec->num_tasks), 0));
            j.yield = std::min(1.0, share / j.spec->cpu_need);
            j.rate_history.emplace_back(now_, j.yield);
            predict_completion(j);
        }
        if (cfg_.validate) check_capacity();
    }

    // ---- reporting --------------------------------------------------------

    void sample_curve() {
        double demand = 0.0, util = 0.0;
        for (const auto& j : jobs_) {
            if (!j.submitted || j.rejected_forever || j.status == JobStatus::complete) continue;
            demand += j.spec->cpu_need * j.spec->num_tasks;
            if (j.status == JobStatus::running)
                util += j.yield * j.spec->cpu_need * j.spec->num_tasks;
        }
        if (!report_.curve.empty() && report_.curve.back().time == now_) {
            report_.curve.back().demand = demand;
            report_.curve.back().utilization = util;
        } else {
            report_.curve.push_back({now_, demand, util});
        }
    }

    void finalize() {
        report_.last_completion = first_release_;
        for (auto& j : jobs_) {
            if (!j.rejected_forever && j.status != JobStatus::complete)
                throw std::logic_error("simulation: drained with incomplete job " +
                                       std::to_string(j.spec->id));
            JobRecord r;
            r.id = j.spec->id;
            r.release = j.spec->release;
            r.start = j.start_time;
            r.completion = j.completion_time;
            r.proc_time = j.spec->proc_time;
            r.num_tasks = j.spec->num_tasks;
            r.cpu_need = j.spec->cpu_need;
            r.mem_req = j.spec->mem_req;
            r.preemptions = j.preemptions;
            r.migrations = j.migrations;
            r.resumes = j.resumes;
            r.virtual_time = j.virtual_time;
            r.rejected = j.rejected_forever;
            double integral = 0.0;
            for (std::size_t k = 0; k + 1 < j.rate_history.size(); ++k)
                integral += j.rate_history[k].second *
                            (j.rate_history[k + 1].first - j.rate_history[k].first);
            r.yield_integral = integral;
            if (!j.rejected_forever)
                report_.last_completion = std::max(report_.last_completion, j.completion_time);
            report_.jobs.push_back(std::move(r));
        }
        report_.ledger = ledger_;
    }

    void log_event(const char* action, const JobRuntime& j, const std::vector<int>& nodes) {
        if (!cfg_.event_log) return;
        *cfg_.event_log << now_ << '\t' << current_kind_ << '\t' << j.spec->id << '\t' << action
                        << '\t';
        for (std::size_t i = 0; i < nodes.size(); ++i)
            *cfg_.event_log << (i ? "," : "") << nodes[i];
        *cfg_.event_log << '\n';
    }

    void log_tick() {
        if (cfg_.event_log) *cfg_.event_log << now_ << "\ttick\t-\tremap\t\n";
    }

    std::vector<JobSpec> trace_;
    Algorithm algo_;
    ClusterConfig cluster_;
    SimConfig cfg_;

    double now_ = 0.0;
    double first_release_ = 0.0;
    const char* current_kind_ = "";
    std::vector<JobRuntime> jobs_;
    std::map<int, int> index_of_;
    std::vector<NodeState> nodes_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    std::optional<BatchScheduler> batch_;
    Ledger ledger_;
    SimReport report_;
};

inline SimReport run_simulation(std::vector<JobSpec> trace, const Algorithm& algo,
                                const ClusterConfig& cluster, const SimConfig& cfg = {}) {
    Simulation sim(std::move(trace), algo, cluster, cfg);
    return sim.run();
}

}  // namespace dfrs
