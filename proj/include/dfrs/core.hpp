#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dfrs {

/// Absolute tolerance for all resource (CPU/memory) comparisons.
inline constexpr double kResourceTol = 1e-9;

/// Turnaround threshold (seconds) below which bounded stretch clamps.
inline constexpr double kStretchThreshold = 10.0;

inline double infinity() { return std::numeric_limits<double>::infinity(); }

/// Immutable description of a submitted job. All tasks of a job share the
/// same CPU need and memory requirement and progress at the same rate.
/// proc_time is hidden from the non-clairvoyant schedulers (see JobView).
struct JobSpec {
    int id = 0;
    double release = 0.0;     // submission time, seconds
    int num_tasks = 1;
    double cpu_need = 1.0;    // fraction of one node's CPU, per task
    double mem_req = 0.1;     // fraction of one node's memory, per task
    double proc_time = 1.0;   // dedicated-system execution time, seconds

    void validate() const {
        if (release < 0.0) throw std::invalid_argument("job " + std::to_string(id) + ": negative release");
        if (num_tasks < 1) throw std::invalid_argument("job " + std::to_string(id) + ": num_tasks < 1");
        if (!(cpu_need > 0.0 && cpu_need <= 1.0))
            throw std::invalid_argument("job " + std::to_string(id) + ": cpu_need outside (0,1]");
        if (!(mem_req > 0.0 && mem_req <= 1.0))
            throw std::invalid_argument("job " + std::to_string(id) + ": mem_req outside (0,1]");
        if (!(proc_time > 0.0)) throw std::invalid_argument("job " + std::to_string(id) + ": proc_time <= 0");
    }
};

/// What a non-clairvoyant policy is allowed to see of a job.
struct JobView {
    int id = 0;
    double release = 0.0;
    int num_tasks = 1;
    double cpu_need = 1.0;
    double mem_req = 0.1;
};

inline JobView view_of(const JobSpec& s) {
    return JobView{s.id, s.release, s.num_tasks, s.cpu_need, s.mem_req};
}

struct ClusterConfig {
    int num_nodes = 1;
    double node_mem_bytes = 8.0 * (1ull << 30);  // bandwidth accounting only
    int cores_per_node = 4;                      // workload preparation only

    void validate() const {
        if (num_nodes < 1) throw std::invalid_argument("cluster: num_nodes < 1");
    }
};

/// Per-node occupancy. Memory is a hard cap; CPU load may exceed 1.
struct NodeState {
    int node_id = 0;
    std::set<std::pair<int, int>> placed_tasks;  // (job id, task index)
    double cpu_load = 0.0;                       // sum of cpu_need of placed running tasks
    double mem_used = 0.0;                       // sum of mem_req of placed tasks

    void add_task(int job, int task, double cpu_need, double mem_req) {
        placed_tasks.emplace(job, task);
        cpu_load += cpu_need;
        mem_used += mem_req;
        if (mem_used > 1.0 + kResourceTol)
            throw std::logic_error("node " + std::to_string(node_id) + ": memory capacity exceeded");
    }

    void remove_task(int job, int task, double cpu_need, double mem_req) {
        placed_tasks.erase({job, task});
        cpu_load -= cpu_need;
        mem_used -= mem_req;
    }

    double free_mem() const { return 1.0 - mem_used; }
};

/// Assignment of scheduled tasks to nodes plus the per-job yields.
struct PlacementMap {
    std::map<std::pair<int, int>, int> task_node;  // (job id, task index) -> node
    std::map<int, double> yields;                  // job id -> yield in (0,1]
};

/// Checks the placement invariants: per-node CPU usage (yield-weighted) and
/// memory within capacity, yields within (0,1], every mapped job has a yield.
inline bool placement_valid(const PlacementMap& pm, const std::map<int, JobView>& jobs, int num_nodes) {
    std::vector<double> cpu(num_nodes, 0.0), mem(num_nodes, 0.0);
    for (const auto& [key, node] : pm.task_node) {
        if (node < 0 || node >= num_nodes) return false;
        auto it = jobs.find(key.first);
        if (it == jobs.end()) return false;
        auto yit = pm.yields.find(key.first);
        if (yit == pm.yields.end()) return false;
        if (yit->second <= 0.0 || yit->second > 1.0 + kResourceTol) return false;
        cpu[node] += yit->second * it->second.cpu_need;
        mem[node] += it->second.mem_req;
    }
    for (int i = 0; i < num_nodes; ++i)
        if (cpu[i] > 1.0 + kResourceTol || mem[i] > 1.0 + kResourceTol) return false;
    return true;
}

/// Bounded stretch: turnaround over processing time, both clamped below by
/// the threshold so that trivially short jobs do not dominate the statistics.
inline double bounded_stretch(double turnaround, double proc_time, double threshold = kStretchThreshold) {
    if (!(proc_time > 0.0)) throw std::invalid_argument("bounded_stretch: proc_time <= 0");
    if (!(threshold > 0.0)) throw std::invalid_argument("bounded_stretch: threshold <= 0");
    return std::max(turnaround, threshold) / std::max(proc_time, threshold);
}

/// Raw (unclamped) stretch.
inline double raw_stretch(double turnaround, double proc_time) {
    if (!(proc_time > 0.0)) throw std::invalid_argument("raw_stretch: proc_time <= 0");
    return turnaround / proc_time;
}

/// Job priority: flow time over squared virtual time; a job that has never
/// progressed (vt = 0) has infinite priority.
inline double priority(double flow_time, double virtual_time) {
    if (virtual_time <= 0.0) return infinity();
    return flow_time / (virtual_time * virtual_time);
}

/// Total priority order. Ties between equal priority values are broken by
/// submission order: the earlier-submitted job (smaller id) ranks higher.
struct PriorityKey {
    double value = 0.0;
    int id = 0;

    bool outranks(const PriorityKey& other) const {
        if (value != other.value) return value > other.value;
        return id < other.id;
    }
};

inline bool operator==(const PriorityKey& a, const PriorityKey& b) {
    return a.value == b.value && a.id == b.id;
}

}  // namespace dfrs
