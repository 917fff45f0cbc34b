#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dfrs/core.hpp"

namespace dfrs {

/// One job presented to the vector packer at a fixed scaling: cpu_req is the
/// CPU need multiplied by the candidate yield (or the per-job stretch yield).
struct PackItem {
    int job_id = 0;
    int num_tasks = 1;
    double cpu_req = 0.0;
    double mem_req = 0.0;
    PriorityKey priority;
    std::vector<int> pinned_nodes;  // task -> node; empty unless remap-limited
};

using TaskMapping = std::map<int, std::vector<int>>;  // job id -> per-task node

/// Balance-driven two-dimensional vector packing. Pinned tasks reserve their
/// nodes first; the rest is split into CPU-intensive and memory-intensive
/// lists (each sorted by non-increasing max requirement) and nodes are filled
/// one at a time, always drawing from the list that opposes the node's
/// current imbalance. Returns the complete mapping, or nothing if any task
/// cannot be placed.
inline std::optional<TaskMapping> mcb_pack(const std::vector<PackItem>& items, int num_nodes) {
    if (num_nodes < 1) throw std::invalid_argument("mcb_pack: num_nodes < 1");

    std::vector<double> cpu(num_nodes, 0.0), mem(num_nodes, 0.0);
    TaskMapping mapping;
    std::vector<int> remaining(items.size());

    // Pinned jobs pre-reserve their nodes at the candidate scaling.
    for (std::size_t i = 0; i < items.size(); ++i) {
        const PackItem& it = items[i];
        if (it.pinned_nodes.empty()) {
            remaining[i] = it.num_tasks;
            continue;
        }
        if (static_cast<int>(it.pinned_nodes.size()) != it.num_tasks)
            throw std::invalid_argument("mcb_pack: pinned_nodes must cover all tasks");
        remaining[i] = 0;
        auto& slots = mapping[it.job_id];
        for (int node : it.pinned_nodes) {
            if (node < 0 || node >= num_nodes)
                throw std::invalid_argument("mcb_pack: pinned node out of range");
            if (it.cpu_req > 1.0 - cpu[node] + kResourceTol ||
                it.mem_req > 1.0 - mem[node] + kResourceTol)
                return std::nullopt;
            cpu[node] += it.cpu_req;
            mem[node] += it.mem_req;
            slots.push_back(node);
        }
    }

    std::vector<std::size_t> cpu_list, mem_list;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (remaining[i] == 0) continue;
        if (items[i].cpu_req >= items[i].mem_req) cpu_list.push_back(i);
        else mem_list.push_back(i);
    }
    auto by_max_req = [&](std::size_t a, std::size_t b) {
        double ma = std::max(items[a].cpu_req, items[a].mem_req);
        double mb = std::max(items[b].cpu_req, items[b].mem_req);
        if (ma != mb) return ma > mb;
        return items[a].job_id < items[b].job_id;
    };
    std::stable_sort(cpu_list.begin(), cpu_list.end(), by_max_req);
    std::stable_sort(mem_list.begin(), mem_list.end(), by_max_req);

    auto head_max = [&](const std::vector<std::size_t>& list) -> double {
        for (std::size_t i : list)
            if (remaining[i] > 0) return std::max(items[i].cpu_req, items[i].mem_req);
        return -1.0;
    };
    auto first_fit = [&](const std::vector<std::size_t>& list, double free_cpu,
                         double free_mem) -> std::optional<std::size_t> {
        for (std::size_t i : list) {
            if (remaining[i] > 0 && items[i].cpu_req <= free_cpu + kResourceTol &&
                items[i].mem_req <= free_mem + kResourceTol)
                return i;
        }
        return std::nullopt;
    };

    int left = 0;
    for (int r : remaining) left += r;

    for (int node = 0; node < num_nodes && left > 0; ++node) {
        for (;;) {
            double free_cpu = 1.0 - cpu[node];
            double free_mem = 1.0 - mem[node];
            bool prefer_mem;
            if (free_mem > free_cpu + 1e-12) {
                prefer_mem = true;
            } else if (free_cpu > free_mem + 1e-12) {
                prefer_mem = false;
            } else {
                // Balanced node (e.g. empty): seed from the list whose head
                // has the larger max requirement; ties go to the CPU list.
                prefer_mem = head_max(mem_list) > head_max(cpu_list);
            }
            const auto& first = prefer_mem ? mem_list : cpu_list;
            const auto& second = prefer_mem ? cpu_list : mem_list;
            auto pick = first_fit(first, free_cpu, free_mem);
            if (!pick) pick = first_fit(second, free_cpu, free_mem);
            if (!pick) break;

            const PackItem& it = items[*pick];
            cpu[node] += it.cpu_req;
            mem[node] += it.mem_req;
            mapping[it.job_id].push_back(node);
            --remaining[*pick];
            --left;
        }
    }
    if (left > 0) return std::nullopt;
    return mapping;
}

/// Job handed to the searches: raw CPU need, not yet scaled.
struct PackJob {
    int id = 0;
    int num_tasks = 1;
    double cpu_need = 1.0;
    double mem_req = 0.1;
    PriorityKey priority;
    std::vector<int> pinned_nodes;
};

struct StretchJob {
    PackJob job;
    double flow_time = 0.0;
    double virtual_time = 0.0;
};

struct PackOutcome {
    double scaling = 0.0;  // achieved uniform yield, or achieved inverse stretch
    TaskMapping mapping;
    std::map<int, double> yields;  // per packed job
    std::vector<int> rejected;     // in rejection order
};

namespace detail {

/// Index of the lowest-priority job: smallest priority value, latest
/// submission among ties.
template <typename Jobs, typename KeyOf>
std::size_t lowest_priority(const Jobs& jobs, KeyOf key_of) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < jobs.size(); ++i)
        if (key_of(jobs[worst]).outranks(key_of(jobs[i]))) worst = i;
    return worst;
}

}  // namespace detail

/// Finds the largest uniform yield Y (accuracy `tol`) at which the packer
/// places every remaining job; when no Y >= tol works, the lowest priority
/// job is rejected and the search restarts. Because the list split inside
/// the packer depends on Y, its feasibility is not monotone in Y, so the
/// search walks the tol-resolution grid downward from 1 instead of
/// bisecting; the first success is the certified largest grid point.
inline PackOutcome max_yield_search(std::vector<PackJob> jobs, int num_nodes, double tol = 0.01) {
    if (jobs.empty()) throw std::invalid_argument("max_yield_search: no jobs");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("max_yield_search: bad tol");
    PackOutcome out;
    auto attempt = [&](double y) -> std::optional<TaskMapping> {
        std::vector<PackItem> items;
        items.reserve(jobs.size());
        for (const auto& j : jobs)
            items.push_back({j.id, j.num_tasks, std::min(1.0, y * j.cpu_need), j.mem_req,
                             j.priority, j.pinned_nodes});
        return mcb_pack(items, num_nodes);
    };
    auto finish = [&](double y, TaskMapping m) {
        out.scaling = y;
        out.mapping = std::move(m);
        for (const auto& j : jobs) out.yields[j.id] = y;
        return out;
    };

    while (!jobs.empty()) {
        // No packing exists once total scaled CPU demand exceeds the cluster,
        // so the walk starts at the first grid point under that ceiling.
        double total_cpu = 0.0;
        for (const auto& j : jobs) total_cpu += j.cpu_need * j.num_tasks;
        double ceiling = total_cpu > 0.0 ? std::min(1.0, (num_nodes + kResourceTol) / total_cpu)
                                         : 1.0;
        for (int k = static_cast<int>(std::floor((1.0 - ceiling) / tol));; ++k) {
            double y = 1.0 - k * tol;
            if (y < tol - 1e-12) break;
            y = std::max(y, tol);
            if (auto m = attempt(y)) return finish(y, std::move(*m));
        }
        std::size_t worst =
            detail::lowest_priority(jobs, [](const PackJob& j) { return j.priority; });
        out.rejected.push_back(jobs[worst].id);
        jobs.erase(jobs.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    out.scaling = 0.0;
    return out;
}

/// Binary search over the inverse of the predicted maximum stretch. For a
/// candidate stretch S each job needs yield ((ft + T)/S - vt)/T during the
/// next period of length T; any yield above 1 makes S infeasible, and
/// non-positive yields are clamped to the minimum progress allowance.
inline PackOutcome stretch_search(std::vector<StretchJob> jobs, double period, int num_nodes,
                                  double tol = 0.01, double min_progress = 0.01) {
    if (jobs.empty()) throw std::invalid_argument("stretch_search: no jobs");
    if (!(period > 0.0)) throw std::invalid_argument("stretch_search: period <= 0");
    PackOutcome out;

    auto yields_at = [&](double inv_stretch) -> std::optional<std::vector<double>> {
        std::vector<double> ys;
        ys.reserve(jobs.size());
        for (const auto& sj : jobs) {
            double y = ((sj.flow_time + period) * inv_stretch - sj.virtual_time) / period;
            if (y > 1.0 + 1e-12) return std::nullopt;
            if (y <= 0.0) y = min_progress;
            ys.push_back(std::min(y, 1.0));
        }
        return ys;
    };
    auto attempt = [&](double inv_stretch) -> std::optional<TaskMapping> {
        auto ys = yields_at(inv_stretch);
        if (!ys) return std::nullopt;
        std::vector<PackItem> items;
        items.reserve(jobs.size());
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const PackJob& j = jobs[i].job;
            items.push_back({j.id, j.num_tasks, (*ys)[i] * j.cpu_need, j.mem_req, j.priority,
                             j.pinned_nodes});
        }
        return mcb_pack(items, num_nodes);
    };
    auto finish = [&](double inv_stretch, TaskMapping m) {
        out.scaling = inv_stretch;
        out.mapping = std::move(m);
        auto ys = yields_at(inv_stretch);
        for (std::size_t i = 0; i < jobs.size(); ++i) out.yields[jobs[i].job.id] = (*ys)[i];
        return out;
    };

    // Same downward grid walk as the yield search (per-job yields make the
    // packer's feasibility non-monotone in the target), with one last probe
    // near zero: a stretch beyond the grid still beats rejecting the job.
    const double inv_floor = 1e-6;  // essentially a memory-only pack
    while (!jobs.empty()) {
        for (int k = 0;; ++k) {
            double u = 1.0 - k * tol;
            if (u < tol - 1e-12) break;
            u = std::max(u, tol);
            if (auto m = attempt(u)) return finish(u, std::move(*m));
        }
        if (auto m = attempt(inv_floor)) return finish(inv_floor, std::move(*m));
        std::size_t worst = detail::lowest_priority(
            jobs, [](const StretchJob& j) { return j.job.priority; });
        out.rejected.push_back(jobs[worst].job.id);
        jobs.erase(jobs.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    out.scaling = 0.0;
    return out;
}

}  // namespace dfrs
