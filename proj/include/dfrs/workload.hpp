#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfrs/core.hpp"

namespace dfrs {

/// One line of an SWF trace. The first 18 standard columns are kept in
/// `fields` in file order; commonly used ones are also named. Missing
/// numeric values carry the SWF "unknown" sentinel -1.
struct SwfRecord {
    long long job_id = -1;
    double submit_time = -1.0;
    double run_time = -1.0;
    long long allocated_procs = -1;
    long long requested_procs = -1;
    double used_mem_kb = -1.0;       // per processor
    double requested_mem_kb = -1.0;  // per processor
    long long status = -1;
    std::vector<double> fields;      // all columns, pass-through
};

/// Summary statistics of a trace.
struct TraceMeta {
    std::size_t num_jobs = 0;
    double delta = 1.0;       // max proc_time / min proc_time
    double total_work = 0.0;  // sum of cpu_need * num_tasks * proc_time
    double span = 0.0;        // last release - first release
};

inline TraceMeta trace_meta(const std::vector<JobSpec>& jobs) {
    TraceMeta m;
    m.num_jobs = jobs.size();
    if (jobs.empty()) return m;
    double pmin = infinity(), pmax = 0.0, rmin = infinity(), rmax = -infinity();
    for (const auto& j : jobs) {
        pmin = std::min(pmin, j.proc_time);
        pmax = std::max(pmax, j.proc_time);
        rmin = std::min(rmin, j.release);
        rmax = std::max(rmax, j.release);
        m.total_work += j.cpu_need * j.num_tasks * j.proc_time;
    }
    m.delta = pmax / pmin;
    m.span = rmax - rmin;
    return m;
}

/// Offered load: total work over cluster capacity times submission span.
inline double offered_load(const std::vector<JobSpec>& jobs, int num_nodes) {
    TraceMeta m = trace_meta(jobs);
    if (m.span <= 0.0) throw std::invalid_argument("offered_load: zero submission span");
    return m.total_work / (num_nodes * m.span);
}

/// Parses an SWF text stream: ';'-prefixed comment lines, otherwise at least
/// 18 whitespace-separated numeric fields per record.
inline std::vector<SwfRecord> parse_swf(std::istream& in) {
    std::vector<SwfRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == ';') continue;

        std::istringstream ls(line);
        std::vector<double> fields;
        double v;
        while (ls >> v) fields.push_back(v);
        if (!ls.eof()) {
            throw std::runtime_error("swf parse error at line " + std::to_string(lineno) +
                                     ": non-numeric field");
        }
        if (fields.size() < 18) {
            throw std::runtime_error("swf parse error at line " + std::to_string(lineno) + ": " +
                                     std::to_string(fields.size()) + " fields, expected >= 18");
        }
        SwfRecord r;
        r.fields = fields;
        r.job_id = static_cast<long long>(fields[0]);
        r.submit_time = fields[1];
        r.run_time = fields[3];
        r.allocated_procs = static_cast<long long>(fields[4]);
        r.used_mem_kb = fields[6];
        r.requested_procs = static_cast<long long>(fields[7]);
        r.requested_mem_kb = fields[9];
        r.status = static_cast<long long>(fields[10]);
        out.push_back(std::move(r));
    }
    return out;
}

struct Hpc2nResult {
    std::vector<JobSpec> jobs;
    int skipped = 0;  // records with unusable run time or processor count
};

/// Maps SWF records onto fractional jobs for a dual-core-style cluster:
/// per-processor memory is the max of requested and used memory (floor 10%),
/// even-processor low-memory jobs fold two processors into one full-CPU task,
/// everything else keeps one half-CPU task per processor.
inline Hpc2nResult hpc2n_transform(const std::vector<SwfRecord>& records,
                                   double node_mem_bytes = 2.0 * (1ull << 30), int cores = 2) {
    if (cores < 1) throw std::invalid_argument("hpc2n_transform: cores < 1");
    Hpc2nResult res;
    int next_id = 0;
    for (const auto& r : records) {
        long long procs = r.allocated_procs > 0 ? r.allocated_procs : r.requested_procs;
        if (r.run_time <= 0.0 || procs < 1) {
            ++res.skipped;
            continue;
        }
        double mem_kb = std::max(r.used_mem_kb, r.requested_mem_kb);
        double frac = mem_kb > 0.0 ? mem_kb * 1024.0 / node_mem_bytes : 0.0;
        frac = std::max(frac, 0.10);

        JobSpec j;
        j.id = next_id++;
        j.release = std::max(r.submit_time, 0.0);
        j.proc_time = r.run_time;
        if (procs % 2 == 0 && frac < 0.50) {
            j.num_tasks = static_cast<int>(procs / 2);
            j.cpu_need = std::min(1.0, 2.0 / cores);
            j.mem_req = std::min(1.0, 2.0 * frac);
        } else {
            j.num_tasks = static_cast<int>(procs);
            j.cpu_need = std::min(1.0, 1.0 / cores);
            j.mem_req = std::min(1.0, frac);
        }
        j.validate();
        res.jobs.push_back(j);
    }
    return res;
}

/// Distribution specification for the pluggable synthetic generator.
struct DistSpec {
    enum class Kind { fixed, uniform, exponential, log_uniform, pow2_uniform };
    Kind kind = Kind::fixed;
    double a = 0.0;  // fixed value / lower bound / mean
    double b = 0.0;  // upper bound (inclusive for integer kinds)
};

struct SyntheticParams {
    int num_jobs = 1000;
    DistSpec interarrival{DistSpec::Kind::exponential, 600.0, 0.0};
    DistSpec task_count{DistSpec::Kind::pow2_uniform, 0.0, 7.0};
    DistSpec runtime{DistSpec::Kind::log_uniform, 30.0, 108000.0};
    int cores_per_node = 4;
    std::uint64_t seed = 1;
};

/// Deterministic, platform-independent generator (splitmix64 core).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double next_double() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    long long uniform_int(long long lo, long long hi) {  // inclusive
        return lo + static_cast<long long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double exponential(double mean) {
        double u = next_double();
        return -mean * std::log(1.0 - u);
    }

    double log_uniform(double lo, double hi) {
        return lo * std::exp(next_double() * std::log(hi / lo));
    }

  private:
    std::uint64_t state_;
};

inline void validate_dist(const DistSpec& d, const char* name) {
    using K = DistSpec::Kind;
    std::string n(name);
    switch (d.kind) {
        case K::fixed:
            if (d.a <= 0.0) throw std::invalid_argument(n + ": fixed value must be positive");
            break;
        case K::uniform:
        case K::log_uniform:
            if (d.a <= 0.0 || d.b < d.a) throw std::invalid_argument(n + ": bad uniform range");
            break;
        case K::exponential:
            if (d.a <= 0.0) throw std::invalid_argument(n + ": mean must be positive");
            break;
        case K::pow2_uniform:
            if (d.a < 0.0 || d.b < d.a || d.b > 30.0)
                throw std::invalid_argument(n + ": bad exponent range");
            break;
    }
}

inline double draw(Rng& rng, const DistSpec& d) {
    using K = DistSpec::Kind;
    switch (d.kind) {
        case K::fixed: return d.a;
        case K::uniform: return rng.uniform(d.a, d.b);
        case K::exponential: return rng.exponential(d.a);
        case K::log_uniform: return rng.log_uniform(d.a, d.b);
        case K::pow2_uniform:
            return std::ldexp(1.0, static_cast<int>(rng.uniform_int(
                                       static_cast<long long>(d.a), static_cast<long long>(d.b))));
    }
    return d.a;
}

/// Synthetic trace with the memory/CPU augmentation for quad-core-style
/// nodes: 55% of jobs need 10% of node memory, the rest 10x% for x in 2..10;
/// one-task jobs are sequential (cpu 1/cores), multi-task jobs are CPU-bound.
inline std::vector<JobSpec> synth_generate(const SyntheticParams& p) {
    if (p.num_jobs < 1) throw std::invalid_argument("synth_generate: num_jobs < 1");
    if (p.cores_per_node < 1) throw std::invalid_argument("synth_generate: cores_per_node < 1");
    validate_dist(p.interarrival, "interarrival");
    validate_dist(p.task_count, "task_count");
    validate_dist(p.runtime, "runtime");

    Rng rng(p.seed);
    std::vector<JobSpec> jobs;
    jobs.reserve(p.num_jobs);
    double t = 0.0;
    for (int i = 0; i < p.num_jobs; ++i) {
        if (i > 0) t += draw(rng, p.interarrival);
        JobSpec j;
        j.id = i;
        j.release = t;
        j.num_tasks = std::max(1, static_cast<int>(draw(rng, p.task_count)));
        j.proc_time = draw(rng, p.runtime);
        j.cpu_need = j.num_tasks == 1 ? 1.0 / p.cores_per_node : 1.0;
        if (rng.next_double() < 0.55) {
            j.mem_req = 0.10;
        } else {
            j.mem_req = 0.10 * static_cast<double>(rng.uniform_int(2, 10));
        }
        j.mem_req = std::min(j.mem_req, 1.0);
        j.validate();
        jobs.push_back(j);
    }
    return jobs;
}

/// Rescales inter-arrival gaps by the one constant that brings the offered
/// load to `target`. The first release and all job bodies are unchanged.
inline std::vector<JobSpec> scale_load(const std::vector<JobSpec>& jobs, double target,
                                       const ClusterConfig& cluster) {
    if (jobs.size() < 2) throw std::invalid_argument("scale_load: need at least 2 jobs");
    if (!(target > 0.0)) throw std::invalid_argument("scale_load: target must be positive");
    std::vector<JobSpec> sorted = jobs;
    std::sort(sorted.begin(), sorted.end(),
              [](const JobSpec& a, const JobSpec& b) {
                  return a.release != b.release ? a.release < b.release : a.id < b.id;
              });
    double load = offered_load(sorted, cluster.num_nodes);  // throws on zero span
    double k = load / target;
    double prev_old = sorted[0].release;
    double prev_new = sorted[0].release;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double gap = sorted[i].release - prev_old;
        prev_old = sorted[i].release;
        prev_new += gap * k;
        sorted[i].release = prev_new;
    }
    return sorted;
}

/// Buckets jobs into fixed-length segments by floor(release / segment);
/// each segment is re-based so that its first release is 0.
inline std::vector<std::vector<JobSpec>> split_segments(const std::vector<JobSpec>& jobs,
                                                        double segment = 604800.0) {
    if (!(segment > 0.0)) throw std::invalid_argument("split_segments: segment <= 0");
    std::map<long long, std::vector<JobSpec>> buckets;
    for (const auto& j : jobs)
        buckets[static_cast<long long>(std::floor(j.release / segment))].push_back(j);
    std::vector<std::vector<JobSpec>> out;
    out.reserve(buckets.size());
    for (auto& [idx, seg] : buckets) {
        double base = infinity();
        for (const auto& j : seg) base = std::min(base, j.release);
        for (auto& j : seg) j.release -= base;
        out.push_back(std::move(seg));
    }
    return out;
}

inline nlohmann::json trace_to_json(const std::vector<JobSpec>& jobs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& j : jobs) {
        arr.push_back({{"id", j.id},
                       {"release", j.release},
                       {"num_tasks", j.num_tasks},
                       {"cpu_need", j.cpu_need},
                       {"mem_req", j.mem_req},
                       {"proc_time", j.proc_time}});
    }
    return arr;
}

inline std::vector<JobSpec> trace_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw std::runtime_error("trace json: expected an array of jobs");
    std::vector<JobSpec> jobs;
    jobs.reserve(arr.size());
    for (const auto& o : arr) {
        JobSpec j;
        j.id = o.at("id").get<int>();
        j.release = o.at("release").get<double>();
        j.num_tasks = o.at("num_tasks").get<int>();
        j.cpu_need = o.at("cpu_need").get<double>();
        j.mem_req = o.at("mem_req").get<double>();
        j.proc_time = o.at("proc_time").get<double>();
        j.validate();
        jobs.push_back(j);
    }
    return jobs;
}

inline void write_trace_json(std::ostream& os, const std::vector<JobSpec>& jobs) {
    os << trace_to_json(jobs).dump(2) << "\n";
}

inline std::vector<JobSpec> read_trace_json(std::istream& is) {
    nlohmann::json j;
    is >> j;
    return trace_from_json(j);
}

}  // namespace dfrs
