#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dfrs/bound.hpp"
#include "dfrs/engine.hpp"
#include "dfrs/metrics.hpp"
#include "dfrs/workload.hpp"

namespace dfrs {

namespace detail {

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace detail

/// Parses an algorithm name: an optional submission policy (greedy, greedyp,
/// greedypm, mcb8) with an optional '*' for opportunistic completion
/// scheduling, an optional '/per' or '/stretch-per' periodic part, a
/// required '/opt=' part, and an optional '/mvt=' or '/mft=' remap limit.
/// 'fcfs', 'easy' and 'equipartition' name the baselines. Combinations
/// outside the policy table are rejected.
inline Algorithm parse_algorithm_name(const std::string& name) {
    std::string norm = detail::lower(name);
    Algorithm algo;
    algo.name = name;
    if (norm == "fcfs") {
        algo.kind = AlgorithmKind::fcfs;
        return algo;
    }
    if (norm == "easy") {
        algo.kind = AlgorithmKind::easy;
        return algo;
    }
    if (norm == "equipartition") {
        algo.kind = AlgorithmKind::equipartition;
        return algo;
    }

    algo.kind = AlgorithmKind::dfrs;
    PolicyConfig& p = algo.policy;
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("algorithm '" + name + "': " + why);
    };

    std::vector<std::string> parts = detail::split(norm, '/');
    std::string head = parts.front();
    bool star = false;
    if (!head.empty() && head.back() == '*') {
        star = true;
        head.pop_back();
    }
    if (head == "greedy") p.on_submit = SubmitAction::greedy;
    else if (head == "greedyp") p.on_submit = SubmitAction::greedy_p;
    else if (head == "greedypm") p.on_submit = SubmitAction::greedy_pm;
    else if (head == "mcb8") p.on_submit = SubmitAction::mcb8;
    else if (head.empty()) p.on_submit = SubmitAction::none;
    else fail("unknown submission policy '" + head + "'");
    if (star && p.on_submit == SubmitAction::none) fail("'*' requires a submission policy");
    if (star)
        p.on_complete = p.on_submit == SubmitAction::mcb8 ? CompleteAction::mcb8
                                                          : CompleteAction::greedy;

    bool have_periodic = false, have_opt = false, have_limit = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& part = parts[i];
        if (part == "per" || part == "stretch-per") {
            if (have_periodic) fail("duplicate periodic part");
            have_periodic = true;
            p.periodic = part == "per" ? PeriodicAction::mcb8 : PeriodicAction::mcb8_stretch;
        } else if (part.rfind("opt=", 0) == 0) {
            if (have_opt) fail("duplicate opt part");
            have_opt = true;
            std::string v = part.substr(4);
            if (v == "min") p.optimizer = Optimizer::min;
            else if (v == "avg") p.optimizer = Optimizer::avg;
            else if (v == "max") p.optimizer = Optimizer::max;
            else fail("unknown optimizer '" + v + "'");
        } else if (part.rfind("mvt=", 0) == 0 || part.rfind("mft=", 0) == 0) {
            if (have_limit) fail("duplicate remap limit");
            have_limit = true;
            p.remap_limit.kind =
                part[1] == 'v' ? RemapLimitKind::mvt : RemapLimitKind::mft;
            try {
                p.remap_limit.bound = std::stod(part.substr(4));
            } catch (const std::exception&) {
                fail("bad remap bound in '" + part + "'");
            }
            if (!(p.remap_limit.bound > 0.0)) fail("remap bound must be positive");
        } else if (part.empty()) {
            fail("empty name part");
        } else {
            fail("unknown part '" + part + "'");
        }
    }

    if (!have_opt) fail("missing /opt= part");
    bool stretch = p.periodic == PeriodicAction::mcb8_stretch;
    if (stretch && (p.on_submit != SubmitAction::none || star))
        fail("/stretch-per composes only with no submission policy");
    if (stretch && p.optimizer == Optimizer::min)
        fail("/stretch-per takes opt=avg or opt=max");
    if (!stretch && p.optimizer == Optimizer::max)
        fail("opt=max applies only to /stretch-per");
    if (p.on_submit == SubmitAction::none && !have_periodic)
        fail("policy takes no action at all");
    if (p.on_submit != SubmitAction::none && !star && !have_periodic)
        fail("submission-only policy needs '*' or a periodic part");
    bool uses_mcb = p.on_submit == SubmitAction::mcb8 || have_periodic;
    if (have_limit && !uses_mcb) fail("remap limits apply only to policies using mcb8");
    return algo;
}

/// Full description of an experiment sweep.
struct ExperimentSpec {
    std::string workload_path;           // empty: synthetic
    std::string workload_format = "swf"; // swf | json
    double swf_node_mem_bytes = 2.0 * (1ull << 30);
    int swf_cores = 2;
    double split_segment = 0.0;          // >0: slice file traces into segments
    bool dump_traces = false;            // write each assembled trace as JSON
    SyntheticParams synth;
    int num_traces = 1;                  // synthetic only
    std::vector<double> loads;           // empty: leave traces unscaled
    ClusterConfig cluster;
    std::vector<std::string> algorithms;
    double penalty = 300.0;
    std::vector<double> periods;         // empty: one period of 2 * penalty
    bool compute_bound = true;
    double bound_tol = 1e-3;
    std::size_t bound_max_jobs = 2000;   // beyond this the bound is skipped
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    bool event_log = false;
    int threads = 0;                     // 0: hardware concurrency
};

struct ExperimentRow {
    std::string trace_id;
    double load = 0.0;
    std::string algorithm;
    double period = 0.0;
    MetricsRecord metrics;
    std::optional<double> s_lower;
    double wall_time_s = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::string csv_path;
    std::string manifest_path;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
    return out;
}

}  // namespace detail

inline const char* experiment_csv_header() {
    return "trace,load,algorithm,period,max_bounded_stretch,mean_bounded_stretch,"
           "std_bounded_stretch,s_lower,degradation,underutil_node_seconds,"
           "norm_underutilization,bandwidth_gbps,preemptions_per_hour,migrations_per_hour,"
           "preemptions_per_job,migrations_per_job,wall_time_s";
}

inline std::string experiment_csv_row(const ExperimentRow& r, bool include_wall_time = true) {
    using detail::fmt;
    std::ostringstream os;
    os << r.trace_id << ',' << fmt(r.load) << ',' << r.algorithm << ',' << fmt(r.period) << ',';
    if (r.failed) {
        os << ",,,,,,,,,,,";
    } else {
        const MetricsRecord& m = r.metrics;
        os << fmt(m.bounded.max) << ',' << fmt(m.bounded.mean) << ',' << fmt(m.bounded.stddev)
           << ',' << (r.s_lower ? fmt(*r.s_lower) : "") << ','
           << (m.degradation ? fmt(*m.degradation) : "") << ',' << fmt(m.underutil.node_seconds)
           << ',' << fmt(m.underutil.normalized) << ',' << fmt(m.bandwidth.total_gbps) << ','
           << fmt(m.bandwidth.preemptions_per_hour) << ',' << fmt(m.bandwidth.migrations_per_hour)
           << ',' << fmt(m.bandwidth.preemptions_per_job) << ','
           << fmt(m.bandwidth.migrations_per_job) << ',';
    }
    if (include_wall_time) os << detail::fmt(r.wall_time_s);
    return os.str();
}

/// Runs the sweep: one simulation per (trace, algorithm, period) triple,
/// bounds once per trace, rows in input order, CSV plus a JSON manifest.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
    for (double load : spec.loads)
        if (!(load > 0.0 && load <= 1.0))
            throw std::invalid_argument("experiment: load levels must lie in (0,1]");
    std::vector<Algorithm> algorithms;
    for (const auto& name : spec.algorithms) algorithms.push_back(parse_algorithm_name(name));
    std::vector<double> periods = spec.periods;
    if (periods.empty()) periods.push_back(2.0 * spec.penalty);

    // Assemble base traces.
    struct Trace {
        std::string id;
        double load = 0.0;
        std::uint64_t seed = 0;
        std::vector<JobSpec> jobs;
        std::optional<BoundResult> bound;
        std::string bound_note;
    };
    std::vector<Trace> traces;
    std::vector<std::vector<JobSpec>> bases;
    std::vector<std::uint64_t> base_seeds;
    if (!spec.workload_path.empty()) {
        std::ifstream in(spec.workload_path);
        if (!in) throw std::runtime_error("cannot open workload: " + spec.workload_path);
        if (spec.workload_format == "swf") {
            auto records = parse_swf(in);
            bases.push_back(hpc2n_transform(records, spec.swf_node_mem_bytes, spec.swf_cores).jobs);
        } else if (spec.workload_format == "json") {
            bases.push_back(read_trace_json(in));
        } else {
            throw std::invalid_argument("unknown workload format: " + spec.workload_format);
        }
        if (spec.split_segment > 0.0) {
            auto whole = std::move(bases.back());
            bases.pop_back();
            std::sort(whole.begin(), whole.end(), [](const JobSpec& a, const JobSpec& b) {
                return a.release != b.release ? a.release < b.release : a.id < b.id;
            });
            for (auto& segment : split_segments(whole, spec.split_segment)) {
                if (!spec.loads.empty() && segment.size() < 2) continue;  // unscalable sliver
                bases.push_back(std::move(segment));
            }
            if (bases.empty()) throw std::runtime_error("split produced no usable segments");
        }
        base_seeds.assign(bases.size(), 0);
    } else {
        for (int i = 0; i < spec.num_traces; ++i) {
            SyntheticParams p = spec.synth;
            p.seed = spec.seed + static_cast<std::uint64_t>(i);
            bases.push_back(synth_generate(p));
            base_seeds.push_back(p.seed);
        }
    }
    for (std::size_t b = 0; b < bases.size(); ++b) {
        if (spec.loads.empty()) {
            Trace t;
            t.id = "t" + std::to_string(b);
            TraceMeta meta = trace_meta(bases[b]);
            t.load = meta.span > 0.0 ? offered_load(bases[b], spec.cluster.num_nodes) : 0.0;
            t.seed = base_seeds[b];
            t.jobs = bases[b];
            traces.push_back(std::move(t));
        } else {
            for (double load : spec.loads) {
                Trace t;
                t.id = "t" + std::to_string(b);
                t.load = load;
                t.seed = base_seeds[b];
                t.jobs = scale_load(bases[b], load, spec.cluster);
                traces.push_back(std::move(t));
            }
        }
    }

    int threads = spec.threads > 0 ? spec.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    auto parallel_for = [&](std::size_t count, auto&& body) {
        if (threads == 1 || count <= 1) {
            for (std::size_t i = 0; i < count; ++i) body(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int width = std::min<std::size_t>(threads, count);
        for (int w = 0; w < width; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    body(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    };

    if (spec.compute_bound) {
        parallel_for(traces.size(), [&](std::size_t i) {
            if (traces[i].jobs.size() > spec.bound_max_jobs) {
                traces[i].bound_note = "bound unavailable: trace exceeds bound_max_jobs";
                return;
            }
            try {
                traces[i].bound =
                    lower_bound_stretch(traces[i].jobs, spec.cluster.num_nodes, spec.bound_tol);
            } catch (const std::exception& e) {
                traces[i].bound_note = std::string("bound failed: ") + e.what();
            }
        });
    }

    if (spec.dump_traces) {
        std::filesystem::create_directories(spec.out_dir);
        for (const auto& t : traces) {
            std::ofstream out(spec.out_dir + "/trace_" + t.id + "_" + detail::fmt(t.load) +
                              ".json");
            write_trace_json(out, t.jobs);
        }
    }

    struct Task {
        std::size_t trace;
        std::size_t algo;
        double period;
    };
    std::vector<Task> tasks;
    for (std::size_t t = 0; t < traces.size(); ++t)
        for (std::size_t a = 0; a < algorithms.size(); ++a)
            for (double period : periods) tasks.push_back({t, a, period});

    std::filesystem::create_directories(spec.out_dir);
    std::vector<ExperimentRow> rows(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        const Task& task = tasks[i];
        const Trace& trace = traces[task.trace];
        ExperimentRow& row = rows[i];
        row.trace_id = trace.id;
        row.load = trace.load;
        row.algorithm = spec.algorithms[task.algo];
        row.period = task.period;
        Algorithm algo = algorithms[task.algo];
        algo.policy.period = task.period;
        SimConfig cfg;
        cfg.penalty = spec.penalty;
        std::ofstream log_stream;
        if (spec.event_log) {
            std::string path = spec.out_dir + "/events_" + trace.id + "_" +
                               detail::sanitize(row.algorithm) + "_" +
                               detail::fmt(task.period) + ".tsv";
            log_stream.open(path);
            cfg.event_log = &log_stream;
        }
        auto t0 = std::chrono::steady_clock::now();
        try {
            SimReport report = run_simulation(trace.jobs, algo, spec.cluster, cfg);
            row.metrics = compute_metrics(report, spec.cluster.num_nodes, trace.bound);
            if (trace.bound) row.s_lower = trace.bound->s_lower;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        row.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    ExperimentResult result;
    result.rows = std::move(rows);
    result.csv_path = spec.out_dir + "/results.csv";
    result.manifest_path = spec.out_dir + "/manifest.json";

    std::ofstream csv(result.csv_path);
    csv << experiment_csv_header() << "\n";
    for (const auto& r : result.rows) csv << experiment_csv_row(r) << "\n";
    csv.flush();
    if (!csv) throw std::runtime_error("cannot write " + result.csv_path);

    nlohmann::json manifest;
    manifest["workload"] = spec.workload_path.empty() ? "synthetic" : spec.workload_path;
    manifest["format"] = spec.workload_format;
    manifest["nodes"] = spec.cluster.num_nodes;
    manifest["node_mem_bytes"] = spec.cluster.node_mem_bytes;
    manifest["cores_per_node"] = spec.cluster.cores_per_node;
    manifest["algorithms"] = spec.algorithms;
    manifest["penalty"] = spec.penalty;
    manifest["periods"] = periods;
    manifest["loads"] = spec.loads;
    manifest["num_traces"] = spec.num_traces;
    manifest["seed"] = spec.seed;
    manifest["bound"] = spec.compute_bound;
    manifest["bound_tol"] = spec.bound_tol;
    manifest["synthetic"] = {
        {"num_jobs", spec.synth.num_jobs},
        {"interarrival_mean", spec.synth.interarrival.a},
        {"task_count_max_exp", spec.synth.task_count.b},
        {"runtime_lo", spec.synth.runtime.a},
        {"runtime_hi", spec.synth.runtime.b},
        {"cores_per_node", spec.synth.cores_per_node},
    };
    nlohmann::json jtraces = nlohmann::json::array();
    for (const auto& t : traces) {
        nlohmann::json jt = {{"id", t.id},
                             {"seed", t.seed},
                             {"load", t.load},
                             {"num_jobs", t.jobs.size()}};
        if (!t.bound_note.empty()) jt["bound_note"] = t.bound_note;
        if (t.bound) jt["s_lower"] = t.bound->s_lower;
        jtraces.push_back(jt);
    }
    manifest["traces"] = jtraces;
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : result.rows)
        if (r.failed)
            failures.push_back({{"trace", r.trace_id},
                                {"algorithm", r.algorithm},
                                {"period", r.period},
                                {"error", r.error}});
    manifest["failures"] = failures;
    std::ofstream mf(result.manifest_path);
    mf << manifest.dump(2) << "\n";
    return result;
}

}  // namespace dfrs
