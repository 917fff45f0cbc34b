#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfrs/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fractional resource scheduling laboratory: runs batch and "
                 "dynamic fractional schedulers over SWF, JSON or synthetic "
                 "traces and reports stretch, bound, bandwidth and "
                 "underutilization metrics."};

    dfrs::ExperimentSpec spec;
    bool synthetic = false;
    bool no_bound = false;
    double bound_tol = 1e-3;
    double period = 0.0;
    std::vector<double> period_sweep;
    double node_mem_gib = 8.0;
    int num_jobs = 1000;
    double interarrival_mean = 600.0;
    int max_task_exp = -1;  // default: log2(nodes), capped at 7

    auto* workload = app.add_option("--workload", spec.workload_path, "Trace file to replay");
    app.add_flag("--synthetic", synthetic, "Generate synthetic traces instead of a file")
        ->excludes(workload);
    app.add_option("--format", spec.workload_format, "Trace file format: swf or json")
        ->check(CLI::IsMember({"swf", "json"}))
        ->capture_default_str();
    app.add_option("--nodes", spec.cluster.num_nodes, "Cluster size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--algorithms", spec.algorithms,
                   "Algorithm names, e.g. greedypm*/per/opt=min/mvt=600 easy fcfs")
        ->required()
        ->delimiter(',');
    app.add_option("--penalty", spec.penalty, "Rescheduling penalty in seconds")
        ->capture_default_str();
    auto* period_opt =
        app.add_option("--period", period, "Scheduling period in seconds (default 2x penalty)");
    app.add_option("--period-sweep", period_sweep, "List of periods to sweep")
        ->delimiter(',')
        ->excludes(period_opt);
    app.add_option("--load", spec.loads, "Offered load levels to scale each trace to")
        ->delimiter(',');
    app.add_option("--traces", spec.num_traces, "Number of synthetic traces")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--jobs", num_jobs, "Jobs per synthetic trace")->capture_default_str();
    app.add_option("--seed", spec.seed, "Base RNG seed")->capture_default_str();
    app.add_option("--bound", bound_tol, "Relative tolerance of the stretch lower bound")
        ->expected(0, 1)
        ->capture_default_str();
    app.add_flag("--no-bound", no_bound, "Skip the offline lower bound");
    app.add_option("--bound-max-jobs", spec.bound_max_jobs,
                   "Skip the bound for traces larger than this")
        ->capture_default_str();
    app.add_option("--out", spec.out_dir, "Output directory")->capture_default_str();
    app.add_flag("--event-log", spec.event_log, "Write one event log per run");
    app.add_option("--split", spec.split_segment,
                   "Slice a file workload into segments of this many seconds");
    app.add_flag("--dump-traces", spec.dump_traces, "Write each assembled trace as JSON");
    app.add_option("--node-mem-gib", node_mem_gib, "Node memory in GiB (bandwidth accounting)")
        ->capture_default_str();
    app.add_option("--interarrival", interarrival_mean,
                   "Mean synthetic inter-arrival time in seconds")
        ->capture_default_str();
    app.add_option("--max-task-exp", max_task_exp,
                   "Largest k for synthetic task counts 2^k (default log2(nodes))");
    app.add_option("--threads", spec.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (!synthetic && spec.workload_path.empty()) {
        std::cerr << "error: need --workload PATH or --synthetic\n";
        return 2;
    }
    spec.compute_bound = !no_bound;
    spec.bound_tol = bound_tol;
    if (period > 0.0) spec.periods = {period};
    else if (!period_sweep.empty()) spec.periods = period_sweep;
    spec.cluster.node_mem_bytes = node_mem_gib * 1024.0 * 1024.0 * 1024.0;
    spec.synth.num_jobs = num_jobs;
    spec.synth.interarrival = {dfrs::DistSpec::Kind::exponential, interarrival_mean, 0.0};
    int kmax = max_task_exp;
    if (kmax < 0) {
        kmax = 0;
        while ((2 << kmax) <= spec.cluster.num_nodes && kmax < 7) ++kmax;
    }
    spec.synth.task_count = {dfrs::DistSpec::Kind::pow2_uniform, 0.0, static_cast<double>(kmax)};

    try {
        dfrs::ExperimentResult result = dfrs::run_experiment(spec);
        std::size_t failed = 0;
        for (const auto& r : result.rows)
            if (r.failed) ++failed;
        std::cout << result.rows.size() << " runs, " << failed << " failed\n"
                  << "results:  " << result.csv_path << "\n"
                  << "manifest: " << result.manifest_path << "\n";
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
