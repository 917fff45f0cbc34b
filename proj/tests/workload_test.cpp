#include <dfrs/workload.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace dfrs;

namespace {

SwfRecord record(long long procs, double run_time, double used_kb, double req_kb) {
    SwfRecord r;
    r.allocated_procs = procs;
    r.requested_procs = procs;
    r.run_time = run_time;
    r.submit_time = 0.0;
    r.used_mem_kb = used_kb;
    r.requested_mem_kb = req_kb;
    return r;
}

const double kGiB = 1024.0 * 1024.0 * 1024.0;

}  // namespace

TEST(ParseSwf, CommentOnlyFileIsEmpty) {
    std::istringstream in("; Version: 2.2\n;  MaxJobs: 100\n\n");
    EXPECT_TRUE(parse_swf(in).empty());
}

TEST(ParseSwf, SingleRecordRoundTrips) {
    std::istringstream in("; header\n"
                          "7 100 5 3600 4 -1 524288 4 7200 1048576 1 3 2 1 0 -1 -1 -1\n");
    auto records = parse_swf(in);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].job_id, 7);
    EXPECT_DOUBLE_EQ(records[0].submit_time, 100.0);
    EXPECT_DOUBLE_EQ(records[0].run_time, 3600.0);
    EXPECT_EQ(records[0].allocated_procs, 4);
    EXPECT_DOUBLE_EQ(records[0].used_mem_kb, 524288.0);
    EXPECT_DOUBLE_EQ(records[0].requested_mem_kb, 1048576.0);
    EXPECT_EQ(records[0].fields.size(), 18u);
}

TEST(ParseSwf, ShortLineNamesTheLine) {
    std::istringstream in("; ok\n1 2 3 4 5\n");
    try {
        parse_swf(in);
        FAIL() << "expected a parse error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Hpc2nTransform, EvenLowMemoryFoldsProcessorPairs) {
    // 4 processors at 30% per-processor memory -> 2 full-CPU tasks at 60%.
    double kb30 = 0.30 * 2.0 * kGiB / 1024.0;
    auto res = hpc2n_transform({record(4, 100.0, kb30, -1.0)});
    ASSERT_EQ(res.jobs.size(), 1u);
    EXPECT_EQ(res.jobs[0].num_tasks, 2);
    EXPECT_DOUBLE_EQ(res.jobs[0].cpu_need, 1.0);
    EXPECT_NEAR(res.jobs[0].mem_req, 0.60, 1e-12);
}

TEST(Hpc2nTransform, OddProcessorsKeepHalfCpuTasks) {
    double kb30 = 0.30 * 2.0 * kGiB / 1024.0;
    auto res = hpc2n_transform({record(3, 100.0, kb30, -1.0)});
    ASSERT_EQ(res.jobs.size(), 1u);
    EXPECT_EQ(res.jobs[0].num_tasks, 3);
    EXPECT_DOUBLE_EQ(res.jobs[0].cpu_need, 0.5);
    EXPECT_NEAR(res.jobs[0].mem_req, 0.30, 1e-12);
}

TEST(Hpc2nTransform, MissingMemoryGetsTheFloor) {
    auto res = hpc2n_transform({record(2, 50.0, -1.0, -1.0)});
    ASSERT_EQ(res.jobs.size(), 1u);
    EXPECT_NEAR(res.jobs[0].mem_req, 0.20, 1e-12);  // 2 x the 10% floor (folded pair)
    auto odd = hpc2n_transform({record(1, 50.0, -1.0, -1.0)});
    EXPECT_NEAR(odd.jobs[0].mem_req, 0.10, 1e-12);
}

TEST(Hpc2nTransform, TakesMaxOfUsedAndRequested) {
    double used = 0.30 * 2.0 * kGiB / 1024.0;
    double req = 0.55 * 2.0 * kGiB / 1024.0;
    auto res = hpc2n_transform({record(4, 100.0, used, req)});
    // 55% >= 50%: no folding, per-processor tasks.
    ASSERT_EQ(res.jobs.size(), 1u);
    EXPECT_EQ(res.jobs[0].num_tasks, 4);
    EXPECT_NEAR(res.jobs[0].mem_req, 0.55, 1e-12);
}

TEST(Hpc2nTransform, FallsBackToRequestedProcessors) {
    SwfRecord r = record(4, 100.0, -1.0, -1.0);
    r.allocated_procs = -1;  // unknown; the requested count drives the transform
    r.requested_procs = 3;
    auto res = hpc2n_transform({r});
    ASSERT_EQ(res.jobs.size(), 1u);
    EXPECT_EQ(res.jobs[0].num_tasks, 3);
}

TEST(Hpc2nTransform, SkipsUnusableRecordsWithCount) {
    auto res = hpc2n_transform({record(4, -1.0, -1.0, -1.0), record(0, 100.0, -1.0, -1.0),
                                record(2, 10.0, -1.0, -1.0)});
    EXPECT_EQ(res.skipped, 2);
    EXPECT_EQ(res.jobs.size(), 1u);
}

TEST(Hpc2nTransform, PreservesProcessorSeconds) {
    std::vector<SwfRecord> records;
    for (long long procs : {1, 2, 3, 4, 7, 8, 16})
        for (double frac : {0.05, 0.30, 0.55, 0.80})
            records.push_back(record(procs, 60.0, frac * 2.0 * kGiB / 1024.0, -1.0));
    auto res = hpc2n_transform(records);
    ASSERT_EQ(res.jobs.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        double processor_equiv = res.jobs[i].num_tasks * res.jobs[i].cpu_need * 2.0;
        EXPECT_NEAR(processor_equiv, static_cast<double>(records[i].allocated_procs), 1e-9);
        EXPECT_NO_THROW(res.jobs[i].validate());
    }
}

TEST(SynthGenerate, MemoryModelMatchesTheSplit) {
    SyntheticParams p;
    p.num_jobs = 10000;
    p.seed = 42;
    auto jobs = synth_generate(p);
    int small = 0;
    for (const auto& j : jobs) {
        if (j.mem_req == 0.10) ++small;
        else {
            // 10x% for x in 2..10
            double x = j.mem_req / 0.10;
            EXPECT_NEAR(x, std::round(x), 1e-9);
            EXPECT_GE(x, 2.0 - 1e-9);
            EXPECT_LE(x, 10.0 + 1e-9);
        }
    }
    double frac = static_cast<double>(small) / jobs.size();
    EXPECT_GE(frac, 0.53);
    EXPECT_LE(frac, 0.57);
}

TEST(SynthGenerate, QuadCoreCpuRule) {
    SyntheticParams p;
    p.num_jobs = 500;
    p.seed = 7;
    for (const auto& j : synth_generate(p)) {
        if (j.num_tasks == 1) EXPECT_DOUBLE_EQ(j.cpu_need, 0.25);
        else EXPECT_DOUBLE_EQ(j.cpu_need, 1.0);
    }
}

TEST(SynthGenerate, DeterministicBySeed) {
    SyntheticParams p;
    p.num_jobs = 200;
    p.seed = 99;
    auto a = synth_generate(p);
    auto b = synth_generate(p);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].release, b[i].release);
        EXPECT_EQ(a[i].num_tasks, b[i].num_tasks);
        EXPECT_EQ(a[i].proc_time, b[i].proc_time);
        EXPECT_EQ(a[i].mem_req, b[i].mem_req);
    }
    p.seed = 100;
    auto c = synth_generate(p);
    bool differs = false;
    for (std::size_t i = 0; i < a.size() && !differs; ++i)
        differs = a[i].proc_time != c[i].proc_time;
    EXPECT_TRUE(differs);
}

TEST(SynthGenerate, RejectsBadDistributions) {
    SyntheticParams p;
    p.num_jobs = 0;
    EXPECT_THROW(synth_generate(p), std::invalid_argument);
    p.num_jobs = 10;
    p.runtime = {DistSpec::Kind::log_uniform, -5.0, 10.0};
    EXPECT_THROW(synth_generate(p), std::invalid_argument);
}

TEST(ScaleLoad, HalvesGapsWhenDoublingLoad) {
    std::vector<JobSpec> jobs;
    for (int i = 0; i < 5; ++i) jobs.push_back({i, 100.0 * i, 1, 1.0, 0.1, 50.0});
    ClusterConfig cluster{4, 8.0 * kGiB, 4};
    double load = offered_load(jobs, cluster.num_nodes);
    auto scaled = scale_load(jobs, 2.0 * load, cluster);
    for (std::size_t i = 1; i < scaled.size(); ++i) {
        double gap = scaled[i].release - scaled[i - 1].release;
        EXPECT_NEAR(gap, 50.0, 1e-9);
    }
    EXPECT_DOUBLE_EQ(scaled[0].release, 0.0);
}

TEST(ScaleLoad, HitsTheTargetExactly) {
    SyntheticParams p;
    p.num_jobs = 100;
    p.seed = 5;
    auto jobs = synth_generate(p);
    ClusterConfig cluster{32, 8.0 * kGiB, 4};
    for (double target : {0.1, 0.7, 1.5}) {
        auto scaled = scale_load(jobs, target, cluster);
        EXPECT_NEAR(offered_load(scaled, cluster.num_nodes), target, 1e-6);
    }
}

TEST(ScaleLoad, ScalingToOwnLoadIsIdentity) {
    std::vector<JobSpec> jobs;
    for (int i = 0; i < 4; ++i) jobs.push_back({i, 13.0 * i, 2, 0.5, 0.1, 40.0});
    ClusterConfig cluster{8, 8.0 * kGiB, 4};
    double load = offered_load(jobs, cluster.num_nodes);
    auto same = scale_load(jobs, load, cluster);
    for (std::size_t i = 0; i < jobs.size(); ++i)
        EXPECT_NEAR(same[i].release, jobs[i].release, 1e-9);
}

TEST(ScaleLoad, RoundTripRestoresReleases) {
    SyntheticParams p;
    p.num_jobs = 50;
    p.seed = 11;
    auto jobs = synth_generate(p);
    ClusterConfig cluster{16, 8.0 * kGiB, 4};
    double load = offered_load(jobs, cluster.num_nodes);
    auto there = scale_load(jobs, 0.9, cluster);
    auto back = scale_load(there, load, cluster);
    for (std::size_t i = 0; i < jobs.size(); ++i)
        EXPECT_NEAR(back[i].release, jobs[i].release, 1e-6 * std::max(1.0, jobs[i].release));
}

TEST(ScaleLoad, RejectsDegenerateTraces) {
    std::vector<JobSpec> one{{0, 0.0, 1, 1.0, 0.1, 10.0}};
    ClusterConfig cluster{4, 8.0 * kGiB, 4};
    EXPECT_THROW(scale_load(one, 0.5, cluster), std::invalid_argument);
    std::vector<JobSpec> same_time{{0, 5.0, 1, 1.0, 0.1, 10.0}, {1, 5.0, 1, 1.0, 0.1, 10.0}};
    EXPECT_THROW(scale_load(same_time, 0.5, cluster), std::invalid_argument);
}

TEST(SplitSegments, SingleWeekStaysTogether) {
    std::vector<JobSpec> jobs{{0, 10.0, 1, 1.0, 0.1, 5.0}, {1, 1000.0, 1, 1.0, 0.1, 5.0}};
    auto segs = split_segments(jobs);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].size(), 2u);
}

TEST(SplitSegments, BoundaryIsLeftClosed) {
    std::vector<JobSpec> jobs{{0, 0.0, 1, 1.0, 0.1, 5.0}, {1, 604800.0, 1, 1.0, 0.1, 5.0}};
    auto segs = split_segments(jobs);
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_DOUBLE_EQ(segs[1][0].release, 0.0);
}

TEST(SplitSegments, EmptyInput) {
    EXPECT_TRUE(split_segments({}).empty());
}

TEST(TraceJson, RoundTrips) {
    std::vector<JobSpec> jobs{{3, 12.5, 4, 0.5, 0.25, 777.0}, {4, 20.0, 1, 0.25, 0.1, 30.0}};
    std::stringstream buf;
    write_trace_json(buf, jobs);
    auto back = read_trace_json(buf);
    ASSERT_EQ(back.size(), jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        EXPECT_EQ(back[i].id, jobs[i].id);
        EXPECT_DOUBLE_EQ(back[i].release, jobs[i].release);
        EXPECT_EQ(back[i].num_tasks, jobs[i].num_tasks);
        EXPECT_DOUBLE_EQ(back[i].cpu_need, jobs[i].cpu_need);
        EXPECT_DOUBLE_EQ(back[i].mem_req, jobs[i].mem_req);
        EXPECT_DOUBLE_EQ(back[i].proc_time, jobs[i].proc_time);
    }
}

TEST(TraceMetaSummary, DeltaAndWork) {
    std::vector<JobSpec> jobs{{0, 0.0, 2, 0.5, 0.1, 10.0}, {1, 90.0, 1, 1.0, 0.1, 40.0}};
    TraceMeta m = trace_meta(jobs);
    EXPECT_EQ(m.num_jobs, 2u);
    EXPECT_DOUBLE_EQ(m.delta, 4.0);
    EXPECT_DOUBLE_EQ(m.total_work, 2 * 0.5 * 10.0 + 40.0);
    EXPECT_DOUBLE_EQ(m.span, 90.0);
}
