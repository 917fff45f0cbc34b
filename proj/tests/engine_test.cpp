#include <dfrs/bound.hpp>
#include <dfrs/engine.hpp>
#include <dfrs/experiment.hpp>
#include <dfrs/metrics.hpp>
#include <dfrs/workload.hpp>

#include <gtest/gtest.h>

using namespace dfrs;

namespace {

const double kGiB = 1024.0 * 1024.* 1024.0;

ClusterConfig cluster(int nodes, double mem_gib = 8.0) {
    return {nodes, mem_gib * kGiB, 4};
}

const JobRecord& record_of(const SimReport& r, int id) {
    for (const auto& j : r.jobs)
        if (j.id == id) return j;
    throw std::runtime_error("no such job in report");
}

void expect_conservation(const SimReport& r) {
    for (const auto& j : r.jobs) {
        if (j.rejected) continue;
        EXPECT_NEAR(j.virtual_time, j.proc_time, 1e-6 * std::max(1.0, j.proc_time));
        EXPECT_NEAR(j.yield_integral, j.proc_time, 1e-6 * std::max(1.0, j.proc_time));
    }
}

}  // namespace

TEST(Engine, LoneJobRunsAtFullSpeed) {
    // Policies that act at submission start the lone job immediately;
    // purely periodic policies hold it for the first tick instead.
    std::vector<JobSpec> trace{{0, 5.0, 2, 0.5, 0.2, 100.0}};
    for (const char* name :
         {"greedyp*/opt=min", "greedypm*/per/opt=min/mvt=600", "greedy*/opt=avg", "mcb8*/opt=avg/mvt=600"}) {
        Algorithm algo = parse_algorithm_name(name);
        algo.policy.period = 50.0;
        SimReport r = run_simulation(trace, algo, cluster(4), {0.0, nullptr, true});
        const JobRecord& j = record_of(r, 0);
        EXPECT_NEAR(j.completion, 5.0 + 100.0, 1e-6) << name;
        EXPECT_NEAR(raw_stretch(j.completion - j.release, j.proc_time), 1.0, 1e-9) << name;
        expect_conservation(r);
    }
}

TEST(Engine, EqualJobsShareTheNode) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.3, 50.0}, {1, 0.0, 1, 1.0, 0.3, 50.0}};
    Algorithm algo = parse_algorithm_name("greedyp*/opt=min");
    SimReport r = run_simulation(trace, algo, cluster(1), {0.0});
    EXPECT_NEAR(record_of(r, 0).completion, 100.0, 1e-6);
    EXPECT_NEAR(record_of(r, 1).completion, 100.0, 1e-6);
    // Both ran at yield 0.5 from the start.
    for (const auto& j : r.jobs) {
        ASSERT_FALSE(j.rejected);
        EXPECT_NEAR(j.virtual_time, 50.0, 1e-6);
    }
    expect_conservation(r);
}

TEST(Engine, YieldHistoryShowsTheHalfRate) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.3, 50.0}, {1, 0.0, 1, 1.0, 0.3, 50.0}};
    Algorithm algo = parse_algorithm_name("greedyp*/opt=min");
    SimConfig cfg{0.0};
    Simulation sim(trace, algo, cluster(1), cfg);
    SimReport r = sim.run();
    // 30 seconds in, each job has accumulated 15 seconds of virtual time.
    const JobRecord& j = record_of(r, 0);
    EXPECT_NEAR(j.yield_integral, 50.0, 1e-9);
    // Demand curve: two full-CPU jobs -> demand 2, utilization 1 on one node.
    ASSERT_FALSE(r.curve.empty());
    EXPECT_NEAR(r.curve.front().demand, 2.0, 1e-12);
    EXPECT_NEAR(r.curve.front().utilization, 1.0, 1e-12);
}

TEST(Engine, GreedyPForcesAdmissionAtRelease) {
    // Memory-tight node: the newcomer pauses the low-priority runner.
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.7, 200.0}, {1, 50.0, 1, 1.0, 0.7, 40.0}};
    Algorithm algo = parse_algorithm_name("greedyp*/opt=min");
    SimReport r = run_simulation(trace, algo, cluster(1), {0.0});
    const JobRecord& newcomer = record_of(r, 1);
    EXPECT_NEAR(newcomer.start, 50.0, 1e-9);
    EXPECT_NEAR(newcomer.completion, 90.0, 1e-6);  // runs alone at yield 1
    const JobRecord& paused = record_of(r, 0);
    EXPECT_EQ(paused.preemptions, 1);
    EXPECT_EQ(paused.resumes, 1);
    // 150 s of work left after the pause; resumes at 90 with penalty 0.
    EXPECT_NEAR(paused.completion, 240.0, 1e-6);
    expect_conservation(r);
}

TEST(Engine, PenaltyDelaysProgressAndReservesAllocation) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.7, 200.0}, {1, 50.0, 1, 1.0, 0.7, 40.0}};
    Algorithm algo = parse_algorithm_name("greedyp*/opt=min");
    SimConfig cfg;
    cfg.penalty = 300.0;
    SimReport r = run_simulation(trace, algo, cluster(1), cfg);
    const JobRecord& newcomer = record_of(r, 1);
    EXPECT_NEAR(newcomer.completion, 90.0, 1e-6);  // fresh start pays no penalty
    const JobRecord& paused = record_of(r, 0);
    EXPECT_EQ(paused.preemptions, 1);
    EXPECT_EQ(paused.resumes, 1);
    // Resumes at 90, sits out the 300 s penalty, then 150 s of work.
    EXPECT_NEAR(paused.completion, 90.0 + 300.0 + 150.0, 1e-6);
    expect_conservation(r);

    // The ledger charges one write at pause and one read at resume.
    EXPECT_EQ(r.ledger.preemptions, 1);
    EXPECT_EQ(r.ledger.resumes, 1);
    EXPECT_NEAR(r.ledger.preempt_bytes, 2.0 * 0.7 * 8.0 * kGiB, 1.0);
    EXPECT_EQ(r.ledger.migrations, 0);
}

TEST(Engine, GreedyPmMigratesAndChargesDoubleTransfer) {
    // A on node0 (mem .6), C on node1 (mem .2); D (mem .9) displaces A,
    // which migrates to node1. GreedyPM migrations ignore the remap limit.
    std::vector<JobSpec> trace{{0, 0.0, 1, 0.5, 0.6, 500.0},
                               {1, 1.0, 1, 0.5, 0.2, 500.0},
                               {2, 10.0, 1, 0.5, 0.9, 100.0}};
    Algorithm algo = parse_algorithm_name("greedypm*/opt=min");
    algo.policy.remap_limit = {RemapLimitKind::mvt, 1e9};  // pins everything for MCB8 paths
    SimConfig cfg;
    cfg.penalty = 50.0;
    SimReport r = run_simulation(trace, algo, cluster(2), cfg);
    const JobRecord& moved = record_of(r, 0);
    EXPECT_EQ(moved.migrations, 1);
    EXPECT_EQ(moved.preemptions, 0);
    EXPECT_EQ(r.ledger.migrations, 1);
    EXPECT_NEAR(r.ledger.migrate_bytes, 2.0 * 0.6 * 8.0 * kGiB, 1.0);
    const JobRecord& incoming = record_of(r, 2);
    EXPECT_NEAR(incoming.start, 10.0, 1e-9);  // admission forced at release
    expect_conservation(r);
}

TEST(Engine, PeriodicRemapLeavesStableMappingAlone) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.4, 1000.0}, {1, 0.0, 1, 1.0, 0.4, 1000.0}};
    Algorithm algo = parse_algorithm_name("/per/opt=min");
    algo.policy.period = 100.0;
    SimReport r = run_simulation(trace, algo, cluster(2), {300.0});
    // First tick starts both; later ticks find the same mapping: no churn.
    EXPECT_EQ(r.ledger.preemptions, 0);
    EXPECT_EQ(r.ledger.migrations, 0);
    for (const auto& j : r.jobs) EXPECT_NEAR(j.start, 100.0, 1e-9);
    expect_conservation(r);
}

TEST(Engine, PendingJobsWaitForTheTickUnderPer) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.4, 50.0}};
    Algorithm algo = parse_algorithm_name("/per/opt=min");
    algo.policy.period = 40.0;
    SimReport r = run_simulation(trace, algo, cluster(1), {0.0});
    EXPECT_NEAR(record_of(r, 0).start, 40.0, 1e-9);
    EXPECT_NEAR(record_of(r, 0).completion, 90.0, 1e-6);
}

TEST(Engine, ImpossibleJobIsRejectedAndSimContinues) {
    std::vector<JobSpec> trace{{0, 0.0, 4, 1.0, 0.9, 100.0},  // 4 x .9 never fit on 2 nodes
                               {1, 0.0, 1, 1.0, 0.5, 60.0}};
    for (const char* name : {"greedyp*/opt=min", "easy"}) {
        SimReport r = run_simulation(trace, parse_algorithm_name(name), cluster(2), {0.0});
        ASSERT_EQ(r.rejected_ids.size(), 1u) << name;
        EXPECT_EQ(r.rejected_ids[0], 0) << name;
        EXPECT_NEAR(record_of(r, 1).completion, 60.0, 1e-6) << name;
    }
}

TEST(Engine, BatchJobsGetDedicatedNodes) {
    std::vector<JobSpec> trace{{0, 0.0, 2, 0.5, 0.5, 10.0},
                               {1, 0.0, 2, 0.5, 0.5, 5.0},
                               {2, 0.0, 1, 0.5, 0.5, 10.0}};
    SimReport fcfs = run_simulation(trace, parse_algorithm_name("fcfs"), cluster(2), {0.0});
    // FCFS: J0 [0,10] on both nodes; J1 [10,15]; J2 [15,25].
    EXPECT_NEAR(record_of(fcfs, 0).completion, 10.0, 1e-9);
    EXPECT_NEAR(record_of(fcfs, 1).completion, 15.0, 1e-9);
    EXPECT_NEAR(record_of(fcfs, 2).completion, 25.0, 1e-9);

    SimReport easy = run_simulation(trace, parse_algorithm_name("easy"), cluster(2), {0.0});
    // EASY: J2 backfills ahead of J1? No: J2 (1 node, p=10) would delay the
    // 2-node reservation at t=10, so order is preserved here.
    EXPECT_NEAR(record_of(easy, 0).completion, 10.0, 1e-9);
    EXPECT_NEAR(record_of(easy, 1).completion, 15.0, 1e-9);
    expect_conservation(fcfs);
    expect_conservation(easy);
}

TEST(Engine, EasyBackfillBeatsFcfsOnTheClassicPattern) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 0.5, 0.5, 10.0},
                               {1, 1.0, 2, 0.5, 0.5, 5.0},
                               {2, 2.0, 1, 0.5, 0.5, 8.0}};
    SimReport fcfs = run_simulation(trace, parse_algorithm_name("fcfs"), cluster(2), {0.0});
    SimReport easy = run_simulation(trace, parse_algorithm_name("easy"), cluster(2), {0.0});
    EXPECT_NEAR(record_of(easy, 2).completion, 10.0, 1e-9);   // backfilled at release
    EXPECT_NEAR(record_of(fcfs, 2).completion, 23.0, 1e-9);   // waits behind the head
}

TEST(Engine, EquipartitionMatchesTheEqualShareAdversary) {
    for (int n : {4, 10}) {
        auto trace = equal_share_adversary(n);
        SimReport r =
            run_simulation(trace, parse_algorithm_name("equipartition"), cluster(1), {0.0});
        double horizon = trace.back().release + n;
        for (const auto& j : r.jobs) EXPECT_NEAR(j.completion, horizon, 1e-6);
        EXPECT_NEAR(max_raw_stretch(r), static_cast<double>(n), 1e-6);
        expect_conservation(r);
    }
}

TEST(Engine, GreedyPMinYieldMatchesEqualSharingOnOneNode) {
    // On a single node with fully parallel jobs and no penalty, forced
    // admission plus max-min allocation degenerates to equal sharing, so the
    // completions must match the equal-share run exactly.
    for (int n : {4, 10}) {
        auto trace = equal_share_adversary(n);
        SimReport greedy =
            run_simulation(trace, parse_algorithm_name("greedyp*/opt=min"), cluster(1), {0.0});
        SimReport equal =
            run_simulation(trace, parse_algorithm_name("equipartition"), cluster(1), {0.0});
        for (const auto& j : greedy.jobs)
            EXPECT_NEAR(j.completion, record_of(equal, j.id).completion, 1e-6);
    }
}

TEST(Engine, StretchPeriodicPolicyDrains) {
    SyntheticParams p;
    p.num_jobs = 25;
    p.seed = 3;
    p.task_count = {DistSpec::Kind::pow2_uniform, 0.0, 2.0};
    p.interarrival = {DistSpec::Kind::exponential, 200.0, 0.0};
    auto trace = synth_generate(p);
    Algorithm algo = parse_algorithm_name("/stretch-per/opt=max/mvt=600");
    algo.policy.period = 600.0;
    SimReport r = run_simulation(trace, algo, cluster(8), {300.0});
    expect_conservation(r);
    Algorithm avg = parse_algorithm_name("/stretch-per/opt=avg");
    avg.policy.period = 600.0;
    expect_conservation(run_simulation(trace, avg, cluster(8), {300.0}));
}

TEST(Engine, MidSizedSweepKeepsInvariants) {
    SyntheticParams p;
    p.num_jobs = 40;
    p.seed = 17;
    p.task_count = {DistSpec::Kind::pow2_uniform, 0.0, 3.0};
    p.interarrival = {DistSpec::Kind::exponential, 400.0, 0.0};
    auto trace = synth_generate(p);
    for (const char* name : {"greedy*/opt=min", "greedyp/per/opt=min", "greedypm*/per/opt=min/mvt=600",
                             "mcb8/per/opt=min/mft=300", "mcb8*/per/opt=avg/mvt=600"}) {
        Algorithm algo = parse_algorithm_name(name);
        algo.policy.period = 600.0;
        SimReport r = run_simulation(trace, algo, cluster(8), {300.0});
        expect_conservation(r);
        // Job-level ledger identities.
        long long preempts = 0, migrations = 0;
        for (const auto& j : r.jobs) {
            preempts += j.preemptions;
            migrations += j.migrations;
        }
        EXPECT_EQ(preempts, r.ledger.preemptions) << name;
        EXPECT_EQ(migrations, r.ledger.migrations) << name;
    }
}

TEST(Engine, FuzzAcrossPoliciesAndSeeds) {
    // Every run must drain, conserve work, respect capacities (the engine
    // validates those internally) and keep the ledger identities.
    const char* names[] = {"greedy*/opt=min",  "greedyp*/opt=avg",
                           "greedypm*/opt=min", "greedy/per/opt=avg",
                           "greedyp*/per/opt=min/mvt=300", "mcb8*/opt=min/mft=600",
                           "mcb8*/per/opt=avg/mvt=600",    "/stretch-per/opt=avg"};
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        SyntheticParams p;
        p.num_jobs = 25;
        p.seed = seed;
        p.task_count = {DistSpec::Kind::pow2_uniform, 0.0, 2.0};
        p.interarrival = {DistSpec::Kind::exponential, 300.0, 0.0};
        p.runtime = {DistSpec::Kind::log_uniform, 30.0, 7200.0};
        auto trace = synth_generate(p);
        for (const char* name : names) {
            Algorithm algo = parse_algorithm_name(name);
            algo.policy.period = 300.0;
            SimReport r = run_simulation(trace, algo, cluster(6), {150.0});
            expect_conservation(r);
            long long preempts = 0, migrations = 0;
            for (const auto& j : r.jobs) {
                preempts += j.preemptions;
                migrations += j.migrations;
            }
            EXPECT_EQ(preempts, r.ledger.preemptions) << name << " seed " << seed;
            EXPECT_EQ(migrations, r.ledger.migrations) << name << " seed " << seed;
        }
    }
}

TEST(Engine, RawStretchNeverBeatsTheBound) {
    Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<JobSpec> trace;
        int n = 3 + static_cast<int>(rng.uniform_int(0, 3));
        for (int i = 0; i < n; ++i)
            trace.push_back({i, static_cast<double>(rng.uniform_int(0, 50)), 1, 1.0, 0.2,
                             static_cast<double>(rng.uniform_int(5, 60))});
        auto bound = lower_bound_stretch(trace, 2);
        for (const char* name : {"greedyp*/opt=min", "fcfs", "easy"}) {
            SimReport r = run_simulation(trace, parse_algorithm_name(name), cluster(2), {0.0});
            EXPECT_GE(max_raw_stretch(r), bound.s_lower - 1e-6) << name;
        }
    }
}

template <typename T>
constexpr bool has_proc_time = requires(T v) { v.proc_time; };

TEST(Engine, PoliciesCannotSeeProcessingTimes) {
    // The policy-facing job view carries no processing time at all.
    static_assert(!has_proc_time<JobView>);
    static_assert(!has_proc_time<PackJob>);
    static_assert(has_proc_time<JobSpec>);
}

TEST(Engine, DemandAndUtilizationSamples) {
    // One running 2-task full-CPU job: demand 2, utilization 2.
    std::vector<JobSpec> trace{{0, 0.0, 2, 1.0, 0.2, 50.0}};
    SimReport r = run_simulation(trace, parse_algorithm_name("greedy*/opt=min"), cluster(2), {0.0});
    ASSERT_GE(r.curve.size(), 2u);
    EXPECT_NEAR(r.curve.front().demand, 2.0, 1e-12);
    EXPECT_NEAR(r.curve.front().utilization, 2.0, 1e-12);
    // After the drain both curves are zero.
    EXPECT_NEAR(r.curve.back().demand, 0.0, 1e-12);
    EXPECT_NEAR(r.curve.back().utilization, 0.0, 1e-12);
}

TEST(Engine, PenaltyJobsDemandButDoNotUtilize) {
    // The paused job resumes into a penalty window: it counts toward demand
    // while contributing nothing to utilization.
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.7, 200.0}, {1, 50.0, 1, 1.0, 0.7, 40.0}};
    SimReport r = run_simulation(trace, parse_algorithm_name("greedyp*/opt=min"), cluster(1),
                                 {300.0});
    // Job 1 completes at 90; job 0 resumes there and sits in penalty.
    bool found = false;
    for (const auto& pt : r.curve) {
        if (pt.time >= 90.0 && pt.time < 390.0) {
            EXPECT_NEAR(pt.demand, 1.0, 1e-12);
            EXPECT_NEAR(pt.utilization, 0.0, 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Engine, EventLogHasTheTabSeparatedShape) {
    std::vector<JobSpec> trace{{0, 0.0, 1, 1.0, 0.4, 20.0}};
    std::ostringstream log;
    SimConfig cfg;
    cfg.penalty = 0.0;
    cfg.event_log = &log;
    run_simulation(trace, parse_algorithm_name("greedy*/opt=min"), cluster(1), cfg);
    std::string text = log.str();
    EXPECT_NE(text.find("submit"), std::string::npos);
    EXPECT_NE(text.find("start"), std::string::npos);
    EXPECT_NE(text.find("complete"), std::string::npos);
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 4) << line;
    }
}
