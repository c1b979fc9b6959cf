#include <doctest.h>

#include "ballsim/experiment.hpp"

using namespace ballsim;

TEST_CASE("gapdist is thread-count invariant") {
    ExperimentSpec spec;
    spec.process = ProcessConfig::twinning();
    spec.n = 32;
    spec.balls = 2000;
    spec.reps = 16;
    spec.seed = 77;

    spec.threads = 1;
    auto h1 = run_gapdist(spec);
    spec.threads = 2;
    auto h2 = run_gapdist(spec);
    spec.threads = 4;
    auto h4 = run_gapdist(spec);
    CHECK(h1.per_rep == h2.per_rep);
    CHECK(h1.per_rep == h4.per_rep);
    CHECK(h1.counts == h2.counts);
}

TEST_CASE("spec json omits thread count") {
    ExperimentSpec spec;
    spec.threads = 3;
    std::string a = spec.to_json();
    spec.threads = 7;
    CHECK(a == spec.to_json());
}

TEST_CASE("trajectory csv is deterministic and embeds the spec") {
    ExperimentSpec spec;
    spec.process = ProcessConfig::mean_thinning();
    spec.n = 16;
    spec.balls = 200;
    spec.seed = 5;
    spec.trace = TraceMode::EveryK;
    std::string a = run_trajectory(spec);
    std::string b = run_trajectory(spec);
    CHECK(a == b);
    CHECK(a.rfind("# {", 0) == 0);
    CHECK(a.find("t,balls,gap,delta,upsilon,phi,lambda,v,psi,quantile,lambda_norm,gap_minmax") != std::string::npos);
}

TEST_CASE("half split start") {
    LoadState s = make_start_state(StartKind::HalfSplit, 8, 3);
    CHECK(s.w == 8 * 3);
    auto z = s.scaled_loads();
    for (int64_t i = 0; i < 4; ++i) CHECK(z[size_t(i)] == 3 * 8);
    for (int64_t i = 4; i < 8; ++i) CHECK(z[size_t(i)] == -3 * 8);
    CHECK_THROWS_AS(make_start_state(StartKind::HalfSplit, 7, 3), std::invalid_argument);
}

TEST_CASE("gap histogram table format") {
    GapHistogram h;
    h.reps = 4;
    h.per_rep = {Rat(2), Rat(2), Rat(3), Rat(2)};
    for (auto& g : h.per_rep) h.counts[g] += 1;
    std::string t = h.table();
    CHECK(t.find("2 : 75%") != std::string::npos);
    CHECK(t.find("3 : 25%") != std::string::npos);
    CHECK(h.mean() == doctest::Approx(2.25));
}

TEST_CASE("oracle comparison on a tiny instance") {
    auto cmp = run_oracle_comparison(ProcessConfig::one_choice(), 2, 2, 20000, 9, 2);
    CHECK(cmp.tv < 0.05);
}

TEST_CASE("scaling rows") {
    auto rows = run_scaling({ProcessConfig::one_choice(), ProcessConfig::two_choice()}, {16},
                            50, 8, 3, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].process == "onechoice");
    CHECK(rows[1].process == "twochoice");
    CHECK(rows[0].mean_gap > rows[1].mean_gap);  // one choice is worse
    std::string csv = scaling_csv(rows, 50, 3);
    CHECK(csv.find("process,n,reps,mean_gap") != std::string::npos);
    CHECK(csv.rfind("# {", 0) == 0);
}

TEST_CASE("lowerbound run reports a frequency") {
    auto res = run_lowerbound(ProcessConfig::mean_thinning(), 64, 0.05, 20, 4, 2);
    CHECK(res.frequency >= 0.0);
    CHECK(res.frequency <= 1.0);
    CHECK(res.rounds > 0);
}

TEST_CASE("report serialization") {
    ProcessConfig mt = ProcessConfig::mean_thinning();
    LoadState s = LoadState::from_loads({4, 4, 0, 0});
    auto dv = distribution_vector(mt, ProcessState::from_load(mt, s));
    std::string cj = condition_report_json(check_P3(dv, s, Rat(1), Rat(1)));
    CHECK(cj.find("\"condition\":\"P3\"") != std::string::npos);
    CHECK(cj.find("\"holds\":true") != std::string::npos);

    ProcessConfig tw = ProcessConfig::twinning();
    ProcessState st = ProcessState::from_load(tw, LoadState::from_loads({1, 0}));
    std::string ej = expectation_json(verify_upsilon_drop(tw, st));
    CHECK(ej.find("\"expected_exact\":\"5/4\"") != std::string::npos);
    CHECK(ej.find("\"satisfied\":true") != std::string::npos);

    auto tr = coupled_thinning(8, 50, Rat(1), 5, 0, true);
    std::string csv = coupled_trace_csv(tr, 5);
    CHECK(csv.rfind("# {", 0) == 0);
    CHECK(csv.find("t,gap_a") != std::string::npos);
}

TEST_CASE("huge k makes the lower-bound event impossible") {
    auto res = run_lowerbound(ProcessConfig::twinning(), 64, 10.0, 10, 4, 2);
    CHECK(res.frequency == doctest::Approx(0.0));
}

TEST_CASE("adversarial half-split start rebalances") {
    // MeanThinning from half the bins at +log n, half at -log n: the
    // absolute and quadratic potentials drop right away and the run ends
    // nearly balanced while the exponential potential settles at O(n).
    const int64_t n = 1000;
    ExperimentSpec spec;
    spec.process = ProcessConfig::mean_thinning();
    spec.n = n;
    spec.balls = 60 * n;
    spec.seed = 11;
    spec.start = StartKind::HalfSplit;
    spec.start_level = 7;  // ~log(1000)
    spec.trace = TraceMode::EveryK;
    spec.trace_k = n;

    LoadState start = make_start_state(spec.start, spec.n, spec.start_level);
    ProcessState st = ProcessState::from_load(spec.process, start);
    SimulateOptions opt;
    opt.trace = TraceMode::EveryK;
    opt.trace_k = n;
    opt.alpha = spec.alpha;
    auto res = simulate(spec.process, std::move(st), spec.balls, spec.seed, 0, opt);
    REQUIRE(res.trace.size() > 10);
    const auto& first = res.trace.front().report;
    const auto& last = res.trace.back().report;
    CHECK(first.delta == Rat(7 * n));
    CHECK(last.delta < first.delta);
    CHECK(last.upsilon < first.upsilon);
    CHECK(last.gap.to_double() < 7.0);
    CHECK(last.lambda < 64.0 * double(n));  // stabilized at O(n)
}
