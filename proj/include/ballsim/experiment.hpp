#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ballsim/coupling.hpp"
#include "ballsim/oracle.hpp"
#include "ballsim/process.hpp"

namespace ballsim {

enum class StartKind { Empty, HalfSplit, B1, B2 };

struct ExperimentSpec {
    ProcessConfig process;
    int64_t n = 1000;
    int64_t balls = 0;       // 0 -> 1000 * n
    int64_t reps = 100;
    uint64_t seed = 1;
    TraceMode trace = TraceMode::Final;
    int64_t trace_k = 0;     // 0 -> n
    double alpha = 0.7;      // lambda
    double alpha_phi = 0.01;
    double alpha_tilde = 0;  // 0 -> 1/(12n)
    double eps = 0.25;
    StartKind start = StartKind::Empty;
    int64_t start_level = 0;  // HalfSplit offset L
    int threads = 0;          // 0 -> hardware
    std::string out_path;

    int64_t effective_balls() const { return balls > 0 ? balls : 1000 * n; }
    std::string to_json() const;
};

LoadState make_start_state(StartKind kind, int64_t n, int64_t level);

int effective_threads(int requested);

/// Runs `reps` jobs indexed 0..reps-1 on a deterministic-by-index pool.
void parallel_reps(int64_t reps, int threads, const std::function<void(int64_t)>& job);

struct GapHistogram {
    std::map<Rat, int64_t> counts;
    std::vector<Rat> per_rep;  // ordered by repetition index
    int64_t reps = 0;

    double mean() const;
    std::string table() const;  // "gap : percent" lines, ascending
};

/// Seeded parallel repetitions; repetition r uses stream r of spec.seed.
GapHistogram run_gapdist(const ExperimentSpec& spec);

/// JSON artifact for a gap histogram (embeds the spec for replay).
std::string gapdist_json(const ExperimentSpec& spec, const GapHistogram& h);

/// Writes the trajectory CSV for one seeded run (stream 0). Returns the CSV
/// text (also written to spec.out_path when set).
std::string run_trajectory(const ExperimentSpec& spec);

struct ScalingRow {
    std::string process;
    int64_t n = 0;
    int64_t reps = 0;
    double mean_gap = 0;
};

std::vector<ScalingRow> run_scaling(const std::vector<ProcessConfig>& processes,
                                    const std::vector<int64_t>& ns, int64_t balls_factor,
                                    int64_t reps, uint64_t seed, int threads);

std::string scaling_csv(const std::vector<ScalingRow>& rows, int64_t balls_factor,
                        uint64_t seed);

struct CheckLine {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    uint64_t seed = 0;
    std::vector<CheckLine> checks;

    bool ok() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }
    std::string to_json() const;
};

struct VerifyKnobs {
    int64_t framework_traces = 100;
    int64_t framework_n = 64;
    int64_t framework_balls = 10000;
    int64_t grouping_traces = 1000;
    int64_t grouping_n = 50;
    int64_t grouping_balls = 5000;
    int64_t drift_states = 1000;
    int64_t drift_n = 64;
    int64_t caching2_states = 100;
    int64_t caching2_n = 100;
    int64_t counterexample_n = 10000;
    double counterexample_alpha = 0.5;
    int64_t coupling_runs = 1000;
    int64_t coupling_n = 50;
    int64_t coupling_rounds = 5000;
    int64_t coupling_f = 3;
    int64_t cdf_n = 100;
    int64_t cdf_rounds = 10000;
    int64_t cdf_reps = 1000;
    int64_t majorization_max_n = 128;
    uint64_t seed = 1;
    int threads = 0;
};

SuiteResult verify_framework_suite(const VerifyKnobs& k);
SuiteResult verify_drift_suite(const VerifyKnobs& k);
SuiteResult verify_counterexamples_suite(const VerifyKnobs& k);
SuiteResult verify_couplings_suite(const VerifyKnobs& k);
SuiteResult verify_caching2step_suite(const VerifyKnobs& k);

struct OracleComparison {
    ExactGapDistribution exact;
    std::map<Rat, int64_t> empirical;
    int64_t samples = 0;
    double tv = 0;
};

OracleComparison run_oracle_comparison(const ProcessConfig& cfg, int64_t n, int64_t m,
                                       int64_t samples, uint64_t seed, int threads);

struct LowerBoundResult {
    int64_t rounds = 0;
    double threshold = 0;  // k log n
    double frequency = 0;  // empirical P[Gap >= threshold]
};

LowerBoundResult run_lowerbound(const ProcessConfig& cfg, int64_t n, double k, int64_t reps,
                                uint64_t seed, int threads);

void write_file(const std::string& path, const std::string& content);

std::string condition_report_json(const ConditionReport& rep);
std::string expectation_json(const ExpectationResult& res);
std::string coupled_trace_csv(const CoupledTrace& trace, uint64_t seed);

}  // namespace ballsim
