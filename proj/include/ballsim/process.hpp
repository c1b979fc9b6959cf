#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ballsim/load_state.hpp"
#include "ballsim/rng.hpp"

namespace ballsim {

enum class ProcessKind {
    OneChoice,
    DChoice,
    OnePlusBeta,
    Caching,
    Packing,
    OverPacking,
    Twinning,
    Thinning,
    MeanThinning,
    OnePlusEtaMeanThinning,
};

std::string kind_name(ProcessKind k);

/// Packing's fill rule. Overshoot is the formal definition (fill an
/// underloaded bin to ceil(W/n)+1, i.e. deficit+1 balls, the W1 weight);
/// Threshold stops at the first load strictly above the average
/// (floor(W/n)+1), which is the rule behind the reported gap tables.
enum class PackingFill { Overshoot, Threshold };

struct ProcessConfig {
    ProcessKind kind = ProcessKind::OneChoice;
    int64_t d = 2;    // DChoice
    Rat beta;         // OnePlusBeta, in (0,1]
    Rat eta;          // OnePlusEtaMeanThinning, in (0,1]
    Rat f;            // Thinning threshold offset, >= 0
    PackingFill pack_fill = PackingFill::Overshoot;

    ProcessConfig() = default;
    explicit ProcessConfig(ProcessKind k) : kind(k) {}

    static ProcessConfig one_choice() { return ProcessConfig(ProcessKind::OneChoice); }
    static ProcessConfig d_choice(int64_t d);
    static ProcessConfig two_choice() { return d_choice(2); }
    static ProcessConfig one_plus_beta(Rat beta);
    static ProcessConfig caching() { return ProcessConfig(ProcessKind::Caching); }
    static ProcessConfig packing() { return ProcessConfig(ProcessKind::Packing); }
    static ProcessConfig packing_threshold_fill() {
        ProcessConfig c(ProcessKind::Packing);
        c.pack_fill = PackingFill::Threshold;
        return c;
    }
    static ProcessConfig over_packing() { return ProcessConfig(ProcessKind::OverPacking); }
    static ProcessConfig twinning() { return ProcessConfig(ProcessKind::Twinning); }
    static ProcessConfig thinning(Rat f);
    static ProcessConfig mean_thinning() { return thinning(Rat(0)); }
    static ProcessConfig one_plus_eta_mean_thinning(Rat eta);

    void validate() const;
    std::string name() const;

    /// Exactly one ball per round (w^t = 1 for all t)?
    bool single_ball() const {
        return kind != ProcessKind::Packing && kind != ProcessKind::OverPacking &&
               kind != ProcessKind::Twinning;
    }
};

/// Parses names like "meanthinning", "twochoice", "d-choice". Throws on
/// unknown names.
ProcessKind parse_kind(const std::string& name);

struct ProcessState {
    LoadState load;
    std::optional<int64_t> cache;  // Caching only
    int64_t round = 0;

    static ProcessState initial(const ProcessConfig& cfg, int64_t n);
    static ProcessState from_load(const ProcessConfig& cfg, LoadState load);
};

struct AllocationEvent {
    int64_t round = 0;
    std::vector<int64_t> samples;                       // uniform samples (+ cache read)
    std::vector<std::pair<int64_t, int64_t>> placements;  // (bin, balls)
    int64_t weight = 0;                                 // total balls this round
};

/// Runs one round of the configured process, mutating `state` and consuming
/// randomness from `rng`. Returns the realized allocation.
AllocationEvent step(const ProcessConfig& cfg, ProcessState& state, Rng& rng);

enum class TraceMode { Final, EveryK, Full };

struct SimulateOptions {
    TraceMode trace = TraceMode::Final;
    int64_t trace_k = 0;  // 0 -> defaults to n
    double alpha = 0.7;        // lambda
    double alpha_phi = 0.01;   // phi is logged at its own scale
    double alpha_tilde = 0.0;  // 0 -> defaults to 1/(12n)
};

struct TracePoint {
    int64_t round = 0;
    int64_t balls = 0;
    PotentialReport report;
    double gap_minmax = 0;  // max load - min load (gap vs average is canonical)
};

struct SimulationResult {
    ProcessState state;
    std::vector<TracePoint> trace;
    int64_t rounds = 0;
};

/// Runs rounds until W >= balls (ball-count semantics; for single-ball
/// processes this is exactly `balls` rounds). Deterministic for a fixed
/// (cfg, start, balls, seed, stream).
SimulationResult simulate(const ProcessConfig& cfg, ProcessState start, int64_t balls,
                          uint64_t seed, uint64_t stream,
                          const SimulateOptions& opt = SimulateOptions{});

SimulationResult simulate(const ProcessConfig& cfg, int64_t n, int64_t balls, uint64_t seed,
                          uint64_t stream = 0, const SimulateOptions& opt = SimulateOptions{});

}  // namespace ballsim
