#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ballsim/process.hpp"

namespace ballsim {

/// Per-rank allocation probabilities over the deterministic sorted labeling
/// (rank 0 = most loaded). Exact rationals, sum to 1.
struct DistributionVector {
    std::vector<Rat> p;

    Rat prefix(size_t k) const {  // sum of the first k entries
        Rat acc;
        for (size_t i = 0; i < k; ++i) acc += p[i];
        return acc;
    }
};

/// Conditional single-round target distribution of the process at `state`.
/// For Thinning the marginal over the final target; for Caching conditional
/// on the current cache (throws if the cache is absent); for DChoice the
/// exact tie-aware rank distribution; for OnePlusBeta the canonical
/// (1-beta)/n + beta(2i-1)/n^2 vector.
DistributionVector distribution_vector(const ProcessConfig& cfg, const ProcessState& state);

enum class Condition { P1, P2, P3, P4, W1, W2, W3 };

std::string condition_name(Condition c);

struct ConditionReport {
    Condition condition = Condition::P1;
    bool holds = false;
    bool vacuous = false;        // quantile band / empty-side cases
    std::string witness;         // first violated inequality when holds == false
    std::optional<Rat> k1, k2;   // P3 constants
    std::optional<Rat> k4;       // P4 fitted constant
    std::optional<int64_t> w_plus, w_minus;  // W2/W3 fitted weights
};

/// P1: every prefix sum of p is at most k/n.
ConditionReport check_P1(const DistributionVector& p);

/// P2: max overloaded-rank probability <= 1/n <= min underloaded-rank
/// probability (each side vacuous when the bin set is empty).
ConditionReport check_P2(const DistributionVector& p, const LoadState& state);

/// P3: p_+ <= 1/n - k1(1-delta)/n and p_- >= 1/n + k2 delta/n, exact.
ConditionReport check_P3(const DistributionVector& p, const LoadState& state, const Rat& k1,
                         const Rat& k2);

/// Largest constants satisfied by this state (both sides clamped to [0,1]).
std::pair<Rat, Rat> fit_P3(const DistributionVector& p, const LoadState& state);

/// P4: when delta in (eps, 1-eps), reports the largest k4 with p_i >= k4/n
/// for all ranks; vacuous outside the band.
ConditionReport check_P4(const DistributionVector& p, const LoadState& state, const Rat& eps);

/// Round-by-round verification that realized placements obey the named
/// weight condition. `states` are the pre-round states matching `trace`.
ConditionReport classify_weights(Condition cond, const std::vector<AllocationEvent>& trace,
                                 const std::vector<LoadState>& states);

/// True iff every prefix sum of p is >= the matching prefix sum of q.
bool majorizes(const DistributionVector& p, const DistributionVector& q);

/// First k (1-based) where the majorization prefix inequality fails, or 0.
size_t majorization_violation(const DistributionVector& p, const DistributionVector& q);

struct AtomicAllocation {
    int64_t round = 0;
    int64_t bin = 0;
};

struct UnfoldedTrace {
    std::vector<AtomicAllocation> atoms;
    std::vector<size_t> round_begin;  // index into atoms where each round starts
};

/// Expands every round into w^t single-ball allocations, ordered so that the
/// W1-designated bins (the ceil(-y)+1 and ceil(-y) receivers) come first.
/// Pre-round states are reconstructed by replaying from `start`.
UnfoldedTrace unfold(const LoadState& start, const std::vector<AllocationEvent>& trace);

struct CachingGroup {
    size_t begin = 0;     // first atomic index of the group
    size_t size = 0;      // ceil(-y_i)+1 at group start, or 1
    int64_t chosen = 0;   // target of the first atomic allocation
    bool underloaded = false;
};

struct CachingGroupResult {
    std::vector<CachingGroup> groups;
    ConditionReport report;  // W1 verdict over all complete groups
    size_t leftover = 0;     // trailing atoms not forming a complete group
};

/// Partitions a Caching atomic trace (one ball per event) into rounds of the
/// folded process and verifies each complete group against the W1 caps
/// relative to the group-start state.
CachingGroupResult group_caching_trace(const LoadState& start,
                                       const std::vector<AllocationEvent>& trace);

}  // namespace ballsim
