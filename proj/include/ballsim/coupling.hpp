#pragma once

#include <cstdint>
#include <vector>

#include "ballsim/framework.hpp"
#include "ballsim/process.hpp"

namespace ballsim {

/// Two Thinning trajectories driven by one shared (i1, i2) sample sequence:
/// A starts empty, B starts with f balls per bin, both use threshold t/n + f.
struct CoupledTrace {
    int64_t n = 0;
    int64_t rounds = 0;
    int64_t f = 0;
    LoadState final_a;
    LoadState final_b;
    int64_t domination_violations = 0;  // rounds with some x_i(A) > x_i(B)
    int64_t branch_disagreements = 0;   // A sends to i2 but B does not
    std::vector<int64_t> gap_a_numerator;  // per-round gap(A) * n (exact)
};

/// Runs the coupled pair for m rounds. f must be a non-negative integer (the
/// red-ball prepopulation adds whole balls per bin).
CoupledTrace coupled_thinning(int64_t n, int64_t m, const Rat& f, uint64_t seed,
                              uint64_t stream = 0, bool keep_gaps = false);

struct PrefixCheckResult {
    bool holds = true;
    int64_t delta_num = 0;  // failing quantile delta = delta_num / n
    size_t k = 0;           // failing prefix index (1-based)
    bool boundary_equal = true;  // prefix sums agree exactly at k = delta n
};

/// Exhaustive exact check that the (1+eta)-MeanThinning vector with eta=beta
/// majorizes the canonical (1+beta) vector at every quantile delta = j/n.
PrefixCheckResult beta_eta_prefix_check(int64_t n, const Rat& beta);

struct CdfDominanceResult {
    bool holds = true;
    int64_t failing_gap = 0;
    double lhs = 0, rhs = 0, slack = 0;
};

/// One-sided empirical dominance check: P[Gap_f >= g] <= P[Gap_0 + f >= g] +
/// 3 SE at every integer g spanned by the samples.
CdfDominanceResult gap_cdf_dominance(const std::vector<int64_t>& gap_f_samples,
                                     const std::vector<int64_t>& gap_0_samples, int64_t f);

}  // namespace ballsim
