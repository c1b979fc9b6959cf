#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ballsim/framework.hpp"
#include "ballsim/process.hpp"

namespace ballsim {

enum class PotentialId { Const1, Delta, Upsilon, Phi, Lambda, V, Psi };

std::string potential_name(PotentialId id);

/// One verified inequality E[F^{t+1} | state] <= bound. Exponential
/// potentials carry log-domain values so that e.g. e^(alpha n^2) states stay
/// representable; Delta and Upsilon carry exact rationals.
struct ExpectationResult {
    PotentialId potential = PotentialId::Const1;
    double alpha = 0;
    double current = 0;
    double expected = 0;
    double log_current = 0;   // natural log; -inf for zero
    double log_expected = 0;
    std::optional<Rat> current_exact;
    std::optional<Rat> expected_exact;
    double bound = 0;         // meaning depends on the verifier
    bool satisfied = true;
    bool log_domain = false;
    std::string note;
};

/// Exact enumeration of E[F^{t+1} | state]: sums the potential of the
/// deterministic post-allocation state over every target rank, weighted by
/// the process's conditional distribution vector. Delta/Upsilon/Const1 are
/// exact rationals; exponentials switch to log-sum-exp when the exponents
/// exceed double range. OverPacking is not supported (its round is not a
/// single-target update).
ExpectationResult one_step_expectation(const ProcessConfig& cfg, const ProcessState& state,
                                       PotentialId id, double alpha);

/// Process weight constants (w_+, w_-) under W2/W3.
std::pair<int64_t, int64_t> process_weights(const ProcessConfig& cfg);

/// E[Upsilon'] <= Upsilon - (p_- w_- - p_+ w_+) Delta + 4 w_-^2, both sides
/// exact; init also reports the drift constant min{k1,k2} or w_- - w_+.
ExpectationResult verify_upsilon_drop(const ProcessConfig& cfg, const ProcessState& state);

/// Packing (uniform P1+W1) bound on E[Phi'] against the explicit one-round
/// upper bound with additive e^(3 alpha). Relative slack `rel_slack`.
ExpectationResult verify_phi_bound(const LoadState& state, double alpha,
                                   double rel_slack = 1e-9);

struct LambdaChangeResult {
    ExpectationResult general;           // increase bound with c4 = 3 w_- e^(2 w_-)
    std::optional<ExpectationResult> in_band;  // drop bound when delta in (eps, 1-eps)
    bool band = false;
    double fitted_c3 = 0;
};

/// Largest alpha at which the in-band drop bound applies to this process.
double lambda_alpha_cap(const ProcessConfig& cfg, double eps);

LambdaChangeResult verify_lambda_change(const ProcessConfig& cfg, const ProcessState& state,
                                        double eps, double alpha);

/// Scale of the weak exponential potential for this process class.
double v_alpha_tilde(const ProcessConfig& cfg, int64_t n);

/// E[V'] <= V (1 - c5/n^3) + 2n for a fitted c5 > 0.
ExpectationResult verify_v_drop(const ProcessConfig& cfg, const ProcessState& state);

/// Exact E[Psi^(t+2)] over both uniform samples of two Caching rounds from
/// (state, cache), against Psi (1 - 1/(24 n^3)) + 6. n > 512 rejected.
ExpectationResult caching_two_step_expectation(const LoadState& state, int64_t cache);

/// Worst case of the two-step bound over all cache positions.
ExpectationResult caching_two_step_worst_cache(const LoadState& state);

enum class Counterexample { B1, B2 };

/// Integer load state realizing the named adversarial configuration (a
/// uniform offset makes all loads non-negative). B1 needs square n, B2 even
/// n; both make an exponential potential increase in expectation.
LoadState counterexample_config(Counterexample kind, int64_t n);

struct CounterexampleResult {
    ExpectationResult b1;  // Packing / Phi increase
    ExpectationResult b2;  // MeanThinning / Lambda increase (log domain)
    bool b2_quantile_exact = false;  // delta == 1 - 2/n
};

CounterexampleResult verify_counterexamples(int64_t n, double alpha);

struct ExactGapDistribution {
    ProcessKind kind;
    int64_t n = 0;
    int64_t m = 0;
    std::map<Rat, Rat> prob;  // gap value -> exact probability

    Rat total() const {
        Rat t;
        for (auto& [g, p] : prob) t += p;
        return t;
    }
};

/// Ground-truth gap distribution by dynamic programming over canonical
/// sorted load states (cache load tracked for Caching). Guarded to n <= 4,
/// m <= 12.
ExactGapDistribution exact_gap_distribution(const ProcessConfig& cfg, int64_t n, int64_t m);

/// Total-variation distance between the exact distribution and an empirical
/// histogram of gap values.
double tv_distance(const ExactGapDistribution& exact, const std::map<Rat, int64_t>& counts,
                   int64_t samples);

/// Simulates the process for a uniform number of rounds in [0, 50n] from the
/// empty state (guarantees integer loads and sum z = 0).
ProcessState random_reachable_state(const ProcessConfig& cfg, int64_t n, Rng& rng);

}  // namespace ballsim
