#pragma once

#include <cstdint>
#include <vector>

#include "ballsim/rational.hpp"

namespace ballsim {

/// Integer load vector of n bins. W is kept in sync with the loads; every
/// threshold the processes evaluate is computed from the scaled loads
/// z_i = n*x_i - W so that comparisons against the average stay exact.
struct LoadState {
    int64_t n = 0;
    std::vector<int64_t> x;
    int64_t w = 0;

    LoadState() = default;
    explicit LoadState(int64_t bins);

    /// State with the given loads; W is derived.
    static LoadState from_loads(std::vector<int64_t> loads);

    int64_t load(int64_t i) const { return x[static_cast<size_t>(i)]; }

    /// z_i = n*x_i - W (checked against int64 overflow).
    int64_t scaled(int64_t i) const;
    std::vector<int64_t> scaled_loads() const;

    bool overloaded(int64_t i) const { return scaled(i) >= 0; }

    void add_balls(int64_t i, int64_t count);
};

inline constexpr int64_t kMaxBins = int64_t(1) << 20;

/// ceil(-y_i) for an underloaded bin, i.e. ceil((W - n*x_i)/n); 0 when z_i >= 0.
int64_t fill_deficit(const LoadState& s, int64_t i);

/// Bin indices sorted by load descending, ties by ascending index (the
/// deterministic labeling used for distribution vectors and rank targets).
std::vector<int64_t> sorted_order(const LoadState& s);

Rat gap(const LoadState& s);          // max_i x_i - W/n
Rat gap_max_min(const LoadState& s);  // max_i x_i - min_i x_i
Rat quantile(const LoadState& s);     // |{i : z_i >= 0}| / n

struct PotentialReport {
    Rat delta;      // sum |y_i|
    Rat upsilon;    // sum y_i^2
    double phi = 0;     // sum_{y_i >= 2} e^(alpha y_i)
    double lambda = 0;  // sum e^(alpha |y_i|)
    double v = 0;       // sum e^(alpha_tilde |y_i|)
    double psi = 0;     // sum_{y_i >= 2} e^(y_i / (12 n))
    Rat quantile;
    Rat gap;
};

/// All scalar observables of one state. alpha and alpha_tilde must be
/// positive; the psi field always uses 1/(12n) regardless of alpha_tilde.
PotentialReport potentials(const LoadState& s, double alpha, double alpha_tilde);

Rat delta_potential(const LoadState& s);
Rat upsilon_potential(const LoadState& s);

}  // namespace ballsim
