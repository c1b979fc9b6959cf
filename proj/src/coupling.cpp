#include "ballsim/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ballsim {

CoupledTrace coupled_thinning(int64_t n, int64_t m, const Rat& f, uint64_t seed,
                              uint64_t stream, bool keep_gaps) {
    if (f < Rat(0) || !f.is_integer())
        throw std::invalid_argument("coupled_thinning: f must be a non-negative integer");
    const int64_t fi = int64_t(f.num());

    LoadState a(n);
    LoadState b = LoadState::from_loads(std::vector<int64_t>(size_t(n), fi));
    CoupledTrace out;
    out.n = n;
    out.rounds = m;
    out.f = fi;

    Rng rng(seed, stream);
    for (int64_t t = 0; t < m; ++t) {
        int64_t i1 = int64_t(rng.below(uint64_t(n)));
        int64_t i2 = int64_t(rng.below(uint64_t(n)));
        // Threshold t/n + f, compared as n*x < t + n*f.
        bool a_first = n * a.x[size_t(i1)] < t + n * fi;
        bool b_first = n * b.x[size_t(i1)] < t + n * fi;
        a.add_balls(a_first ? i1 : i2, 1);
        b.add_balls(b_first ? i1 : i2, 1);
        // Proof case 2: when A rejects its first sample, the induction
        // hypothesis forces B to reject it too.
        if (!a_first && b_first) out.branch_disagreements += 1;
        bool dominated = true;
        for (int64_t i = 0; i < n; ++i) {
            if (a.x[size_t(i)] > b.x[size_t(i)]) { dominated = false; break; }
        }
        if (!dominated) out.domination_violations += 1;
        if (keep_gaps) {
            int64_t mx = *std::max_element(a.x.begin(), a.x.end());
            out.gap_a_numerator.push_back(n * mx - a.w);
        }
    }
    out.final_a = std::move(a);
    out.final_b = std::move(b);
    return out;
}

PrefixCheckResult beta_eta_prefix_check(int64_t n, const Rat& beta) {
    PrefixCheckResult res;
    for (int64_t j = 1; j <= n; ++j) {
        Rat delta(j, n);
        // (1+eta)-MeanThinning vector at quantile delta, eta = beta.
        Rat over = (Rat(1) - beta * (Rat(1) - delta)) / Rat(n);
        Rat under = (Rat(1) + beta * delta) / Rat(n);
        Rat prefix_p, prefix_q;
        for (int64_t k = 1; k <= n; ++k) {
            prefix_p += k <= j ? over : under;
            prefix_q += (Rat(1) - beta) * Rat(1, n) + beta * Rat(2 * k - 1, n * n);
            if (prefix_p < prefix_q) {
                res.holds = false;
                res.delta_num = j;
                res.k = size_t(k);
                return res;
            }
            if (k == j && prefix_p != prefix_q) res.boundary_equal = false;
        }
    }
    return res;
}

CdfDominanceResult gap_cdf_dominance(const std::vector<int64_t>& gap_f_samples,
                                     const std::vector<int64_t>& gap_0_samples, int64_t f) {
    CdfDominanceResult res;
    if (gap_f_samples.empty() || gap_0_samples.empty())
        throw std::invalid_argument("gap_cdf_dominance: empty samples");
    int64_t lo = *std::min_element(gap_f_samples.begin(), gap_f_samples.end());
    int64_t hi = *std::max_element(gap_f_samples.begin(), gap_f_samples.end());
    for (int64_t v : gap_0_samples) {
        lo = std::min(lo, v + f);
        hi = std::max(hi, v + f);
    }
    const double r1 = double(gap_f_samples.size());
    const double r2 = double(gap_0_samples.size());
    for (int64_t g = lo; g <= hi + 1; ++g) {
        double p1 = 0, p2 = 0;
        for (int64_t v : gap_f_samples) p1 += v >= g ? 1 : 0;
        for (int64_t v : gap_0_samples) p2 += v + f >= g ? 1 : 0;
        p1 /= r1;
        p2 /= r2;
        double se = std::sqrt(p1 * (1 - p1) / r1 + p2 * (1 - p2) / r2);
        if (p1 > p2 + 3 * se) {
            res.holds = false;
            res.failing_gap = g;
            res.lhs = p1;
            res.rhs = p2;
            res.slack = 3 * se;
            return res;
        }
    }
    return res;
}

}  // namespace ballsim
