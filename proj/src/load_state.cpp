#include "ballsim/load_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ballsim {

LoadState::LoadState(int64_t bins) : n(bins), x(static_cast<size_t>(bins), 0), w(0) {
    if (bins < 2) throw std::invalid_argument("LoadState: need n >= 2");
    if (bins > kMaxBins) throw std::invalid_argument("LoadState: n exceeds 2^20");
}

LoadState LoadState::from_loads(std::vector<int64_t> loads) {
    LoadState s(static_cast<int64_t>(loads.size()));
    for (int64_t v : loads) {
        if (v < 0) throw std::invalid_argument("LoadState: negative load");
    }
    s.x = std::move(loads);
    int64_t w = 0;
    for (int64_t v : s.x) {
        if (__builtin_add_overflow(w, v, &w))
            throw std::overflow_error("LoadState: total weight overflow");
    }
    s.w = w;
    return s;
}

int64_t LoadState::scaled(int64_t i) const {
    int64_t prod;
    if (__builtin_mul_overflow(n, x[static_cast<size_t>(i)], &prod) ||
        __builtin_sub_overflow(prod, w, &prod)) {
        throw std::overflow_error("LoadState: scaled load exceeds int64");
    }
    return prod;
}

std::vector<int64_t> LoadState::scaled_loads() const {
    std::vector<int64_t> z(x.size());
    for (int64_t i = 0; i < n; ++i) z[static_cast<size_t>(i)] = scaled(i);
    return z;
}

void LoadState::add_balls(int64_t i, int64_t count) {
    if (__builtin_add_overflow(x[static_cast<size_t>(i)], count, &x[static_cast<size_t>(i)]) ||
        __builtin_add_overflow(w, count, &w)) {
        throw std::overflow_error("LoadState: load overflow");
    }
}

int64_t fill_deficit(const LoadState& s, int64_t i) {
    int64_t z = s.scaled(i);
    if (z >= 0) return 0;
    return (-z + s.n - 1) / s.n;  // ceil(-z/n)
}

std::vector<int64_t> sorted_order(const LoadState& s) {
    std::vector<int64_t> order(static_cast<size_t>(s.n));
    std::iota(order.begin(), order.end(), int64_t(0));
    std::stable_sort(order.begin(), order.end(), [&s](int64_t a, int64_t b) {
        return s.x[static_cast<size_t>(a)] > s.x[static_cast<size_t>(b)];
    });
    return order;
}

Rat gap(const LoadState& s) {
    int64_t max_z = s.scaled(0);
    for (int64_t i = 1; i < s.n; ++i) max_z = std::max(max_z, s.scaled(i));
    return Rat(max_z, s.n);
}

Rat gap_max_min(const LoadState& s) {
    auto [mn, mx] = std::minmax_element(s.x.begin(), s.x.end());
    return Rat(*mx - *mn);
}

Rat quantile(const LoadState& s) {
    int64_t count = 0;
    for (int64_t i = 0; i < s.n; ++i) {
        if (s.scaled(i) >= 0) ++count;
    }
    return Rat(count, s.n);
}

Rat delta_potential(const LoadState& s) {
    int128 acc = 0;
    for (int64_t i = 0; i < s.n; ++i) acc += abs128(s.scaled(i));
    return Rat(acc, s.n);
}

Rat upsilon_potential(const LoadState& s) {
    Rat acc;
    for (int64_t i = 0; i < s.n; ++i) {
        int128 z = s.scaled(i);
        acc += Rat(z * z, int128(s.n) * s.n);
    }
    return acc;
}

PotentialReport potentials(const LoadState& s, double alpha, double alpha_tilde) {
    if (!(alpha > 0)) throw std::invalid_argument("potentials: alpha must be positive");
    if (!(alpha_tilde > 0)) throw std::invalid_argument("potentials: alpha_tilde must be positive");

    PotentialReport r;
    r.delta = delta_potential(s);
    r.upsilon = upsilon_potential(s);
    r.quantile = quantile(s);
    r.gap = gap(s);

    const double n = static_cast<double>(s.n);
    const double psi_alpha = 1.0 / (12.0 * n);
    for (int64_t i = 0; i < s.n; ++i) {
        const int64_t z = s.scaled(i);
        const double y = static_cast<double>(z) / n;
        const double ay = std::abs(y);
        r.lambda += std::exp(alpha * ay);
        r.v += std::exp(alpha_tilde * ay);
        if (z >= 2 * s.n) {
            r.phi += std::exp(alpha * y);
            r.psi += std::exp(psi_alpha * y);
        }
    }
    return r;
}

}  // namespace ballsim
