#include <doctest.h>

#include <cmath>

#include "ballsim/load_state.hpp"
#include "ballsim/process.hpp"

using namespace ballsim;

TEST_CASE("empty state construction") {
    LoadState s(4);
    CHECK(s.n == 4);
    CHECK(s.w == 0);
    for (int64_t i = 0; i < 4; ++i) CHECK(s.x[size_t(i)] == 0);

    LoadState s2(2);
    CHECK(s2.w == 0);

    CHECK_THROWS_AS(LoadState(1), std::invalid_argument);
    CHECK_THROWS_AS(LoadState(0), std::invalid_argument);
}

TEST_CASE("scaled loads") {
    LoadState s = LoadState::from_loads({5, 3, 2, 2});
    CHECK(s.w == 12);
    auto z = s.scaled_loads();
    CHECK(z == std::vector<int64_t>{8, 0, -4, -4});

    LoadState e(2);
    CHECK(e.scaled_loads() == std::vector<int64_t>{0, 0});

    LoadState t = LoadState::from_loads({1, 0});
    CHECK(t.scaled_loads() == std::vector<int64_t>{1, -1});
}

TEST_CASE("gap and quantile") {
    LoadState s = LoadState::from_loads({5, 3, 2, 2});
    CHECK(gap(s) == Rat(2));
    CHECK(quantile(s) == Rat(1, 2));

    LoadState t = LoadState::from_loads({1, 0});
    CHECK(gap(t) == Rat(1, 2));
    CHECK(quantile(t) == Rat(1, 2));

    LoadState e(4);
    CHECK(gap(e) == Rat(0));
    CHECK(quantile(e) == Rat(1));  // all y_i = 0 count as overloaded
}

TEST_CASE("potential report") {
    LoadState e(4);
    auto r = potentials(e, 1.0, 0.5);
    CHECK(r.delta == Rat(0));
    CHECK(r.upsilon == Rat(0));
    CHECK(r.phi == doctest::Approx(0.0));
    CHECK(r.lambda == doctest::Approx(4.0));
    CHECK(r.v == doctest::Approx(4.0));
    CHECK(r.psi == doctest::Approx(0.0));
    CHECK(r.gap == Rat(0));
    CHECK(r.quantile == Rat(1));

    LoadState t = LoadState::from_loads({1, 0});
    auto rt = potentials(t, 1.0, 1.0);
    CHECK(rt.delta == Rat(1));
    CHECK(rt.upsilon == Rat(1, 2));
    CHECK(rt.phi == doctest::Approx(0.0));
    CHECK(rt.lambda == doctest::Approx(2 * std::exp(0.5)));

    LoadState s = LoadState::from_loads({5, 3, 2, 2});
    auto rs = potentials(s, 1.0, 1.0);
    CHECK(rs.phi == doctest::Approx(std::exp(2.0)));
    CHECK(rs.delta == Rat(4));
    CHECK(rs.upsilon == Rat(6));

    CHECK_THROWS_AS(potentials(s, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(potentials(s, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("reachable state identities") {
    // Scaled loads of every reachable state sum to zero; the overloaded mass
    // equals half of delta; gap*n is exactly max z.
    for (ProcessKind kind : {ProcessKind::Packing, ProcessKind::Twinning,
                             ProcessKind::MeanThinning, ProcessKind::Caching}) {
        ProcessConfig cfg(kind);
        auto res = simulate(cfg, 16, 500, 99, uint64_t(kind));
        const LoadState& s = res.state.load;
        auto z = s.scaled_loads();
        int128 sum = 0, pos = 0, neg = 0, mx = z[0];
        for (int64_t v : z) {
            sum += v;
            (v >= 0 ? pos : neg) += v;
            mx = std::max<int128>(mx, v);
        }
        CHECK(sum == 0);
        CHECK(pos == -neg);
        CHECK(delta_potential(s) == Rat(2 * pos, s.n));
        CHECK(gap(s) * Rat(s.n) == Rat(mx, 1));
        Rat q = quantile(s);
        CHECK(q >= Rat(1, s.n));
        CHECK(q <= Rat(1));
        // Lambda at alpha equals V when alpha_tilde = alpha.
        auto rep = potentials(s, 0.3, 0.3);
        CHECK(rep.lambda == doctest::Approx(rep.v));
    }
}

TEST_CASE("sorted order breaks ties by index") {
    LoadState s = LoadState::from_loads({2, 5, 2, 5});
    auto order = sorted_order(s);
    CHECK(order == std::vector<int64_t>{1, 3, 0, 2});
}

TEST_CASE("scaled-load overflow is a checked error") {
    std::vector<int64_t> big(16, int64_t(1) << 60);
    CHECK_THROWS_AS(LoadState::from_loads(std::move(big)), std::overflow_error);

    LoadState s(16);
    s.x[0] = int64_t(1) << 60;  // bypass from_loads to hit the scaled() guard
    CHECK_THROWS_AS(s.scaled(0), std::overflow_error);
}

TEST_CASE("fill deficit") {
    LoadState s = LoadState::from_loads({5, 3, 2, 2});
    CHECK(fill_deficit(s, 0) == 0);
    CHECK(fill_deficit(s, 2) == 1);  // y = -1
    LoadState t = LoadState::from_loads({10, 9, 8, 3});
    CHECK(fill_deficit(t, 3) == 5);  // y = -4.5 -> ceil = 5
}
