#include "ballsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ballsim {

std::string potential_name(PotentialId id) {
    switch (id) {
        case PotentialId::Const1: return "const1";
        case PotentialId::Delta: return "delta";
        case PotentialId::Upsilon: return "upsilon";
        case PotentialId::Phi: return "phi";
        case PotentialId::Lambda: return "lambda";
        case PotentialId::V: return "v";
        case PotentialId::Psi: return "psi";
    }
    return "?";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Streaming log-sum-exp: log(sum of e^(l_i)) without leaving log space.
class LogSum {
public:
    void add(double l) {
        if (l == kNegInf) return;
        if (max_ == kNegInf) {
            max_ = l;
            sum_ = 1.0;
        } else if (l <= max_) {
            sum_ += std::exp(l - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - l) + 1.0;
            max_ = l;
        }
    }
    void add_scaled(double l, double weight) {  // weight * e^l
        if (weight <= 0) return;
        add(l + std::log(weight));
    }
    double log_value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

private:
    double max_ = kNegInf;
    double sum_ = 0;
};

// log of one bin's contribution to the chosen potential, on the scaled load
// z' relative to n (y = z'/n); -inf when the bin does not contribute.
double log_term(PotentialId id, double alpha, int128 zp, int64_t n) {
    double y = double(zp) / double(n);
    switch (id) {
        case PotentialId::Phi:
            return zp >= 2 * int128(n) ? alpha * y : kNegInf;
        case PotentialId::Lambda:
        case PotentialId::V:
            return alpha * std::abs(y);
        case PotentialId::Psi:
            return zp >= 2 * int128(n) ? y / (12.0 * double(n)) : kNegInf;
        default:
            throw std::logic_error("log_term: exact potential");
    }
}

bool exact_potential(PotentialId id) {
    return id == PotentialId::Const1 || id == PotentialId::Delta || id == PotentialId::Upsilon;
}

Rat exact_term(PotentialId id, int128 zp, int64_t n) {
    switch (id) {
        case PotentialId::Const1: return Rat(0);
        case PotentialId::Delta: return Rat(abs128(zp), n);
        case PotentialId::Upsilon: return Rat(zp * zp, int128(n) * n);
        default: throw std::logic_error("exact_term: exponential potential");
    }
}

// Rank classes of the sorted labeling with identical (z, p, weight); targets
// within a class produce the same post-allocation multiset.
struct TargetClass {
    int64_t z = 0;       // scaled load of members
    int64_t count = 0;
    Rat prob;            // total probability of targeting this class
    int64_t weight = 1;  // balls placed when a member is the target
};

int64_t target_weight(const ProcessConfig& cfg, const LoadState& s, int64_t z) {
    switch (cfg.kind) {
        case ProcessKind::Twinning:
            return z < 0 ? 2 : 1;
        case ProcessKind::Packing: {
            if (z >= 0) return 1;
            int64_t deficit = (-z + s.n - 1) / s.n;
            if (cfg.pack_fill == PackingFill::Threshold) {
                // Fill to floor(W/n)+1: one ball fewer unless n divides W.
                return s.w % s.n == 0 ? deficit + 1 : deficit;
            }
            return deficit + 1;
        }
        case ProcessKind::OverPacking:
            throw std::invalid_argument("one_step_expectation: OverPacking unsupported");
        default:
            return 1;
    }
}

std::vector<TargetClass> target_classes(const ProcessConfig& cfg, const ProcessState& state) {
    const LoadState& s = state.load;
    DistributionVector dv = distribution_vector(cfg, state);
    auto order = sorted_order(s);
    std::vector<TargetClass> classes;
    for (size_t r = 0; r < order.size(); ++r) {
        int64_t z = s.scaled(order[r]);
        if (!classes.empty() && classes.back().z == z && dv.p[r] == dv.p[r - 1]) {
            classes.back().count += 1;
            classes.back().prob += dv.p[r];
        } else {
            TargetClass c;
            c.z = z;
            c.count = 1;
            c.prob = dv.p[r];
            classes.push_back(c);
        }
    }
    for (auto& c : classes) c.weight = target_weight(cfg, s, c.z);
    return classes;
}

// Merges adjacent classes that have equal z but were split by unequal p
// (possible for Caching), keeping per-rank probabilities intact is not
// needed for the potential value, only for the class probabilities; target
// members with equal z and equal weight yield identical post-states, so we
// can merge them outright.
std::vector<TargetClass> merge_same_outcome(std::vector<TargetClass> classes) {
    std::vector<TargetClass> out;
    for (auto& c : classes) {
        if (!out.empty() && out.back().z == c.z && out.back().weight == c.weight) {
            out.back().count += c.count;
            out.back().prob += c.prob;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

ExpectationResult one_step_expectation(const ProcessConfig& cfg, const ProcessState& state,
                                       PotentialId id, double alpha) {
    const LoadState& s = state.load;
    const int64_t n = s.n;
    auto classes = merge_same_outcome(target_classes(cfg, state));

    ExpectationResult res;
    res.potential = id;
    res.alpha = alpha;

    if (exact_potential(id)) {
        Rat current;
        if (id == PotentialId::Const1) {
            current = Rat(1);
        } else {
            for (auto& c : classes) current += exact_term(id, c.z, n) * Rat(c.count);
        }
        Rat expected;
        for (auto& t : classes) {
            if (t.prob.is_zero()) continue;
            Rat value;
            if (id == PotentialId::Const1) {
                value = Rat(1);
            } else {
                const int64_t w = t.weight;
                for (auto& c : classes) {
                    value += exact_term(id, int128(c.z) - w, n) * Rat(c.count);
                }
                value -= exact_term(id, int128(t.z) - w, n);
                value += exact_term(id, int128(t.z) - w + int128(n) * w, n);
            }
            expected += t.prob * value;
        }
        res.current_exact = current;
        res.expected_exact = expected;
        res.current = current.to_double();
        res.expected = expected.to_double();
        res.log_current = res.current > 0 ? std::log(res.current) : kNegInf;
        res.log_expected = res.expected > 0 ? std::log(res.expected) : kNegInf;
        return res;
    }

    LogSum cur;
    for (auto& c : classes) {
        cur.add_scaled(log_term(id, alpha, c.z, n), double(c.count));
    }
    LogSum exp_acc;
    for (auto& t : classes) {
        if (t.prob.is_zero()) continue;
        const int64_t w = t.weight;
        LogSum value;
        for (auto& c : classes) {
            int64_t cnt = c.count - (c.z == t.z && c.weight == t.weight ? 1 : 0);
            if (cnt > 0) value.add_scaled(log_term(id, alpha, int128(c.z) - w, n), double(cnt));
        }
        value.add(log_term(id, alpha, int128(t.z) - w + int128(n) * w, n));
        exp_acc.add_scaled(value.log_value(), t.prob.to_double());
    }
    res.log_current = cur.log_value();
    res.log_expected = exp_acc.log_value();
    res.current = std::exp(res.log_current);
    res.expected = std::exp(res.log_expected);
    res.log_domain = res.log_current > 600.0 || res.log_expected > 600.0;
    return res;
}

std::pair<int64_t, int64_t> process_weights(const ProcessConfig& cfg) {
    if (cfg.kind == ProcessKind::Twinning) return {1, 2};
    if (cfg.kind == ProcessKind::Packing || cfg.kind == ProcessKind::OverPacking)
        throw std::invalid_argument("process_weights: filling process has no W2 weights");
    return {1, 1};
}

ExpectationResult verify_upsilon_drop(const ProcessConfig& cfg, const ProcessState& state) {
    auto [w_plus, w_minus] = process_weights(cfg);
    ExpectationResult res = one_step_expectation(cfg, state, PotentialId::Upsilon, 1.0);

    DistributionVector dv = distribution_vector(cfg, state);
    auto order = sorted_order(state.load);
    std::optional<Rat> p_plus, p_minus;
    for (size_t r = 0; r < order.size(); ++r) {
        if (state.load.scaled(order[r]) >= 0) {
            if (!p_plus || dv.p[r] > *p_plus) p_plus = dv.p[r];
        } else {
            if (!p_minus || dv.p[r] < *p_minus) p_minus = dv.p[r];
        }
    }
    Rat uni(1, state.load.n);
    Rat drift = (p_minus ? *p_minus : uni) * Rat(w_minus) -
                (p_plus ? *p_plus : uni) * Rat(w_plus);
    Rat delta = delta_potential(state.load);
    Rat bound = *res.current_exact - drift * delta + Rat(4 * w_minus * w_minus);
    res.bound = bound.to_double();
    res.satisfied = *res.expected_exact <= bound;
    res.note = "quadratic potential drop bound (exact)";
    return res;
}

ExpectationResult verify_phi_bound(const LoadState& state, double alpha, double rel_slack) {
    ProcessConfig cfg = ProcessConfig::packing();
    ProcessState st = ProcessState::from_load(cfg, state);
    ExpectationResult res = one_step_expectation(cfg, st, PotentialId::Phi, alpha);

    const int64_t n = state.n;
    double phi = 0;
    double inner = 0;
    int64_t b_ge1 = 0;
    for (int64_t i = 0; i < n; ++i) {
        int64_t z = state.scaled(i);
        double y = double(z) / double(n);
        if (z >= 2 * n) phi += std::exp(alpha * y);
        if (z >= n) {
            ++b_ge1;
        } else {
            int64_t fill = z >= 0 ? 1 : fill_deficit(state, i) + 1;
            inner += std::exp(-alpha * double(fill) / double(n));
        }
    }
    inner += double(b_ge1 - 1) * std::exp(-alpha / double(n));
    inner += std::exp(alpha - alpha / double(n));
    double bound = phi * inner / double(n) + std::exp(3 * alpha);
    res.bound = bound;
    res.satisfied = res.expected <= bound * (1 + rel_slack) + 1e-300;
    res.note = "phi one-round bound for uniform filling";
    return res;
}

namespace {

bool satisfies_p3(const ProcessConfig& cfg) {
    return cfg.kind == ProcessKind::MeanThinning || cfg.kind == ProcessKind::Thinning ||
           cfg.kind == ProcessKind::OnePlusEtaMeanThinning;
}

bool satisfies_w3(const ProcessConfig& cfg) { return cfg.kind == ProcessKind::Twinning; }

// P3 constants of the closed-form processes.
std::pair<double, double> p3_constants(const ProcessConfig& cfg) {
    if (cfg.kind == ProcessKind::OnePlusEtaMeanThinning) {
        double eta = cfg.eta.to_double();
        return {eta, eta};
    }
    return {1.0, 1.0};
}

}  // namespace

double lambda_alpha_cap(const ProcessConfig& cfg, double eps) {
    auto [w_plus, w_minus] = process_weights(cfg);
    double wp = double(w_plus), wm = double(w_minus);
    if (satisfies_p3(cfg)) {
        auto [k1, k2] = p3_constants(cfg);
        return std::min({1.0 / wm, k2 * eps / (2 * wm * (1 + k2 * eps)),
                         k1 * eps / (2 * wp * (1 - k1 * eps))});
    }
    return std::min({1.0 / wm, eps * (wm - wp) / (4 * wm * wm), eps / (2 * wm * (2 + eps))});
}

LambdaChangeResult verify_lambda_change(const ProcessConfig& cfg, const ProcessState& state,
                                        double eps, double alpha) {
    auto [w_plus, w_minus] = process_weights(cfg);
    (void)w_plus;
    const double n = double(state.load.n);
    LambdaChangeResult out;

    ExpectationResult base = one_step_expectation(cfg, state, PotentialId::Lambda, alpha);
    const double lambda = base.current;
    const double expected = base.expected;

    out.general = base;
    const double c4 = 3.0 * double(w_minus) * std::exp(2.0 * double(w_minus));
    out.general.bound = lambda * (1 + alpha * alpha * c4 / (2 * n)) + c4;
    out.general.satisfied = expected <= out.general.bound * (1 + 1e-12);
    out.general.note = "lambda increase bound, c4=3 w_- e^(2 w_-)";

    Rat d = quantile(state.load);
    double dd = d.to_double();
    out.band = dd > eps && dd < 1 - eps;
    if (out.band) {
        ExpectationResult drop = base;
        // bound(c3) = lambda (1 - 2 c3 alpha / n) + 3 (c3 + w_-) e^(2 w_-);
        // fit the largest c3 with expected <= bound(c3).
        const double base_term = lambda + 3.0 * double(w_minus) * std::exp(2.0 * double(w_minus));
        const double coeff = 3.0 * std::exp(2.0 * double(w_minus)) - 2.0 * alpha * lambda / n;
        if (coeff >= 0) {
            out.fitted_c3 = expected <= base_term ? 1.0 : 0.0;
        } else {
            out.fitted_c3 = (base_term - expected) / (-coeff);
        }
        drop.bound = lambda * (1 - 2 * out.fitted_c3 * alpha / n) +
                     3 * (out.fitted_c3 + double(w_minus)) * std::exp(2.0 * double(w_minus));
        drop.satisfied = out.fitted_c3 > 0;
        drop.note = "lambda drop inside quantile band, fitted c3";
        out.in_band = drop;
    }
    return out;
}

double v_alpha_tilde(const ProcessConfig& cfg, int64_t n) {
    auto [w_plus, w_minus] = process_weights(cfg);
    double wp = double(w_plus), wm = double(w_minus), nn = double(n);
    // The k1/k2 scale suits probability-biased (P3) processes; the
    // (w_- - w_+) scale suits weight-biased (W3) ones.
    if (satisfies_w3(cfg)) {
        return std::min((wm - wp) / (4 * wm * wm * nn), 1.0 / (wm * (4 * nn + 2)));
    }
    auto [k1, k2] = p3_constants(cfg);
    return std::min(k1 / (2 * wm * (nn - k1)), k2 / (2 * wm * (nn + k2)));
}

ExpectationResult verify_v_drop(const ProcessConfig& cfg, const ProcessState& state) {
    const int64_t n = state.load.n;
    double at = v_alpha_tilde(cfg, n);
    ExpectationResult res = one_step_expectation(cfg, state, PotentialId::V, at);
    double fitted_c5 =
        res.current > 0 ? double(n) * double(n) * double(n) * (res.current + 2.0 * double(n) - res.expected) / res.current
                        : 1.0;
    res.bound = res.current * (1 - fitted_c5 / (double(n) * double(n) * double(n))) + 2.0 * double(n);
    res.satisfied = fitted_c5 > 0;
    res.note = "v drop, fitted c5=" + std::to_string(fitted_c5);
    return res;
}

ExpectationResult caching_two_step_expectation(const LoadState& state, int64_t cache) {
    const int64_t n = state.n;
    if (n > 512) throw std::invalid_argument("caching_two_step_expectation: n > 512");
    if (cache < 0 || cache >= n)
        throw std::invalid_argument("caching_two_step_expectation: bad cache");

    const double nn = double(n);
    const double at = 1.0 / (12.0 * nn);
    std::vector<int64_t> z(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) z[size_t(i)] = state.scaled(i);

    // Final scaled load after two balls: z - 2 (+n per ball received).
    // psi exponent matches potentials(): y/(12n) = z/(12 n^2).
    auto term = [&](int128 zp) {
        return zp >= 2 * int128(n) ? std::exp(double(zp) / (12.0 * nn * nn)) : 0.0;
    };
    double base = 0;  // untouched bins
    double psi_now = 0;
    std::vector<double> corr(static_cast<size_t>(n));
    std::vector<double> plus1(static_cast<size_t>(n));
    std::vector<double> plus2(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        corr[size_t(i)] = term(int128(z[size_t(i)]) - 2);
        plus1[size_t(i)] = term(int128(z[size_t(i)]) - 2 + n);
        plus2[size_t(i)] = term(int128(z[size_t(i)]) - 2 + 2 * n);
        base += corr[size_t(i)];
        if (z[size_t(i)] >= 2 * n)
            psi_now += std::exp(double(z[size_t(i)]) / (12.0 * nn * nn));
    }

    const auto& x = state.x;
    double total = 0;
    for (int64_t s1 = 0; s1 < n; ++s1) {
        // Round t from (x, cache).
        int64_t t1, b1;
        if (x[size_t(s1)] < x[size_t(cache)]) {
            t1 = s1; b1 = s1;
        } else if (x[size_t(s1)] == x[size_t(cache)]) {
            t1 = s1; b1 = cache;
        } else {
            t1 = cache; b1 = cache;
        }
        auto load1 = [&](int64_t j) { return x[size_t(j)] + (j == t1 ? 1 : 0); };
        double row = 0;
        const int64_t xb1 = load1(b1);
        for (int64_t s2 = 0; s2 < n; ++s2) {
            int64_t t2 = load1(s2) <= xb1 ? s2 : b1;
            double f = base - corr[size_t(t1)];
            if (t2 == t1) {
                f += plus2[size_t(t1)];
            } else {
                f += plus1[size_t(t1)] - corr[size_t(t2)] + plus1[size_t(t2)];
            }
            row += f;
        }
        total += row;
    }

    ExpectationResult res;
    res.potential = PotentialId::Psi;
    res.alpha = at;
    res.current = psi_now;
    res.expected = total / (nn * nn);
    res.log_current = psi_now > 0 ? std::log(psi_now) : kNegInf;
    res.log_expected = res.expected > 0 ? std::log(res.expected) : kNegInf;
    res.bound = psi_now * (1 - 1.0 / (24.0 * nn * nn * nn)) + 6.0;
    res.satisfied = res.expected <= res.bound * (1 + 1e-12);
    res.note = "two-step caching bound, cache=" + std::to_string(cache);
    return res;
}

ExpectationResult caching_two_step_worst_cache(const LoadState& state) {
    ExpectationResult worst;
    bool first = true;
    for (int64_t b = 0; b < state.n; ++b) {
        ExpectationResult r = caching_two_step_expectation(state, b);
        if (first || r.expected - r.bound > worst.expected - worst.bound) {
            worst = r;
            first = false;
        }
    }
    return worst;
}

LoadState counterexample_config(Counterexample kind, int64_t n) {
    if (kind == Counterexample::B1) {
        int64_t r = int64_t(std::llround(std::sqrt(double(n))));
        if (r * r != n) throw std::invalid_argument("B1: n must be a perfect square");
        std::vector<int64_t> x(size_t(n), 1);  // offset 1 over y
        x[0] = r + 1;
        for (int64_t i = n - r; i < n; ++i) x[size_t(i)] = 0;
        return LoadState::from_loads(std::move(x));
    }
    if (n % 2 != 0) throw std::invalid_argument("B2: n must be even");
    int64_t c = n * (2 * n - 3) / 2;  // offset = -min y
    std::vector<int64_t> x(size_t(n), n + c);
    x[0] = n * n + c;
    x[size_t(n - 2)] = 0;
    x[size_t(n - 1)] = 0;
    return LoadState::from_loads(std::move(x));
}

CounterexampleResult verify_counterexamples(int64_t n, double alpha) {
    CounterexampleResult out;
    const double factor = std::log1p(0.1 * alpha * alpha / double(n));

    LoadState b1 = counterexample_config(Counterexample::B1, n);
    ProcessConfig packing = ProcessConfig::packing();
    out.b1 = one_step_expectation(packing, ProcessState::from_load(packing, b1),
                                  PotentialId::Phi, alpha);
    out.b1.bound = out.b1.log_current + factor;
    out.b1.satisfied = out.b1.log_expected >= out.b1.log_current + factor;
    out.b1.note = "B1 phi increase under Packing";

    LoadState b2 = counterexample_config(Counterexample::B2, n);
    ProcessConfig mt = ProcessConfig::mean_thinning();
    out.b2 = one_step_expectation(mt, ProcessState::from_load(mt, b2), PotentialId::Lambda,
                                  alpha);
    out.b2.bound = out.b2.log_current + factor;
    out.b2.satisfied = out.b2.log_expected >= out.b2.log_current + factor;
    out.b2.note = "B2 lambda increase under MeanThinning";
    out.b2_quantile_exact = quantile(b2) == Rat(n - 2, n);
    return out;
}

namespace {

struct DpKey {
    std::vector<int64_t> loads;  // sorted descending
    int64_t cache_load = -1;     // -1 when absent / not Caching

    bool operator<(const DpKey& o) const {
        if (loads != o.loads) return loads < o.loads;
        return cache_load < o.cache_load;
    }
};

DpKey canonical(std::vector<int64_t> loads, int64_t cache_load) {
    std::sort(loads.begin(), loads.end(), std::greater<int64_t>());
    return DpKey{std::move(loads), cache_load};
}

}  // namespace

ExactGapDistribution exact_gap_distribution(const ProcessConfig& cfg, int64_t n, int64_t m) {
    if (n > 4 || n < 2) throw std::invalid_argument("exact_gap_distribution: need 2 <= n <= 4");
    if (m < 0 || m > 12) throw std::invalid_argument("exact_gap_distribution: need 0 <= m <= 12");
    if (cfg.kind == ProcessKind::Thinning && !cfg.f.is_zero())
        throw std::invalid_argument("exact_gap_distribution: only f=0 thinning supported");
    if (cfg.kind == ProcessKind::OverPacking)
        throw std::invalid_argument("exact_gap_distribution: OverPacking unsupported");

    std::map<DpKey, Rat> states;
    states[canonical(std::vector<int64_t>(size_t(n), 0), -1)] = Rat(1);

    auto advance = [&](const DpKey& key, const Rat& prob, std::map<DpKey, Rat>& next) {
        LoadState s = LoadState::from_loads(key.loads);
        if (cfg.kind == ProcessKind::Caching) {
            if (key.cache_load < 0) {
                // First round: uniform sample receives the ball and becomes
                // the cache. All positions with equal load are exchangeable.
                for (int64_t j = 0; j < n; ++j) {
                    auto loads = key.loads;
                    loads[size_t(j)] += 1;
                    next[canonical(std::move(loads), key.loads[size_t(j)] + 1)] +=
                        prob * Rat(1, n);
                }
                return;
            }
            // Position of "the" cached bin: any slot with the cache load.
            int64_t cpos = -1;
            for (int64_t j = 0; j < n; ++j) {
                if (key.loads[size_t(j)] == key.cache_load) { cpos = j; break; }
            }
            for (int64_t j = 0; j < n; ++j) {
                auto loads = key.loads;
                int64_t xj = loads[size_t(j)], xb = key.cache_load;
                int64_t new_cache;
                if (xj < xb) {
                    loads[size_t(j)] += 1;
                    new_cache = xj + 1;
                } else if (xj == xb) {
                    loads[size_t(j)] += 1;
                    // Sampling the cached bin itself moves its load with it.
                    new_cache = (j == cpos) ? xb + 1 : xb;
                } else {
                    loads[size_t(cpos)] += 1;
                    new_cache = xb + 1;
                }
                next[canonical(std::move(loads), new_cache)] += prob * Rat(1, n);
            }
            return;
        }
        ProcessState ps = ProcessState::from_load(cfg, s);
        DistributionVector dv = distribution_vector(cfg, ps);
        for (int64_t r = 0; r < n; ++r) {
            if (dv.p[size_t(r)].is_zero()) continue;
            auto loads = key.loads;
            int64_t w = target_weight(cfg, s, s.scaled(r));
            loads[size_t(r)] += w;
            next[canonical(std::move(loads), -1)] += prob * dv.p[size_t(r)];
        }
    };

    // Ball semantics: advance states until they hold >= m balls.
    bool progress = true;
    while (progress) {
        progress = false;
        std::map<DpKey, Rat> next;
        for (auto& [key, prob] : states) {
            int64_t w = 0;
            for (int64_t v : key.loads) w += v;
            if (w >= m) {
                next[key] += prob;
            } else {
                progress = true;
                advance(key, prob, next);
            }
        }
        states = std::move(next);
    }

    ExactGapDistribution out;
    out.kind = cfg.kind;
    out.n = n;
    out.m = m;
    for (auto& [key, prob] : states) {
        LoadState s = LoadState::from_loads(key.loads);
        out.prob[gap(s)] += prob;
    }
    return out;
}

double tv_distance(const ExactGapDistribution& exact, const std::map<Rat, int64_t>& counts,
                   int64_t samples) {
    double tv = 0;
    std::map<Rat, double> emp;
    for (auto& [g, c] : counts) emp[g] = double(c) / double(samples);
    for (auto& [g, p] : exact.prob) {
        auto it = emp.find(g);
        double e = it == emp.end() ? 0.0 : it->second;
        tv += std::abs(p.to_double() - e);
        if (it != emp.end()) emp.erase(it);
    }
    for (auto& [g, e] : emp) tv += e;
    return tv / 2.0;
}

ProcessState random_reachable_state(const ProcessConfig& cfg, int64_t n, Rng& rng) {
    int64_t rounds = int64_t(rng.below(uint64_t(50 * n + 1)));
    ProcessState st = ProcessState::initial(cfg, n);
    for (int64_t t = 0; t < rounds; ++t) step(cfg, st, rng);
    return st;
}

}  // namespace ballsim
