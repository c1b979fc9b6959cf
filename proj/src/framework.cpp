#include "ballsim/framework.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace ballsim {

namespace {

Rat pow_rat(const Rat& base, int64_t e) {
    Rat acc(1);
    for (int64_t i = 0; i < e; ++i) acc *= base;
    return acc;
}

// Exact rank distribution of d-choice with ties broken towards the lowest bin
// index: within the deepest sampled tie class the smallest rank wins. For a
// class [a,b] (0-based) the target is rank i iff no sample is deeper than b,
// none lands in [a, i-1], and at least one lands on i.
DistributionVector d_choice_vector(int64_t d, const LoadState& s) {
    auto order = sorted_order(s);
    const int64_t n = s.n;
    DistributionVector dv;
    dv.p.resize(size_t(n));
    size_t a = 0;
    while (a < size_t(n)) {
        size_t b = a;
        while (b + 1 < size_t(n) &&
               s.x[size_t(order[b + 1])] == s.x[size_t(order[a])]) {
            ++b;
        }
        for (size_t i = a; i <= b; ++i) {
            Rat hi = pow_rat(Rat(int64_t(a) + int64_t(b - i) + 1, n), d);
            Rat lo = pow_rat(Rat(int64_t(a) + int64_t(b - i), n), d);
            dv.p[i] = hi - lo;
        }
        a = b + 1;
    }
    return dv;
}

// Thinning's first-sample acceptance set: bins below t/n + f.
std::vector<bool> thinning_below(const ProcessConfig& cfg, const ProcessState& st) {
    const LoadState& s = st.load;
    std::vector<bool> below(size_t(s.n), false);
    for (int64_t i = 0; i < s.n; ++i) {
        if (cfg.kind == ProcessKind::MeanThinning) {
            below[size_t(i)] = s.scaled(i) < 0;
        } else {
            int128 lhs = (int128(s.n) * s.x[size_t(i)] - st.round) * cfg.f.den();
            int128 rhs = int128(s.n) * cfg.f.num();
            below[size_t(i)] = lhs < rhs;
        }
    }
    return below;
}

DistributionVector thinning_vector(const ProcessConfig& cfg, const ProcessState& st) {
    const LoadState& s = st.load;
    auto below = thinning_below(cfg, st);
    int64_t misses = s.n - int64_t(std::count(below.begin(), below.end(), true));
    auto order = sorted_order(s);
    DistributionVector dv;
    dv.p.resize(size_t(s.n));
    for (int64_t r = 0; r < s.n; ++r) {
        int64_t bin = order[size_t(r)];
        Rat second(misses, int64_t(s.n) * s.n);
        dv.p[size_t(r)] = below[size_t(bin)] ? Rat(1, s.n) + second : second;
    }
    return dv;
}

}  // namespace

DistributionVector distribution_vector(const ProcessConfig& cfg, const ProcessState& state) {
    const LoadState& s = state.load;
    const int64_t n = s.n;
    DistributionVector dv;
    switch (cfg.kind) {
        case ProcessKind::OneChoice:
        case ProcessKind::Packing:
        case ProcessKind::OverPacking:
        case ProcessKind::Twinning:
            dv.p.assign(size_t(n), Rat(1, n));
            return dv;
        case ProcessKind::DChoice:
            return d_choice_vector(cfg.d, s);
        case ProcessKind::OnePlusBeta: {
            dv.p.resize(size_t(n));
            for (int64_t i = 0; i < n; ++i) {
                dv.p[size_t(i)] = (Rat(1) - cfg.beta) * Rat(1, n) +
                                  cfg.beta * Rat(2 * i + 1, n * n);
            }
            return dv;
        }
        case ProcessKind::Caching: {
            if (!state.cache.has_value())
                throw std::invalid_argument("distribution_vector: Caching cache absent");
            int64_t b = *state.cache;
            int64_t xb = s.x[size_t(b)];
            auto order = sorted_order(s);
            dv.p.assign(size_t(n), Rat(0));
            int64_t heavier = 0;
            size_t cache_rank = 0;
            for (size_t r = 0; r < size_t(n); ++r) {
                int64_t bin = order[r];
                if (s.x[size_t(bin)] > xb) {
                    ++heavier;
                } else {
                    dv.p[r] = Rat(1, n);
                }
                if (bin == b) cache_rank = r;
            }
            dv.p[cache_rank] += Rat(heavier, n);
            return dv;
        }
        case ProcessKind::Thinning:
        case ProcessKind::MeanThinning:
            return thinning_vector(cfg, state);
        case ProcessKind::OnePlusEtaMeanThinning: {
            ProcessConfig mt = ProcessConfig::mean_thinning();
            DistributionVector base = thinning_vector(mt, state);
            dv.p.resize(size_t(n));
            for (int64_t i = 0; i < n; ++i) {
                dv.p[size_t(i)] = (Rat(1) - cfg.eta) * Rat(1, n) + cfg.eta * base.p[size_t(i)];
            }
            return dv;
        }
    }
    throw std::logic_error("distribution_vector: unhandled kind");
}

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::P1: return "P1";
        case Condition::P2: return "P2";
        case Condition::P3: return "P3";
        case Condition::P4: return "P4";
        case Condition::W1: return "W1";
        case Condition::W2: return "W2";
        case Condition::W3: return "W3";
    }
    return "?";
}

ConditionReport check_P1(const DistributionVector& p) {
    ConditionReport rep;
    rep.condition = Condition::P1;
    rep.holds = true;
    const int64_t n = int64_t(p.p.size());
    Rat prefix;
    for (int64_t k = 1; k <= n; ++k) {
        prefix += p.p[size_t(k - 1)];
        if (prefix > Rat(k, n)) {
            rep.holds = false;
            rep.witness = "prefix(" + std::to_string(k) + ")=" + prefix.str() + " > " +
                          Rat(k, n).str();
            break;
        }
    }
    return rep;
}

namespace {

struct SignedProbs {
    std::optional<Rat> p_plus;   // max over overloaded ranks
    std::optional<Rat> p_minus;  // min over underloaded ranks
    Rat delta;                   // quantile
};

SignedProbs signed_probs(const DistributionVector& p, const LoadState& s) {
    auto order = sorted_order(s);
    SignedProbs sp;
    int64_t over = 0;
    for (size_t r = 0; r < order.size(); ++r) {
        bool is_over = s.scaled(order[r]) >= 0;
        const Rat& pr = p.p[r];
        if (is_over) {
            ++over;
            if (!sp.p_plus || pr > *sp.p_plus) sp.p_plus = pr;
        } else {
            if (!sp.p_minus || pr < *sp.p_minus) sp.p_minus = pr;
        }
    }
    sp.delta = Rat(over, s.n);
    return sp;
}

}  // namespace

ConditionReport check_P2(const DistributionVector& p, const LoadState& state) {
    ConditionReport rep;
    rep.condition = Condition::P2;
    rep.holds = true;
    auto sp = signed_probs(p, state);
    rep.vacuous = !sp.p_plus.has_value() || !sp.p_minus.has_value();
    Rat uni(1, state.n);
    if (sp.p_plus && *sp.p_plus > uni) {
        rep.holds = false;
        rep.witness = "p_+=" + sp.p_plus->str() + " > 1/n";
    } else if (sp.p_minus && *sp.p_minus < uni) {
        rep.holds = false;
        rep.witness = "p_-=" + sp.p_minus->str() + " < 1/n";
    }
    return rep;
}

ConditionReport check_P3(const DistributionVector& p, const LoadState& state, const Rat& k1,
                         const Rat& k2) {
    ConditionReport rep;
    rep.condition = Condition::P3;
    rep.holds = true;
    rep.k1 = k1;
    rep.k2 = k2;
    auto sp = signed_probs(p, state);
    rep.vacuous = !sp.p_plus.has_value() || !sp.p_minus.has_value();
    Rat n(state.n);
    Rat plus_bound = (Rat(1) - k1 * (Rat(1) - sp.delta)) / n;
    Rat minus_bound = (Rat(1) + k2 * sp.delta) / n;
    if (sp.p_plus && *sp.p_plus > plus_bound) {
        rep.holds = false;
        rep.witness = "p_+=" + sp.p_plus->str() + " > " + plus_bound.str();
    } else if (sp.p_minus && *sp.p_minus < minus_bound) {
        rep.holds = false;
        rep.witness = "p_-=" + sp.p_minus->str() + " < " + minus_bound.str();
    }
    return rep;
}

std::pair<Rat, Rat> fit_P3(const DistributionVector& p, const LoadState& state) {
    auto sp = signed_probs(p, state);
    Rat one(1);
    Rat k1 = one, k2 = one;
    Rat n(state.n);
    if (sp.p_plus && sp.delta < one) {
        k1 = (one - n * *sp.p_plus) / (one - sp.delta);
    }
    if (sp.p_minus && sp.delta > Rat(0)) {
        k2 = (n * *sp.p_minus - one) / sp.delta;
    }
    auto clamp = [&](Rat v) { return v < Rat(0) ? Rat(0) : (v > one ? one : v); };
    return {clamp(k1), clamp(k2)};
}

ConditionReport check_P4(const DistributionVector& p, const LoadState& state, const Rat& eps) {
    ConditionReport rep;
    rep.condition = Condition::P4;
    Rat d = quantile(state);
    if (!(d > eps && d < Rat(1) - eps)) {
        rep.vacuous = true;
        rep.holds = true;
        return rep;
    }
    Rat pmin = p.p[0];
    for (const Rat& v : p.p) pmin = std::min(pmin, v);
    rep.k4 = pmin * Rat(state.n);
    rep.holds = *rep.k4 > Rat(0);
    if (!rep.holds) rep.witness = "some rank has zero probability inside the band";
    return rep;
}

namespace {

// Per-bin ball counts of one event.
std::map<int64_t, int64_t> counts_of(const AllocationEvent& ev) {
    std::map<int64_t, int64_t> c;
    for (auto& [bin, balls] : ev.placements) c[bin] += balls;
    return c;
}

bool check_w1_round(const LoadState& pre, int64_t chosen,
                    const std::map<int64_t, int64_t>& counts, int64_t weight,
                    std::string& witness) {
    if (pre.scaled(chosen) >= 0) {
        if (weight != 1 || counts.size() != 1 || counts.begin()->first != chosen) {
            witness = "overloaded choice must place exactly one ball in the chosen bin";
            return false;
        }
        return true;
    }
    int64_t expected = fill_deficit(pre, chosen) + 1;
    if (weight != expected) {
        witness = "underloaded choice placed " + std::to_string(weight) + " balls, expected " +
                  std::to_string(expected);
        return false;
    }
    // Slot assignment: one bin may receive up to deficit+1 balls (k1), one
    // more up to its deficit (k2); everyone else stays strictly below
    // deficit. Bins at exactly their deficit can occupy either slot.
    int need_a = 0, need_either = 0;
    for (auto& [bin, balls] : counts) {
        int64_t cap = fill_deficit(pre, bin);
        if (balls > cap + 1) {
            witness = "bin " + std::to_string(bin) + " received " + std::to_string(balls) +
                      " with deficit " + std::to_string(cap);
            return false;
        }
        if (balls == cap + 1) {
            ++need_a;
        } else if (balls == cap) {
            ++need_either;
        }
    }
    if (need_a > 1 || need_a + need_either > 2) {
        witness = "more than two bins reached their W1 fill caps";
        return false;
    }
    return true;
}

}  // namespace

ConditionReport classify_weights(Condition cond, const std::vector<AllocationEvent>& trace,
                                 const std::vector<LoadState>& states) {
    if (trace.size() != states.size())
        throw std::invalid_argument("classify_weights: trace/state length mismatch");
    ConditionReport rep;
    rep.condition = cond;
    rep.holds = true;
    std::optional<int64_t> w_plus, w_minus;
    for (size_t t = 0; t < trace.size(); ++t) {
        const AllocationEvent& ev = trace[t];
        const LoadState& pre = states[t];
        auto counts = counts_of(ev);
        if (cond == Condition::W1) {
            std::string witness;
            int64_t chosen = ev.samples.empty() ? ev.placements.front().first : ev.samples[0];
            if (!check_w1_round(pre, chosen, counts, ev.weight, witness)) {
                rep.holds = false;
                rep.witness = "round " + std::to_string(ev.round) + ": " + witness;
                return rep;
            }
        } else {
            if (counts.size() != 1) {
                rep.holds = false;
                rep.witness = "round " + std::to_string(ev.round) + ": multiple targets";
                return rep;
            }
            int64_t target = counts.begin()->first;
            int64_t balls = counts.begin()->second;
            auto& slot = pre.scaled(target) >= 0 ? w_plus : w_minus;
            if (!slot.has_value()) {
                slot = balls;
            } else if (*slot != balls) {
                rep.holds = false;
                rep.witness = "round " + std::to_string(ev.round) + ": non-constant weight " +
                              std::to_string(balls) + " vs " + std::to_string(*slot);
                return rep;
            }
        }
    }
    if (cond == Condition::W2 || cond == Condition::W3) {
        rep.w_plus = w_plus;
        rep.w_minus = w_minus;
        if (w_plus && w_minus) {
            if (*w_plus > *w_minus) {
                rep.holds = false;
                rep.witness = "w_+ > w_-";
            } else if (cond == Condition::W3 && *w_plus >= *w_minus) {
                rep.holds = false;
                rep.witness = "W3 needs w_+ < w_-";
            }
        } else {
            rep.vacuous = true;
        }
    }
    return rep;
}

size_t majorization_violation(const DistributionVector& p, const DistributionVector& q) {
    Rat pp, pq;
    for (size_t k = 0; k < p.p.size(); ++k) {
        pp += p.p[k];
        pq += q.p[k];
        if (pp < pq) return k + 1;
    }
    return 0;
}

bool majorizes(const DistributionVector& p, const DistributionVector& q) {
    return majorization_violation(p, q) == 0;
}

namespace {

void apply_event(LoadState& s, const AllocationEvent& ev) {
    for (auto& [bin, balls] : ev.placements) s.add_balls(bin, balls);
}

}  // namespace

UnfoldedTrace unfold(const LoadState& start, const std::vector<AllocationEvent>& trace) {
    UnfoldedTrace out;
    LoadState cur = start;
    for (const AllocationEvent& ev : trace) {
        out.round_begin.push_back(out.atoms.size());
        if (ev.weight == 1) {
            out.atoms.push_back({ev.round, ev.placements.front().first});
        } else {
            // k1 (deficit+1 receiver) first, then k2 (deficit), then the rest
            // in descending pre-load order.
            auto counts = counts_of(ev);
            std::vector<std::pair<int64_t, int64_t>> ordered(counts.begin(), counts.end());
            auto slot_rank = [&](const std::pair<int64_t, int64_t>& e) {
                int64_t cap = fill_deficit(cur, e.first);
                if (e.second == cap + 1) return 0;
                if (e.second == cap && cap >= 1) return 1;
                return 2;
            };
            std::stable_sort(ordered.begin(), ordered.end(),
                             [&](const auto& a, const auto& b) {
                                 int ra = slot_rank(a), rb = slot_rank(b);
                                 if (ra != rb) return ra < rb;
                                 return cur.x[size_t(a.first)] > cur.x[size_t(b.first)];
                             });
            for (auto& [bin, balls] : ordered) {
                for (int64_t c = 0; c < balls; ++c) out.atoms.push_back({ev.round, bin});
            }
        }
        apply_event(cur, ev);
    }
    return out;
}

CachingGroupResult group_caching_trace(const LoadState& start,
                                       const std::vector<AllocationEvent>& trace) {
    CachingGroupResult res;
    res.report.condition = Condition::W1;
    res.report.holds = true;
    LoadState cur = start;
    size_t s = 0;
    while (s < trace.size()) {
        const AllocationEvent& first = trace[s];
        if (first.weight != 1 || first.placements.size() != 1)
            throw std::invalid_argument("group_caching_trace: expected atomic trace");
        CachingGroup g;
        g.begin = s;
        g.chosen = first.placements.front().first;
        g.underloaded = cur.scaled(g.chosen) < 0;
        g.size = g.underloaded ? size_t(fill_deficit(cur, g.chosen) + 1) : 1;
        if (s + g.size > trace.size()) {
            res.leftover = trace.size() - s;
            break;
        }
        std::map<int64_t, int64_t> counts;
        for (size_t j = s; j < s + g.size; ++j) {
            counts[trace[j].placements.front().first] += 1;
        }
        std::string witness;
        if (res.report.holds &&
            !check_w1_round(cur, g.chosen, counts, int64_t(g.size), witness)) {
            res.report.holds = false;
            res.report.witness = "group at atom " + std::to_string(s) + ": " + witness;
        }
        for (size_t j = s; j < s + g.size; ++j) apply_event(cur, trace[j]);
        s += g.size;
        res.groups.push_back(g);
    }
    return res;
}

}  // namespace ballsim
