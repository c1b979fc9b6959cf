#include "ballsim/process.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ballsim {

std::string kind_name(ProcessKind k) {
    switch (k) {
        case ProcessKind::OneChoice: return "onechoice";
        case ProcessKind::DChoice: return "dchoice";
        case ProcessKind::OnePlusBeta: return "oneplusbeta";
        case ProcessKind::Caching: return "caching";
        case ProcessKind::Packing: return "packing";
        case ProcessKind::OverPacking: return "overpacking";
        case ProcessKind::Twinning: return "twinning";
        case ProcessKind::Thinning: return "thinning";
        case ProcessKind::MeanThinning: return "meanthinning";
        case ProcessKind::OnePlusEtaMeanThinning: return "onepluseta";
    }
    return "unknown";
}

ProcessKind parse_kind(const std::string& name) {
    std::string s;
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (s == "onechoice") return ProcessKind::OneChoice;
    if (s == "twochoice") return ProcessKind::DChoice;
    if (s == "dchoice") return ProcessKind::DChoice;
    if (s == "oneplusbeta" || s == "1+beta" || s == "(1+beta)") return ProcessKind::OnePlusBeta;
    if (s == "caching" || s == "memory") return ProcessKind::Caching;
    if (s == "packing") return ProcessKind::Packing;
    if (s == "overpacking") return ProcessKind::OverPacking;
    if (s == "twinning") return ProcessKind::Twinning;
    if (s == "thinning") return ProcessKind::Thinning;
    if (s == "meanthinning") return ProcessKind::MeanThinning;
    if (s == "onepluseta" || s == "oneplusetameanthinning" || s == "1+eta")
        return ProcessKind::OnePlusEtaMeanThinning;
    throw std::invalid_argument("unknown process: " + name);
}

ProcessConfig ProcessConfig::d_choice(int64_t d) {
    ProcessConfig c(ProcessKind::DChoice);
    c.d = d;
    c.validate();
    return c;
}

ProcessConfig ProcessConfig::one_plus_beta(Rat beta) {
    ProcessConfig c(ProcessKind::OnePlusBeta);
    c.beta = beta;
    c.validate();
    return c;
}

ProcessConfig ProcessConfig::thinning(Rat f) {
    ProcessConfig c(f.is_zero() ? ProcessKind::MeanThinning : ProcessKind::Thinning);
    c.f = f;
    c.validate();
    return c;
}

ProcessConfig ProcessConfig::one_plus_eta_mean_thinning(Rat eta) {
    ProcessConfig c(ProcessKind::OnePlusEtaMeanThinning);
    c.eta = eta;
    c.validate();
    return c;
}

void ProcessConfig::validate() const {
    switch (kind) {
        case ProcessKind::DChoice:
            if (d < 1) throw std::invalid_argument("DChoice: d must be >= 1");
            break;
        case ProcessKind::OnePlusBeta:
            if (beta <= Rat(0) || beta > Rat(1))
                throw std::invalid_argument("OnePlusBeta: beta must be in (0,1]");
            break;
        case ProcessKind::OnePlusEtaMeanThinning:
            if (eta <= Rat(0) || eta > Rat(1))
                throw std::invalid_argument("OnePlusEtaMeanThinning: eta must be in (0,1]");
            break;
        case ProcessKind::Thinning:
        case ProcessKind::MeanThinning:
            if (f < Rat(0)) throw std::invalid_argument("Thinning: f must be >= 0");
            if (kind == ProcessKind::MeanThinning && !f.is_zero())
                throw std::invalid_argument("MeanThinning: f must be 0");
            break;
        default:
            break;
    }
}

std::string ProcessConfig::name() const {
    switch (kind) {
        case ProcessKind::DChoice:
            return d == 2 ? "twochoice" : "dchoice(d=" + std::to_string(d) + ")";
        case ProcessKind::OnePlusBeta: return "oneplusbeta(beta=" + beta.str() + ")";
        case ProcessKind::Thinning: return "thinning(f=" + f.str() + ")";
        case ProcessKind::OnePlusEtaMeanThinning: return "onepluseta(eta=" + eta.str() + ")";
        case ProcessKind::Packing:
            return pack_fill == PackingFill::Threshold ? "packing(fill=threshold)" : "packing";
        default: return kind_name(kind);
    }
}

ProcessState ProcessState::initial(const ProcessConfig& cfg, int64_t n) {
    cfg.validate();
    ProcessState s;
    s.load = LoadState(n);
    return s;
}

ProcessState ProcessState::from_load(const ProcessConfig& cfg, LoadState load) {
    cfg.validate();
    ProcessState s;
    s.load = std::move(load);
    return s;
}

namespace {

int64_t sample_bin(const LoadState& s, Rng& rng) {
    return static_cast<int64_t>(rng.below(static_cast<uint64_t>(s.n)));
}

void place(ProcessState& st, AllocationEvent& ev, int64_t bin, int64_t count) {
    st.load.add_balls(bin, count);
    for (auto& p : ev.placements) {
        if (p.first == bin) {
            p.second += count;
            ev.weight += count;
            return;
        }
    }
    ev.placements.emplace_back(bin, count);
    ev.weight += count;
}

void step_d_choice(int64_t d, ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t best = -1;
    for (int64_t j = 0; j < d; ++j) {
        int64_t i = sample_bin(st.load, rng);
        ev.samples.push_back(i);
        if (best < 0 || st.load.x[size_t(i)] < st.load.x[size_t(best)] ||
            (st.load.x[size_t(i)] == st.load.x[size_t(best)] && i < best)) {
            best = i;
        }
    }
    place(st, ev, best, 1);
}

void step_caching(ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i = sample_bin(st.load, rng);
    ev.samples.push_back(i);
    if (!st.cache.has_value()) {
        place(st, ev, i, 1);
        st.cache = i;
        return;
    }
    int64_t b = *st.cache;
    ev.samples.push_back(b);
    if (st.load.x[size_t(i)] < st.load.x[size_t(b)]) {
        place(st, ev, i, 1);
        st.cache = i;
    } else if (st.load.x[size_t(i)] == st.load.x[size_t(b)]) {
        place(st, ev, i, 1);
    } else {
        place(st, ev, b, 1);
    }
}

void step_packing(PackingFill fill, ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i = sample_bin(st.load, rng);
    ev.samples.push_back(i);
    if (st.load.scaled(i) >= 0) {
        place(st, ev, i, 1);
        return;
    }
    int64_t target = fill == PackingFill::Overshoot
                         ? (st.load.w + st.load.n - 1) / st.load.n + 1  // ceil(W/n)+1
                         : st.load.w / st.load.n + 1;                   // floor(W/n)+1
    place(st, ev, i, target - st.load.x[size_t(i)]);
}

// Fills ceil(-y_i)+1 balls ball-by-ball into the most-loaded strictly
// underloaded bin (thresholds frozen at the round-start W). The first target
// is topped up to the average; every later target is capped one ball below
// its deficit, and a final leftover ball returns to the first target.
void step_over_packing(ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i = sample_bin(st.load, rng);
    ev.samples.push_back(i);
    const LoadState before = st.load;
    int64_t deficit = fill_deficit(before, i);
    if (deficit == 0) {
        place(st, ev, i, 1);
        return;
    }
    int64_t remaining = deficit + 1;
    std::vector<int64_t> given(size_t(before.n), 0);
    int64_t first_target = -1;
    while (remaining > 0) {
        int64_t target = -1;
        for (int64_t j = 0; j < before.n; ++j) {
            if (before.scaled(j) >= 0) continue;
            int64_t cap = fill_deficit(before, j) - (j == first_target || first_target < 0 ? 0 : 1);
            if (given[size_t(j)] >= cap) continue;
            if (target < 0 || before.x[size_t(j)] > before.x[size_t(target)]) target = j;
        }
        if (target < 0) break;
        if (first_target < 0) first_target = target;
        int64_t cap = fill_deficit(before, target) - (target == first_target ? 0 : 1);
        int64_t give = std::min(remaining, cap - given[size_t(target)]);
        given[size_t(target)] += give;
        remaining -= give;
    }
    if (remaining > 0) {
        given[size_t(first_target)] += remaining;  // the ceil(-y)+1 slot of W1
        remaining = 0;
    }
    for (int64_t j = 0; j < before.n; ++j) {
        if (given[size_t(j)] > 0) place(st, ev, j, given[size_t(j)]);
    }
}

void step_twinning(ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i = sample_bin(st.load, rng);
    ev.samples.push_back(i);
    place(st, ev, i, st.load.scaled(i) < 0 ? 2 : 1);
}

// Threshold t/n + f compared exactly: place at i1 iff q*(n*x - t) < n*p
// where f = p/q and t is the round counter (equals W only for empty
// starts).
void step_thinning(const Rat& f, ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i1 = sample_bin(st.load, rng);
    int64_t i2 = sample_bin(st.load, rng);
    ev.samples.push_back(i1);
    ev.samples.push_back(i2);
    int128 lhs = (int128(st.load.n) * st.load.x[size_t(i1)] - st.round) * f.den();
    int128 rhs = int128(st.load.n) * f.num();
    place(st, ev, lhs < rhs ? i1 : i2, 1);
}

void step_mean_thinning(ProcessState& st, AllocationEvent& ev, Rng& rng) {
    int64_t i1 = sample_bin(st.load, rng);
    int64_t i2 = sample_bin(st.load, rng);
    ev.samples.push_back(i1);
    ev.samples.push_back(i2);
    place(st, ev, st.load.scaled(i1) < 0 ? i1 : i2, 1);
}

}  // namespace

AllocationEvent step(const ProcessConfig& cfg, ProcessState& state, Rng& rng) {
    AllocationEvent ev;
    ev.round = state.round;
    switch (cfg.kind) {
        case ProcessKind::OneChoice:
            step_d_choice(1, state, ev, rng);
            break;
        case ProcessKind::DChoice:
            step_d_choice(cfg.d, state, ev, rng);
            break;
        case ProcessKind::OnePlusBeta:
            step_d_choice(rng.bernoulli(cfg.beta) ? 2 : 1, state, ev, rng);
            break;
        case ProcessKind::Caching:
            step_caching(state, ev, rng);
            break;
        case ProcessKind::Packing:
            step_packing(cfg.pack_fill, state, ev, rng);
            break;
        case ProcessKind::OverPacking:
            step_over_packing(state, ev, rng);
            break;
        case ProcessKind::Twinning:
            step_twinning(state, ev, rng);
            break;
        case ProcessKind::Thinning:
            step_thinning(cfg.f, state, ev, rng);
            break;
        case ProcessKind::MeanThinning:
            step_mean_thinning(state, ev, rng);
            break;
        case ProcessKind::OnePlusEtaMeanThinning:
            if (rng.bernoulli(cfg.eta)) {
                step_mean_thinning(state, ev, rng);
            } else {
                step_d_choice(1, state, ev, rng);
            }
            break;
    }
    state.round += 1;
    return ev;
}

SimulationResult simulate(const ProcessConfig& cfg, ProcessState start, int64_t balls,
                          uint64_t seed, uint64_t stream, const SimulateOptions& opt) {
    if (balls < 0) throw std::invalid_argument("simulate: balls must be >= 0");
    Rng rng(seed, stream);
    SimulationResult res;
    res.state = std::move(start);
    const int64_t n = res.state.load.n;
    const int64_t k = opt.trace_k > 0 ? opt.trace_k : n;
    const double at = opt.alpha_tilde > 0 ? opt.alpha_tilde : 1.0 / (12.0 * double(n));
    const int64_t target_w = res.state.load.w + balls;

    auto emit = [&] {
        PotentialReport rep = potentials(res.state.load, opt.alpha, at);
        if (opt.alpha_phi > 0 && opt.alpha_phi != opt.alpha) {
            rep.phi = potentials(res.state.load, opt.alpha_phi, at).phi;
        }
        res.trace.push_back({res.state.round, res.state.load.w, std::move(rep),
                             gap_max_min(res.state.load).to_double()});
    };
    if (opt.trace != TraceMode::Final) emit();
    while (res.state.load.w < target_w) {
        step(cfg, res.state, rng);
        ++res.rounds;
        if (opt.trace == TraceMode::Full ||
            (opt.trace == TraceMode::EveryK && res.rounds % k == 0)) {
            emit();
        }
    }
    if (res.trace.empty() || res.trace.back().round != res.state.round) emit();
    return res;
}

SimulationResult simulate(const ProcessConfig& cfg, int64_t n, int64_t balls, uint64_t seed,
                          uint64_t stream, const SimulateOptions& opt) {
    return simulate(cfg, ProcessState::initial(cfg, n), balls, seed, stream, opt);
}

}  // namespace ballsim
