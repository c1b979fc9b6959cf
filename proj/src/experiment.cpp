#include "ballsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ballsim {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

json process_json(const ProcessConfig& cfg) {
    json j;
    j["kind"] = kind_name(cfg.kind);
    if (cfg.kind == ProcessKind::DChoice) j["d"] = cfg.d;
    if (cfg.kind == ProcessKind::OnePlusBeta) j["beta"] = cfg.beta.str();
    if (cfg.kind == ProcessKind::OnePlusEtaMeanThinning) j["eta"] = cfg.eta.str();
    if (cfg.kind == ProcessKind::Thinning || cfg.kind == ProcessKind::MeanThinning)
        j["f"] = cfg.f.str();
    if (cfg.kind == ProcessKind::Packing)
        j["fill"] = cfg.pack_fill == PackingFill::Threshold ? "threshold" : "overshoot";
    return j;
}

std::string start_name(StartKind k) {
    switch (k) {
        case StartKind::Empty: return "empty";
        case StartKind::HalfSplit: return "half-split";
        case StartKind::B1: return "b1";
        case StartKind::B2: return "b2";
    }
    return "?";
}

std::string trace_name(TraceMode m) {
    switch (m) {
        case TraceMode::Final: return "final";
        case TraceMode::EveryK: return "every";
        case TraceMode::Full: return "full";
    }
    return "?";
}

}  // namespace

std::string ExperimentSpec::to_json() const {
    json j;
    j["process"] = process_json(process);
    j["n"] = n;
    j["balls"] = effective_balls();
    j["reps"] = reps;
    j["seed"] = seed;
    j["trace"] = trace_name(trace);
    if (trace == TraceMode::EveryK) j["trace_k"] = trace_k > 0 ? trace_k : n;
    j["alpha"] = alpha;
    j["alpha_phi"] = alpha_phi;
    j["alpha_tilde"] = alpha_tilde > 0 ? alpha_tilde : 1.0 / (12.0 * double(n));
    j["eps"] = eps;
    j["start"] = start_name(start);
    if (start == StartKind::HalfSplit) j["start_level"] = start_level;
    return j.dump();
}

LoadState make_start_state(StartKind kind, int64_t n, int64_t level) {
    switch (kind) {
        case StartKind::Empty:
            return LoadState(n);
        case StartKind::HalfSplit: {
            if (n % 2 != 0) throw std::invalid_argument("half-split start needs even n");
            if (level < 0) throw std::invalid_argument("half-split level must be >= 0");
            std::vector<int64_t> x(size_t(n), 0);
            for (int64_t i = 0; i < n / 2; ++i) x[size_t(i)] = 2 * level;
            return LoadState::from_loads(std::move(x));
        }
        case StartKind::B1:
            return counterexample_config(Counterexample::B1, n);
        case StartKind::B2:
            return counterexample_config(Counterexample::B2, n);
    }
    throw std::logic_error("make_start_state");
}

int effective_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BALLSIM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void parallel_reps(int64_t reps, int threads, const std::function<void(int64_t)>& job) {
    threads = effective_threads(threads);
    if (threads <= 1 || reps <= 1) {
        for (int64_t r = 0; r < reps; ++r) job(r);
        return;
    }
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    int width = int(std::min<int64_t>(threads, reps));
    std::exception_ptr error;
    std::mutex error_mu;
    for (int t = 0; t < width; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int64_t r = next.fetch_add(1);
                if (r >= reps) return;
                try {
                    job(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double GapHistogram::mean() const {
    double acc = 0;
    for (const Rat& g : per_rep) acc += g.to_double();
    return per_rep.empty() ? 0.0 : acc / double(per_rep.size());
}

std::string GapHistogram::table() const {
    std::ostringstream os;
    for (auto& [g, c] : counts) {
        double pct = 100.0 * double(c) / double(reps);
        os << g.str() << " : " << fmt_double(pct) << "%\n";
    }
    return os.str();
}

GapHistogram run_gapdist(const ExperimentSpec& spec) {
    GapHistogram h;
    h.reps = spec.reps;
    h.per_rep.assign(size_t(spec.reps), Rat(0));
    LoadState start = make_start_state(spec.start, spec.n, spec.start_level);
    parallel_reps(spec.reps, spec.threads, [&](int64_t r) {
        ProcessState st = ProcessState::from_load(spec.process, start);
        SimulationResult res =
            simulate(spec.process, std::move(st), spec.effective_balls(), spec.seed, uint64_t(r));
        h.per_rep[size_t(r)] = gap(res.state.load);
    });
    for (const Rat& g : h.per_rep) h.counts[g] += 1;
    return h;
}

std::string gapdist_json(const ExperimentSpec& spec, const GapHistogram& h) {
    json j;
    j["experiment"] = json::parse(spec.to_json());
    json arr = json::array();
    for (auto& [g, c] : h.counts) arr.push_back({{"gap", g.str()}, {"count", c}});
    j["histogram"] = arr;
    j["reps"] = h.reps;
    j["mean_gap"] = h.mean();
    return j.dump(2) + "\n";
}

std::string run_trajectory(const ExperimentSpec& spec) {
    SimulateOptions opt;
    opt.trace = spec.trace == TraceMode::Final ? TraceMode::EveryK : spec.trace;
    opt.trace_k = spec.trace_k;
    opt.alpha = spec.alpha;
    opt.alpha_phi = spec.alpha_phi;
    opt.alpha_tilde = spec.alpha_tilde;
    LoadState start = make_start_state(spec.start, spec.n, spec.start_level);
    ProcessState st = ProcessState::from_load(spec.process, start);
    SimulationResult res = simulate(spec.process, std::move(st), spec.effective_balls(),
                                    spec.seed, 0, opt);

    std::ostringstream os;
    os << "# " << spec.to_json() << "\n";
    os << "t,balls,gap,delta,upsilon,phi,lambda,v,psi,quantile,lambda_norm,gap_minmax\n";
    double lambda0 = res.trace.empty() ? 1.0 : res.trace.front().report.lambda;
    if (lambda0 <= 0) lambda0 = 1.0;
    for (const TracePoint& tp : res.trace) {
        const PotentialReport& p = tp.report;
        os << tp.round << ',' << tp.balls << ',' << fmt_double(p.gap.to_double()) << ','
           << fmt_double(p.delta.to_double()) << ',' << fmt_double(p.upsilon.to_double()) << ','
           << fmt_double(p.phi) << ',' << fmt_double(p.lambda) << ',' << fmt_double(p.v) << ','
           << fmt_double(p.psi) << ',' << fmt_double(p.quantile.to_double()) << ','
           << fmt_double(p.lambda / lambda0) << ',' << fmt_double(tp.gap_minmax) << "\n";
    }
    std::string csv = os.str();
    if (!spec.out_path.empty()) write_file(spec.out_path, csv);
    return csv;
}

std::vector<ScalingRow> run_scaling(const std::vector<ProcessConfig>& processes,
                                    const std::vector<int64_t>& ns, int64_t balls_factor,
                                    int64_t reps, uint64_t seed, int threads) {
    std::vector<ScalingRow> rows;
    for (const ProcessConfig& cfg : processes) {
        for (int64_t n : ns) {
            ExperimentSpec spec;
            spec.process = cfg;
            spec.n = n;
            spec.balls = balls_factor * n;
            spec.reps = reps;
            spec.seed = seed;
            spec.threads = threads;
            GapHistogram h = run_gapdist(spec);
            rows.push_back({cfg.name(), n, reps, h.mean()});
        }
    }
    return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows, int64_t balls_factor,
                        uint64_t seed) {
    std::ostringstream os;
    json hdr;
    hdr["balls_factor"] = balls_factor;
    hdr["seed"] = seed;
    json procs = json::array();
    for (const auto& r : rows) procs.push_back(r.process);
    hdr["rows"] = procs;
    os << "# " << hdr.dump() << "\n";
    os << "process,n,reps,mean_gap\n";
    for (const auto& r : rows) {
        os << r.process << ',' << r.n << ',' << r.reps << ',' << fmt_double(r.mean_gap) << "\n";
    }
    return os.str();
}

std::string SuiteResult::to_json() const {
    json j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["ok"] = ok();
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["checks"] = arr;
    return j.dump(2);
}

namespace {

void add_check(SuiteResult& s, const std::string& name, bool passed,
               const std::string& detail = "") {
    s.checks.push_back({name, passed, detail});
}

// Streams one trace, invoking `per_round` with the pre-round state and event.
void walk_trace(const ProcessConfig& cfg, int64_t n, int64_t balls, uint64_t seed,
                uint64_t stream,
                const std::function<void(const ProcessState&, const AllocationEvent&)>& per_round) {
    Rng rng(seed, stream);
    ProcessState st = ProcessState::initial(cfg, n);
    int64_t target = balls;
    while (st.load.w < target) {
        ProcessState pre = st;
        AllocationEvent ev = step(cfg, st, rng);
        per_round(pre, ev);
    }
}

}  // namespace

SuiteResult verify_framework_suite(const VerifyKnobs& k) {
    SuiteResult suite;
    suite.suite = "framework";
    suite.seed = k.seed;

    // P1 on every state of Packing / OverPacking / Caching traces, plus
    // W1 placement caps and the per-round absolute-potential step bound.
    for (ProcessKind kind :
         {ProcessKind::Packing, ProcessKind::OverPacking, ProcessKind::Caching}) {
        ProcessConfig cfg(kind);
        std::atomic<int64_t> p1_bad{0}, w1_bad{0}, delta_bad{0};
        parallel_reps(k.framework_traces, k.threads, [&](int64_t r) {
            walk_trace(cfg, k.framework_n, k.framework_balls, k.seed, uint64_t(r),
                       [&](const ProcessState& pre, const AllocationEvent& ev) {
                           if (kind != ProcessKind::Caching || pre.cache.has_value()) {
                               auto dv = distribution_vector(cfg, pre);
                               if (!check_P1(dv).holds) p1_bad.fetch_add(1);
                           }
                           if (kind != ProcessKind::Caching) {
                               std::vector<AllocationEvent> t{ev};
                               std::vector<LoadState> s{pre.load};
                               if (!classify_weights(Condition::W1, t, s).holds)
                                   w1_bad.fetch_add(1);
                               ProcessState post = pre;
                               for (auto& [bin, balls] : ev.placements)
                                   post.load.add_balls(bin, balls);
                               Rat before = delta_potential(pre.load);
                               Rat after = delta_potential(post.load);
                               if (after > before + Rat(4)) delta_bad.fetch_add(1);
                           }
                       });
        });
        add_check(suite, "P1 holds on every " + cfg.name() + " state", p1_bad.load() == 0,
                  std::to_string(k.framework_traces) + " traces");
        if (kind != ProcessKind::Caching) {
            add_check(suite, "W1 placements on " + cfg.name(), w1_bad.load() == 0);
            add_check(suite, "delta step bound (+4) on " + cfg.name(), delta_bad.load() == 0);
        }
    }

    // Twinning: P2 with equality and W3 weights (1, 2).
    {
        ProcessConfig cfg = ProcessConfig::twinning();
        std::atomic<int64_t> p2_bad{0}, p4_bad{0};
        std::atomic<bool> w3_ok{true};
        parallel_reps(k.framework_traces, k.threads, [&](int64_t r) {
            std::vector<AllocationEvent> events;
            std::vector<LoadState> states;
            walk_trace(cfg, k.framework_n, k.framework_balls, k.seed, 7000 + uint64_t(r),
                       [&](const ProcessState& pre, const AllocationEvent& ev) {
                           auto dv = distribution_vector(cfg, pre);
                           auto rep = check_P2(dv, pre.load);
                           if (!rep.holds) p2_bad.fetch_add(1);
                           // Uniform sampling means P2 holds with equality.
                           for (const Rat& p : dv.p) {
                               if (p != Rat(1, pre.load.n)) {
                                   p2_bad.fetch_add(1);
                                   break;
                               }
                           }
                           auto p4 = check_P4(dv, pre.load, Rat(1, 8));
                           if (!p4.vacuous && (!p4.holds || *p4.k4 != Rat(1)))
                               p4_bad.fetch_add(1);
                           events.push_back(ev);
                           states.push_back(pre.load);
                       });
            auto w3 = classify_weights(Condition::W3, events, states);
            if (!w3.holds || !w3.w_plus || *w3.w_plus != 1 || !w3.w_minus || *w3.w_minus != 2)
                w3_ok.store(false);
        });
        add_check(suite, "P2 holds (with equality) on Twinning", p2_bad.load() == 0);
        add_check(suite, "P4 constant k4=1 on Twinning", p4_bad.load() == 0);
        add_check(suite, "W3 weights (1,2) on Twinning", w3_ok.load());
    }

    // MeanThinning: P3 with k1=k2=1 on every state, W2 with (1,1), P4 = delta.
    {
        ProcessConfig cfg = ProcessConfig::mean_thinning();
        std::atomic<int64_t> p3_bad{0}, p4_bad{0};
        std::atomic<bool> w2_ok{true};
        parallel_reps(k.framework_traces, k.threads, [&](int64_t r) {
            std::vector<AllocationEvent> events;
            std::vector<LoadState> states;
            walk_trace(cfg, k.framework_n, k.framework_balls, k.seed, 8000 + uint64_t(r),
                       [&](const ProcessState& pre, const AllocationEvent& ev) {
                           auto dv = distribution_vector(cfg, pre);
                           if (!check_P3(dv, pre.load, Rat(1), Rat(1)).holds) p3_bad.fetch_add(1);
                           auto p4 = check_P4(dv, pre.load, Rat(1, 8));
                           if (!p4.vacuous && (!p4.holds || *p4.k4 != quantile(pre.load)))
                               p4_bad.fetch_add(1);
                           events.push_back(ev);
                           states.push_back(pre.load);
                       });
            auto w2 = classify_weights(Condition::W2, events, states);
            if (!w2.holds) w2_ok.store(false);
        });
        add_check(suite, "P3 (k1=k2=1) holds on MeanThinning", p3_bad.load() == 0);
        add_check(suite, "P4 constant k4=delta on MeanThinning", p4_bad.load() == 0);
        add_check(suite, "W2 weights on MeanThinning", w2_ok.load());
    }

    // (1+eta)-MeanThinning: P3 with k1=k2=eta.
    {
        ProcessConfig cfg = ProcessConfig::one_plus_eta_mean_thinning(Rat(1, 2));
        std::atomic<int64_t> bad{0};
        parallel_reps(std::min<int64_t>(k.framework_traces, 20), k.threads, [&](int64_t r) {
            walk_trace(cfg, k.framework_n, k.framework_balls, k.seed, 9000 + uint64_t(r),
                       [&](const ProcessState& pre, const AllocationEvent&) {
                           auto dv = distribution_vector(cfg, pre);
                           if (!check_P3(dv, pre.load, cfg.eta, cfg.eta).holds)
                               bad.fetch_add(1);
                       });
        });
        add_check(suite, "P3 (k1=k2=eta) holds on (1+eta)-MeanThinning", bad.load() == 0);
    }

    // (1+beta): P4 with k4 >= 1 - beta at banded quantiles.
    {
        ProcessConfig cfg = ProcessConfig::one_plus_beta(Rat(1, 2));
        bool ok = true;
        Rng rng(k.seed, 4242);
        for (int i = 0; i < 50 && ok; ++i) {
            ProcessState st = random_reachable_state(cfg, k.framework_n, rng);
            auto dv = distribution_vector(cfg, st);
            auto p4 = check_P4(dv, st.load, Rat(1, 8));
            if (!p4.vacuous && (!p4.holds || *p4.k4 < Rat(1) - cfg.beta)) ok = false;
        }
        add_check(suite, "P4 constant k4 >= 1-beta on (1+beta)", ok);
    }

    // Caching unfolding: every group satisfies the W1 caps.
    {
        ProcessConfig cfg = ProcessConfig::caching();
        std::atomic<int64_t> bad{0};
        parallel_reps(k.grouping_traces, k.threads, [&](int64_t r) {
            Rng rng(k.seed, 100000 + uint64_t(r));
            ProcessState st = ProcessState::initial(cfg, k.grouping_n);
            std::vector<AllocationEvent> events;
            events.reserve(size_t(k.grouping_balls));
            LoadState start = st.load;
            while (st.load.w < k.grouping_balls) events.push_back(step(cfg, st, rng));
            auto res = group_caching_trace(start, events);
            if (!res.report.holds) bad.fetch_add(1);
        });
        add_check(suite, "Caching trace grouping satisfies W1", bad.load() == 0,
                  std::to_string(k.grouping_traces) + " traces");
    }

    return suite;
}

SuiteResult verify_drift_suite(const VerifyKnobs& k) {
    SuiteResult suite;
    suite.suite = "drift";
    suite.seed = k.seed;
    const double eps = 0.25;

    struct Named {
        ProcessConfig cfg;
        std::string label;
    };
    std::vector<Named> quad = {
        {ProcessConfig::twinning(), "Twinning"},
        {ProcessConfig::mean_thinning(), "MeanThinning"},
        {ProcessConfig::one_plus_eta_mean_thinning(Rat(1, 2)), "(1+eta)-MeanThinning"},
    };
    for (auto& [cfg, label] : quad) {
        std::atomic<int64_t> bad{0};
        std::vector<double> margin(size_t(k.drift_states), 0.0);
        parallel_reps(k.drift_states, k.threads, [&, c = cfg](int64_t r) {
            Rng rng(k.seed, 200000 + uint64_t(r));
            ProcessState st = random_reachable_state(c, k.drift_n, rng);
            auto res = verify_upsilon_drop(c, st);
            if (!res.satisfied) bad.fetch_add(1);
            margin[size_t(r)] = res.expected - res.bound;
        });
        add_check(suite, "quadratic drop bound (exact) on " + label, bad.load() == 0,
                  std::to_string(k.drift_states) + " states, worst margin " +
                      fmt_double(*std::max_element(margin.begin(), margin.end())));
    }

    {
        std::atomic<int64_t> bad{0};
        std::vector<double> margin(size_t(k.drift_states), 0.0);
        ProcessConfig cfg = ProcessConfig::packing();
        parallel_reps(k.drift_states, k.threads, [&](int64_t r) {
            Rng rng(k.seed, 300000 + uint64_t(r));
            ProcessState st = random_reachable_state(cfg, k.drift_n, rng);
            auto res = verify_phi_bound(st.load, 0.01);
            if (!res.satisfied) bad.fetch_add(1);
            margin[size_t(r)] = res.expected - res.bound;
        });
        add_check(suite, "phi one-round bound on Packing", bad.load() == 0,
                  std::to_string(k.drift_states) + " states, rel slack 1e-9, worst margin " +
                      fmt_double(*std::max_element(margin.begin(), margin.end())));
    }

    for (auto& [cfg, label] : std::vector<Named>{{ProcessConfig::mean_thinning(), "MeanThinning"},
                                                 {ProcessConfig::twinning(), "Twinning"}}) {
        std::atomic<int64_t> bad{0};
        std::vector<double> fitted(size_t(k.drift_states), 1.0);
        double alpha = lambda_alpha_cap(cfg, eps);
        parallel_reps(k.drift_states, k.threads, [&, c = cfg, a = alpha](int64_t r) {
            Rng rng(k.seed, 400000 + uint64_t(r));
            ProcessState st = random_reachable_state(c, k.drift_n, rng);
            auto res = verify_lambda_change(c, st, eps, a);
            if (!res.general.satisfied) bad.fetch_add(1);
            if (res.in_band) {
                if (!res.in_band->satisfied) bad.fetch_add(1);
                fitted[size_t(r)] = res.fitted_c3;
            }
        });
        add_check(suite, "lambda increase bound (c4=3w e^{2w}) on " + label, bad.load() == 0,
                  "alpha=" + fmt_double(alpha) + ", min in-band c3 " +
                      fmt_double(*std::min_element(fitted.begin(), fitted.end())));
    }

    for (auto& [cfg, label] : std::vector<Named>{{ProcessConfig::twinning(), "Twinning"},
                                                 {ProcessConfig::mean_thinning(), "MeanThinning"}}) {
        std::atomic<int64_t> bad{0};
        parallel_reps(100, k.threads, [&, c = cfg](int64_t r) {
            Rng rng(k.seed, 500000 + uint64_t(r));
            ProcessState st = random_reachable_state(c, k.drift_n, rng);
            if (!verify_v_drop(c, st).satisfied) bad.fetch_add(1);
        });
        add_check(suite, "v drop (fitted c5 > 0) on " + label, bad.load() == 0, "100 states");
    }

    return suite;
}

SuiteResult verify_caching2step_suite(const VerifyKnobs& k) {
    SuiteResult suite;
    suite.suite = "caching2step";
    suite.seed = k.seed;
    ProcessConfig cfg = ProcessConfig::caching();
    std::atomic<int64_t> bad{0};
    parallel_reps(k.caching2_states, k.threads, [&](int64_t r) {
        Rng rng(k.seed, 600000 + uint64_t(r));
        ProcessState st = random_reachable_state(cfg, k.caching2_n, rng);
        if (!caching_two_step_worst_cache(st.load).satisfied) bad.fetch_add(1);
    });
    add_check(suite, "two-step psi bound over all cache positions", bad.load() == 0,
              std::to_string(k.caching2_states) + " states at n=" +
                  std::to_string(k.caching2_n));
    return suite;
}

SuiteResult verify_counterexamples_suite(const VerifyKnobs& k) {
    SuiteResult suite;
    suite.suite = "counterexamples";
    suite.seed = k.seed;
    auto res = verify_counterexamples(k.counterexample_n, k.counterexample_alpha);
    add_check(suite, "B1: phi increases under Packing", res.b1.satisfied,
              "E ratio log=" + fmt_double(res.b1.log_expected - res.b1.log_current));
    add_check(suite, "B2: lambda increases under MeanThinning", res.b2.satisfied,
              "E ratio log=" + fmt_double(res.b2.log_expected - res.b2.log_current));
    add_check(suite, "B2 quantile is exactly 1 - 2/n", res.b2_quantile_exact);

    // Informational: the smallest tested n where each bound already holds.
    int64_t first_b1 = 0, first_b2 = 0;
    for (int64_t n : {16, 36, 64, 100, 256, 400, 2500, 10000}) {
        if (n > k.counterexample_n) break;
        auto probe = verify_counterexamples(n, k.counterexample_alpha);
        if (first_b1 == 0 && probe.b1.satisfied) first_b1 = n;
        if (first_b2 == 0 && probe.b2.satisfied) first_b2 = n;
    }
    add_check(suite, "smallest tested n where bounds hold", first_b1 > 0 && first_b2 > 0,
              "B1: n=" + std::to_string(first_b1) + ", B2: n=" + std::to_string(first_b2));
    return suite;
}

SuiteResult verify_couplings_suite(const VerifyKnobs& k) {
    SuiteResult suite;
    suite.suite = "couplings";
    suite.seed = k.seed;

    std::atomic<int64_t> violations{0}, disagreements{0};
    parallel_reps(k.coupling_runs, k.threads, [&](int64_t r) {
        auto tr = coupled_thinning(k.coupling_n, k.coupling_rounds, Rat(k.coupling_f), k.seed,
                                   uint64_t(r));
        violations.fetch_add(tr.domination_violations);
        disagreements.fetch_add(tr.branch_disagreements);
    });
    add_check(suite, "pointwise domination x(A) <= x(B)", violations.load() == 0,
              std::to_string(k.coupling_runs) + " runs, f=" + std::to_string(k.coupling_f));
    add_check(suite, "case-2 branch agreement", disagreements.load() == 0);

    {
        bool identical = true;
        for (int64_t r = 0; r < 10 && identical; ++r) {
            auto tr = coupled_thinning(k.coupling_n, k.coupling_rounds, Rat(0), k.seed,
                                       uint64_t(r));
            identical = tr.final_a.x == tr.final_b.x && tr.domination_violations == 0;
        }
        add_check(suite, "f=0 trajectories bit-identical", identical);
    }

    {
        std::vector<int64_t> gap_f(size_t(k.cdf_reps)), gap_0(size_t(k.cdf_reps));
        ProcessConfig thin_f = ProcessConfig::thinning(Rat(k.coupling_f));
        ProcessConfig thin_0 = ProcessConfig::mean_thinning();
        parallel_reps(k.cdf_reps, k.threads, [&](int64_t r) {
            auto a = simulate(thin_f, k.cdf_n, k.cdf_rounds, k.seed, uint64_t(r));
            auto b = simulate(thin_0, k.cdf_n, k.cdf_rounds, k.seed ^ 0x5bd1e995u, uint64_t(r));
            Rat ga = gap(a.state.load), gb = gap(b.state.load);
            if (!ga.is_integer() || !gb.is_integer())
                throw std::logic_error("cdf check expects integer gaps");
            gap_f[size_t(r)] = int64_t(ga.num());
            gap_0[size_t(r)] = int64_t(gb.num());
        });
        auto dom = gap_cdf_dominance(gap_f, gap_0, k.coupling_f);
        add_check(suite, "Gap_f CDF dominated by Gap_0 + f (3 SE slack)", dom.holds,
                  dom.holds ? "" : "fails at gap " + std::to_string(dom.failing_gap));
    }

    {
        bool ok = true;
        std::string detail;
        for (int64_t n = 2; n <= k.majorization_max_n && ok; ++n) {
            for (const Rat& beta : {Rat(1, 4), Rat(1, 2), Rat(3, 4), Rat(1)}) {
                auto res = beta_eta_prefix_check(n, beta);
                if (!res.holds || !res.boundary_equal) {
                    ok = false;
                    detail = "n=" + std::to_string(n) + " beta=" + beta.str();
                    break;
                }
            }
        }
        add_check(suite, "(1+eta=beta) majorizes (1+beta) for all n <= " +
                             std::to_string(k.majorization_max_n),
                  ok, detail);
    }

    return suite;
}

OracleComparison run_oracle_comparison(const ProcessConfig& cfg, int64_t n, int64_t m,
                                       int64_t samples, uint64_t seed, int threads) {
    OracleComparison out;
    out.exact = exact_gap_distribution(cfg, n, m);
    out.samples = samples;

    int width = effective_threads(threads);
    std::vector<std::map<Rat, int64_t>> partial(static_cast<size_t>(width));
    std::atomic<int64_t> next{0};
    const int64_t chunk = 4096;
    std::vector<std::thread> pool;
    for (int t = 0; t < width; ++t) {
        pool.emplace_back([&, t] {
            for (;;) {
                int64_t begin = next.fetch_add(chunk);
                if (begin >= samples) return;
                int64_t end = std::min(samples, begin + chunk);
                for (int64_t s = begin; s < end; ++s) {
                    auto res = simulate(cfg, n, m, seed, uint64_t(s));
                    partial[size_t(t)][gap(res.state.load)] += 1;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& p : partial) {
        for (auto& [g, c] : p) out.empirical[g] += c;
    }
    out.tv = tv_distance(out.exact, out.empirical, samples);
    return out;
}

LowerBoundResult run_lowerbound(const ProcessConfig& cfg, int64_t n, double k, int64_t reps,
                                uint64_t seed, int threads) {
    LowerBoundResult out;
    double logn = std::log(double(n));
    out.rounds = int64_t(std::ceil(k * double(n) * logn));
    out.threshold = k * logn;
    std::atomic<int64_t> hits{0};
    parallel_reps(reps, threads, [&](int64_t r) {
        auto res = simulate(cfg, n, out.rounds, seed, uint64_t(r));
        if (gap(res.state.load).to_double() >= out.threshold) hits.fetch_add(1);
    });
    out.frequency = double(hits.load()) / double(reps);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << content;
}

std::string condition_report_json(const ConditionReport& rep) {
    json j;
    j["condition"] = condition_name(rep.condition);
    j["holds"] = rep.holds;
    j["vacuous"] = rep.vacuous;
    if (!rep.witness.empty()) j["witness"] = rep.witness;
    if (rep.k1) j["k1"] = rep.k1->str();
    if (rep.k2) j["k2"] = rep.k2->str();
    if (rep.k4) j["k4"] = rep.k4->str();
    if (rep.w_plus) j["w_plus"] = *rep.w_plus;
    if (rep.w_minus) j["w_minus"] = *rep.w_minus;
    return j.dump();
}

std::string expectation_json(const ExpectationResult& res) {
    json j;
    j["potential"] = potential_name(res.potential);
    j["alpha"] = res.alpha;
    j["current"] = res.current;
    j["expected"] = res.expected;
    j["log_current"] = res.log_current;
    j["log_expected"] = res.log_expected;
    if (res.current_exact) j["current_exact"] = res.current_exact->str();
    if (res.expected_exact) j["expected_exact"] = res.expected_exact->str();
    j["bound"] = res.bound;
    j["satisfied"] = res.satisfied;
    j["log_domain"] = res.log_domain;
    if (!res.note.empty()) j["note"] = res.note;
    return j.dump();
}

std::string coupled_trace_csv(const CoupledTrace& trace, uint64_t seed) {
    std::ostringstream os;
    json hdr;
    hdr["n"] = trace.n;
    hdr["rounds"] = trace.rounds;
    hdr["f"] = trace.f;
    hdr["seed"] = seed;
    hdr["domination_violations"] = trace.domination_violations;
    hdr["branch_disagreements"] = trace.branch_disagreements;
    os << "# " << hdr.dump() << "\n";
    os << "t,gap_a\n";
    for (size_t t = 0; t < trace.gap_a_numerator.size(); ++t) {
        os << t << ',' << fmt_double(double(trace.gap_a_numerator[t]) / double(trace.n))
           << "\n";
    }
    return os.str();
}

}  // namespace ballsim
