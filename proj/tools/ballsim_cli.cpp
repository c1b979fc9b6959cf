#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ballsim/experiment.hpp"

using namespace ballsim;
using nlohmann::json;

namespace {

Rat parse_rat(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        int64_t num = std::stoll(text.substr(0, slash));
        int64_t den = std::stoll(text.substr(slash + 1));
        return Rat(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rat(std::stoll(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    int64_t den = 1;
    for (size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Rat(std::stoll(digits), den);
}

struct CommonOpts {
    std::string process = "onechoice";
    int64_t n = 1000;
    int64_t balls = 0;
    int64_t rounds = 0;
    int64_t reps = 100;
    uint64_t seed = 1;
    double alpha = 0.7;
    double alpha_phi = 0.01;
    double alpha_tilde = 0;
    double eps = 0.25;
    std::string beta = "1/2";
    std::string eta = "1/2";
    std::string f = "0";
    int64_t d = 2;
    std::string trace = "final";
    std::string start = "empty";
    std::string out;
    int threads = 0;
    std::string format = "table";
    std::string packing_fill = "overshoot";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--process", o.process, "process name");
    cmd->add_option("--n", o.n, "number of bins");
    cmd->add_option("--balls", o.balls, "number of balls (stop when W >= balls)");
    cmd->add_option("--rounds", o.rounds, "alias for --balls on single-ball processes");
    cmd->add_option("--reps", o.reps, "repetitions");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--alpha", o.alpha, "lambda potential alpha");
    cmd->add_option("--alpha-phi", o.alpha_phi, "phi potential alpha");
    cmd->add_option("--alpha-tilde", o.alpha_tilde, "v potential alpha (default 1/(12n))");
    cmd->add_option("--eps", o.eps, "quantile band epsilon");
    cmd->add_option("--beta", o.beta, "(1+beta) parameter, rational");
    cmd->add_option("--eta", o.eta, "(1+eta) parameter, rational");
    cmd->add_option("--f", o.f, "thinning threshold offset, rational");
    cmd->add_option("--d", o.d, "d-choice sample count");
    cmd->add_option("--trace", o.trace, "final | every:K | full");
    cmd->add_option("--start", o.start, "empty | half-split:L | b1 | b2");
    cmd->add_option("--out", o.out, "output file path");
    cmd->add_option("--threads", o.threads, "worker threads (default BALLSIM_THREADS or hw)");
    cmd->add_option("--format", o.format, "csv | json | table");
    cmd->add_option("--packing-fill", o.packing_fill,
                    "overshoot (ceil(W/n)+1, the formal rule) | threshold (floor(W/n)+1, "
                    "matches the reported gap tables)");
}

ProcessConfig build_process(const CommonOpts& o, const std::string& name) {
    ProcessConfig cfg;
    cfg.kind = parse_kind(name);
    switch (cfg.kind) {
        case ProcessKind::DChoice: {
            std::string s = name;
            for (auto& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
            cfg.d = s.find("two") != std::string::npos ? 2 : o.d;
            break;
        }
        case ProcessKind::OnePlusBeta: cfg.beta = parse_rat(o.beta); break;
        case ProcessKind::OnePlusEtaMeanThinning: cfg.eta = parse_rat(o.eta); break;
        case ProcessKind::Thinning: cfg.f = parse_rat(o.f); break;
        case ProcessKind::Packing:
            if (o.packing_fill == "threshold") {
                cfg.pack_fill = PackingFill::Threshold;
            } else if (o.packing_fill != "overshoot") {
                throw CLI::ValidationError("--packing-fill", "expected overshoot | threshold");
            }
            break;
        default: break;
    }
    cfg.validate();
    return cfg;
}

ExperimentSpec build_spec(const CommonOpts& o) {
    ExperimentSpec spec;
    spec.process = build_process(o, o.process);
    spec.n = o.n;
    spec.balls = o.balls > 0 ? o.balls : o.rounds;
    spec.reps = o.reps;
    spec.seed = o.seed;
    spec.alpha = o.alpha;
    spec.alpha_phi = o.alpha_phi;
    spec.alpha_tilde = o.alpha_tilde;
    spec.eps = o.eps;
    spec.threads = o.threads;
    spec.out_path = o.out;

    if (o.trace == "final") {
        spec.trace = TraceMode::Final;
    } else if (o.trace == "full") {
        spec.trace = TraceMode::Full;
    } else if (o.trace.rfind("every", 0) == 0) {
        spec.trace = TraceMode::EveryK;
        auto colon = o.trace.find(':');
        if (colon != std::string::npos) spec.trace_k = std::stoll(o.trace.substr(colon + 1));
    } else {
        throw CLI::ValidationError("--trace", "expected final | every:K | full");
    }

    if (o.start == "empty") {
        spec.start = StartKind::Empty;
    } else if (o.start == "b1") {
        spec.start = StartKind::B1;
    } else if (o.start == "b2") {
        spec.start = StartKind::B2;
    } else if (o.start.rfind("half-split", 0) == 0) {
        spec.start = StartKind::HalfSplit;
        auto colon = o.start.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--start", "half-split:L needs a level");
        spec.start_level = std::stoll(o.start.substr(colon + 1));
    } else {
        throw CLI::ValidationError("--start", "expected empty | half-split:L | b1 | b2");
    }
    return spec;
}

int cmd_run(const CommonOpts& o) {
    ExperimentSpec spec = build_spec(o);
    if (spec.trace == TraceMode::Final) spec.trace = TraceMode::EveryK;
    std::string csv = run_trajectory(spec);
    if (spec.out_path.empty()) std::cout << csv;
    return 0;
}

int cmd_gapdist(const CommonOpts& o) {
    ExperimentSpec spec = build_spec(o);
    GapHistogram h = run_gapdist(spec);
    std::string j = gapdist_json(spec, h);
    if (!o.out.empty()) write_file(o.out, j);
    if (o.format == "json") {
        std::cout << j;
    } else if (o.format == "csv") {
        std::cout << "# " << spec.to_json() << "\n" << "gap,count\n";
        for (auto& [g, c] : h.counts) std::cout << g.str() << ',' << c << "\n";
    } else {
        std::cout << spec.process.name() << " n=" << spec.n << " m=" << spec.effective_balls()
                  << " reps=" << h.reps << "\n"
                  << h.table();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f", h.mean());
        std::cout << "mean gap: " << buf << "\n";
    }
    return 0;
}

int cmd_scaling(const CommonOpts& o, const std::vector<std::string>& processes,
                const std::vector<int64_t>& ns, int64_t balls_factor) {
    std::vector<ProcessConfig> cfgs;
    for (const auto& name : processes) cfgs.push_back(build_process(o, name));
    std::vector<int64_t> n_list = ns.empty() ? std::vector<int64_t>{1000, 10000} : ns;
    auto rows = run_scaling(cfgs, n_list, balls_factor, o.reps, o.seed, o.threads);
    std::string csv = scaling_csv(rows, balls_factor, o.seed);
    if (!o.out.empty()) write_file(o.out, csv);
    std::cout << csv;
    return 0;
}

int cmd_verify(const CommonOpts& o, const std::string& suite_name, const VerifyKnobs& knobs) {
    std::vector<SuiteResult> results;
    auto run_one = [&](const std::string& name) {
        if (name == "framework") results.push_back(verify_framework_suite(knobs));
        else if (name == "drift") results.push_back(verify_drift_suite(knobs));
        else if (name == "counterexamples") results.push_back(verify_counterexamples_suite(knobs));
        else if (name == "couplings") results.push_back(verify_couplings_suite(knobs));
        else if (name == "caching2step") results.push_back(verify_caching2step_suite(knobs));
        else throw CLI::ValidationError("--suite", "unknown suite " + name);
    };
    if (suite_name == "all") {
        for (const char* s : {"framework", "drift", "counterexamples", "couplings",
                              "caching2step"})
            run_one(s);
    } else {
        run_one(suite_name);
    }

    bool ok = true;
    json all = json::array();
    for (const auto& res : results) {
        for (const auto& c : res.checks) {
            std::cout << (c.passed ? "PASS" : "FAIL") << " [" << res.suite << "] " << c.name;
            if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
            std::cout << "\n";
        }
        ok = ok && res.ok();
        all.push_back(json::parse(res.to_json()));
    }
    if (!o.out.empty()) write_file(o.out, all.dump(2) + "\n");
    return ok ? 0 : 1;
}

int cmd_oracle(const CommonOpts& o, int64_t m, int64_t samples) {
    ProcessConfig cfg = build_process(o, o.process);
    auto cmp = run_oracle_comparison(cfg, o.n, m, samples, o.seed, o.threads);
    json j;
    j["process"] = cfg.name();
    j["n"] = o.n;
    j["m"] = m;
    j["samples"] = samples;
    json ex = json::array();
    for (auto& [g, p] : cmp.exact.prob)
        ex.push_back({{"gap", g.str()}, {"prob", p.str()}, {"prob_float", p.to_double()}});
    j["exact"] = ex;
    json em = json::array();
    for (auto& [g, c] : cmp.empirical) em.push_back({{"gap", g.str()}, {"count", c}});
    j["empirical"] = em;
    j["tv_distance"] = cmp.tv;
    if (!o.out.empty()) write_file(o.out, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_lowerbound(const CommonOpts& o, double k) {
    ProcessConfig cfg = build_process(o, o.process);
    auto res = run_lowerbound(cfg, o.n, k, o.reps, o.seed, o.threads);
    json j;
    j["process"] = cfg.name();
    j["n"] = o.n;
    j["k"] = k;
    j["rounds"] = res.rounds;
    j["threshold"] = res.threshold;
    j["frequency"] = res.frequency;
    if (!o.out.empty()) write_file(o.out, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"balanced-allocation process simulator and verifier"};
    app.require_subcommand(1);

    CommonOpts o;
    std::vector<std::string> scaling_processes = {"caching", "meanthinning", "packing",
                                                  "twinning"};
    std::vector<int64_t> scaling_ns;
    int64_t balls_factor = 1000;
    std::string suite = "all";
    int64_t oracle_m = 6;
    int64_t oracle_samples = 1000000;
    double lb_k = 0.05;
    VerifyKnobs knobs;

    auto* run = app.add_subcommand("run", "potential trajectory of one seeded run");
    add_common(run, o);

    auto* gapdist = app.add_subcommand("gapdist", "empirical gap distribution");
    add_common(gapdist, o);

    auto* scaling = app.add_subcommand("scaling", "average gap vs n");
    add_common(scaling, o);
    scaling->add_option("--processes", scaling_processes, "process list")->delimiter(',');
    scaling->add_option("--ns", scaling_ns, "bin counts")->delimiter(',');
    scaling->add_option("--balls-factor", balls_factor, "balls = factor * n");

    auto* verify = app.add_subcommand("verify", "framework / drift / coupling verifiers");
    add_common(verify, o);
    verify->add_option("--suite", suite,
                       "framework | drift | counterexamples | couplings | caching2step | all");
    verify->add_option("--states", knobs.drift_states, "random states per drift check");
    verify->add_option("--traces", knobs.framework_traces, "traces per framework check");
    verify->add_option("--grouping-traces", knobs.grouping_traces, "caching grouping traces");
    verify->add_option("--coupling-runs", knobs.coupling_runs, "coupled thinning runs");
    verify->add_option("--cdf-reps", knobs.cdf_reps, "reps for the CDF dominance check");
    verify->add_option("--counterexample-n", knobs.counterexample_n, "n for claims B.1/B.2");
    verify->add_option("--max-n", knobs.majorization_max_n, "majorization check max n");

    auto* oracle = app.add_subcommand("oracle", "exact DP vs Monte-Carlo gap distribution");
    add_common(oracle, o);
    oracle->add_option("--m", oracle_m, "balls (<= 12)");
    oracle->add_option("--samples", oracle_samples, "Monte-Carlo samples");

    auto* lowerbound = app.add_subcommand("lowerbound", "empirical P[Gap(k n log n) >= k log n]");
    add_common(lowerbound, o);
    lowerbound->add_option("--k", lb_k, "constant k");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        knobs.seed = o.seed;
        knobs.threads = o.threads;
        if (run->parsed()) return cmd_run(o);
        if (gapdist->parsed()) return cmd_gapdist(o);
        if (scaling->parsed()) return cmd_scaling(o, scaling_processes, scaling_ns, balls_factor);
        if (verify->parsed()) return cmd_verify(o, suite, knobs);
        if (oracle->parsed()) return cmd_oracle(o, oracle_m, oracle_samples);
        if (lowerbound->parsed()) return cmd_lowerbound(o, lb_k);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
