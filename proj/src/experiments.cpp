#include "aohmm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <set>
#include <thread>

#include "aohmm/errors.hpp"

namespace aohmm {

namespace {

constexpr int kFolds = 3;

}  // namespace

std::vector<std::string> experiment_names() {
    return {"stationary-noiseless", "stationary-noisy", "shifting", "newclass", "combined"};
}

ExperimentSpec experiment_by_name(const std::string& name) {
    if (name == "stationary-noiseless") return {name, Regime::Stationary, 1.0, 0.0};
    if (name == "stationary-noisy") return {name, Regime::Stationary, 50.0, 0.0};
    if (name == "shifting") return {name, Regime::Shifting, 10.0, 0.5};
    if (name == "newclass") return {name, Regime::NewClass, 10.0, 0.0};
    if (name == "combined") return {name, Regime::Combined, 10.0, 0.5};
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : "|") + n;
    throw ParameterError("unknown experiment '" + name + "' (" + known + ")");
}

namespace {

bool check_new_state(const std::vector<int>& decoded, const std::vector<int>& truth, int known_classes,
                     int batch_size, int* new_states) {
    std::set<int> fresh;
    for (int d : decoded) {
        if (d > known_classes) fresh.insert(d);
    }
    *new_states = static_cast<int>(fresh.size());
    if (fresh.size() != 1) return false;
    const int label = *fresh.begin();
    bool seen = false;
    for (std::size_t start = 0; start < truth.size(); start += batch_size) {
        const std::size_t end = std::min(truth.size(), start + batch_size);
        std::map<int, int> votes;
        for (std::size_t t = start; t < end; ++t) {
            if (truth[t] > known_classes) ++votes[decoded[t]];
        }
        if (votes.empty()) continue;
        seen = true;
        const auto top = std::max_element(votes.begin(), votes.end(),
                                          [](const auto& a, const auto& b) { return a.second < b.second; });
        if (top->first != label) return false;
    }
    return seen;
}

FoldOutcome run_fold(const ExperimentSpec& spec, bool adaptive, const RunConfig& cfg, std::uint64_t seed, int fold) {
    SynthConfig base = cfg.synth;
    base.sigma = spec.sigma;
    base.drift = spec.drift;
    if ((spec.regime == Regime::NewClass || spec.regime == Regime::Combined) && !base.new_class) {
        base.new_class = NewClassSpec{};
    }

    // The stationary sequences of a seed come from one HMM; an evolutionary
    // test sequence draws its own transition matrix.
    SynthConfig stationary = base;
    {
        Rng rng(mix_seed(seed, 99));
        stationary.transitions = draw_transition_matrix(base.states(), base.transition_concentration, rng);
    }
    std::vector<LabeledSequence> bootstrap;
    LabeledSequence test;
    for (int f = 0; f < kFolds; ++f) {
        Rng rng(mix_seed(seed, 100 + f));
        if (f != fold) {
            bootstrap.push_back(gen_stationary(stationary, rng));
        } else if (spec.regime == Regime::Stationary) {
            test = gen_stationary(stationary, rng);
        } else {
            test = generate_regime(spec.regime, base, rng);
        }
    }

    RunConfig run = cfg;
    run.adaptive = adaptive;
    RunOptions options = run.run_options();
    Rng rng(mix_seed(seed, 200 + fold));
    MatrixStream stream(test.features);
    const RunResult result = run_online(bootstrap, stream, options, cfg.hyper, rng, cfg.rate_priors());

    FoldOutcome out;
    out.fold = fold;
    out.decoded = result.labels;
    out.truth = *test.labels;
    out.report = evaluate(out.decoded, out.truth, cfg.window_frac);
    if (base.new_class) {
        const int batch = cfg.plan.offline ? test.length() : cfg.plan.batch_size;
        out.new_state_retained = check_new_state(out.decoded, out.truth, base.states(), batch, &out.new_states);
    }
    return out;
}

}  // namespace

int ExperimentResult::seeds_with_zero_cardinality() const {
    return static_cast<int>(std::count_if(seeds.begin(), seeds.end(), [](const auto& s) { return s.cardinality_zero; }));
}

int ExperimentResult::seeds_with_retained_new_state() const {
    return static_cast<int>(
        std::count_if(seeds.begin(), seeds.end(), [](const auto& s) { return s.new_state_retained; }));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, bool adaptive, const RunConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.spec = spec;
    result.adaptive = adaptive;

    struct Job {
        std::size_t seed_index;
        int fold;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        for (int f = 0; f < kFolds; ++f) jobs.push_back({s, f});
    }
    std::vector<FoldOutcome> outcomes(jobs.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw;

    // Each job owns its data and rng, so the schedule does not affect results.
    std::size_t next = 0;
    while (next < jobs.size()) {
        std::vector<std::future<FoldOutcome>> running;
        const std::size_t end = std::min(jobs.size(), next + workers);
        for (std::size_t i = next; i < end; ++i) {
            running.push_back(std::async(std::launch::async, run_fold, std::cref(spec), adaptive, std::cref(cfg),
                                         cfg.seeds[jobs[i].seed_index], jobs[i].fold));
        }
        for (std::size_t i = next; i < end; ++i) outcomes[i] = running[i - next].get();
        next = end;
    }

    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        SeedOutcome so;
        so.seed = cfg.seeds[s];
        so.cardinality_zero = true;
        so.new_state_retained = true;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].seed_index != s) continue;
            const FoldOutcome& f = outcomes[i];
            so.accuracy += f.report.frame_accuracy / kFolds;
            so.precision += f.report.boundary_precision / kFolds;
            so.recall += f.report.boundary_recall / kFolds;
            so.f1 += f.report.f1 / kFolds;
            so.abs_cardinality += std::abs(f.report.cardinality_error) / static_cast<double>(kFolds);
            so.cardinality_zero = so.cardinality_zero && f.report.cardinality_error == 0;
            so.new_state_retained = so.new_state_retained && f.new_state_retained;
            so.folds.push_back(f);
        }
        const double n = static_cast<double>(cfg.seeds.size());
        result.accuracy += so.accuracy / n;
        result.precision += so.precision / n;
        result.recall += so.recall / n;
        result.f1 += so.f1 / n;
        result.abs_cardinality += so.abs_cardinality / n;
        result.seeds.push_back(std::move(so));
    }
    return result;
}

std::string experiment_csv_header() { return "experiment,tau,accuracy,recall,precision,f1,cardinality"; }

std::string experiment_csv_row(const ExperimentResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.4f,%.4f,%.4f,%.4f", r.spec.name.c_str(),
                  r.adaptive ? "ada" : "fixed", r.accuracy, r.recall, r.precision, r.f1, r.abs_cardinality);
    return buf;
}

}  // namespace aohmm
