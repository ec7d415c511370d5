// Command-line front end: gen, run, eval, reproduce.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aohmm/config.hpp"
#include "aohmm/csv_io.hpp"
#include "aohmm/errors.hpp"
#include "aohmm/experiments.hpp"
#include "aohmm/metrics.hpp"
#include "aohmm/online.hpp"

namespace fs = std::filesystem;
using namespace aohmm;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string tau;
    std::optional<int> batch_size;
    bool offline = false;
};

void add_common(CLI::App* cmd, Common& c, bool run_flags) {
    cmd->add_option("--config", c.config, "JSON run configuration");
    cmd->add_option("--seed", c.seed, "seed; all randomness derives from it");
    cmd->add_option("--out", c.out, "output directory");
    if (run_flags) {
        cmd->add_option("--tau", c.tau, "learning-rate mode")->check(CLI::IsMember({"adaptive", "fixed"}));
        cmd->add_option("--batch-size", c.batch_size, "frames per batch")->check(CLI::PositiveNumber);
        cmd->add_flag("--offline", c.offline, "one batch holding the whole stream");
    }
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? parse_config("{}") : load_config(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.synth.seed = *c.seed;
    }
    if (!c.tau.empty()) cfg.adaptive = c.tau == "adaptive";
    if (c.batch_size) cfg.plan.batch_size = *c.batch_size;
    if (c.offline) cfg.plan.offline = true;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec && !fs::is_directory(p)) throw InputError("cannot create output directory " + dir);
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
}

void write_batches(const fs::path& path, const std::vector<BatchDiagnostics>& batches) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out.precision(10);
    out << "batch,frames,mean_loglik,applied_mu,applied_sigma,applied_beta,applied_pi,next_mu,next_sigma,next_beta,"
           "next_pi,accept_beta,accept_pi,active\n";
    for (const auto& b : batches) {
        out << b.batch << ',' << b.frames << ',' << b.mean_log_likelihood << ',' << b.applied.mu << ','
            << b.applied.sigma << ',' << b.applied.beta << ',' << b.applied.pi << ',' << b.next.mu << ','
            << b.next.sigma << ',' << b.next.beta << ',' << b.next.pi << ',' << b.accept_beta << ',' << b.accept_pi
            << ',' << b.active.size() << '\n';
    }
}

void emit_report(const fs::path& dir, const std::vector<int>& decoded, const std::vector<int>& truth,
                 double window_frac) {
    const EvalReport report = evaluate(decoded, truth, window_frac);
    write_text(dir / "report.txt", report.to_key_value());
    write_text(dir / "report.csv", EvalReport::csv_header() + "\n" + report.csv_row() + "\n");
    write_text(dir / "strip.svg", render_strip(decoded, truth, report.matching));
    std::cout << report.to_key_value();
}

int cmd_gen(const Common& c) {
    const RunConfig cfg = resolve(c);
    const fs::path dir = out_dir(c.out);
    Rng rng(cfg.seed);
    const LabeledSequence seq = generate_regime(cfg.regime, cfg.synth, rng);
    write_features((dir / "features.csv").string(), seq.features);
    write_labels((dir / "labels.csv").string(), *seq.labels);
    std::cout << "wrote " << seq.length() << " frames to " << dir.string() << "\n";
    return 0;
}

int cmd_run(const Common& c, const std::vector<std::string>& boot_features, const std::vector<std::string>& boot_labels,
            const std::string& stream_path, const std::string& truth_path, bool trace) {
    if (boot_features.size() != boot_labels.size()) {
        throw ParameterError("each --bootstrap needs a matching --bootstrap-labels");
    }
    const RunConfig cfg = resolve(c);
    const fs::path dir = out_dir(c.out);
    std::vector<LabeledSequence> bootstrap;
    for (std::size_t i = 0; i < boot_features.size(); ++i) {
        bootstrap.push_back(read_sequence(boot_features[i], boot_labels[i]));
    }
    RunOptions options = cfg.run_options();
    std::ofstream trace_out;
    if (trace) {
        trace_out.open(dir / "trace.csv");
        if (!trace_out) throw InputError("cannot write trace file");
        trace_out.precision(10);
        options.trace = &trace_out;
    }
    CsvStream stream(stream_path);
    Rng rng(cfg.seed);
    const RunResult result = run_online(bootstrap, stream, options, cfg.hyper, rng, cfg.rate_priors());

    write_labels((dir / "decoded.csv").string(), result.labels);
    write_batches(dir / "diagnostics.csv", result.batches);
    write_text(dir / "snapshot.bin", result.snapshot);
    std::cout << "decoded " << result.labels.size() << " frames in " << result.batches.size() << " batches\n";
    if (!truth_path.empty()) emit_report(dir, result.labels, read_labels(truth_path), cfg.window_frac);
    return 0;
}

int cmd_eval(const Common& c, const std::string& decoded_path, const std::string& truth_path) {
    const RunConfig cfg = resolve(c);
    const fs::path dir = out_dir(c.out);
    emit_report(dir, read_labels(decoded_path), read_labels(truth_path), cfg.window_frac);
    return 0;
}

int cmd_reproduce(const Common& c, const std::string& name, std::string mode, const std::vector<std::uint64_t>& seeds) {
    const ExperimentSpec spec = experiment_by_name(name);
    RunConfig cfg = resolve(c);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (mode.empty()) mode = c.tau.empty() ? "both" : (c.tau == "adaptive" ? "ada" : "fixed");
    std::vector<bool> modes;
    if (mode == "ada" || mode == "both") modes.push_back(true);
    if (mode == "fixed" || mode == "both") modes.push_back(false);

    const fs::path dir = out_dir(c.out);
    std::string table = experiment_csv_header() + "\n";
    std::string folds = "experiment,tau,seed,fold," + EvalReport::csv_header() + ",new_states,new_state_retained\n";
    for (bool adaptive : modes) {
        const ExperimentResult r = run_experiment(spec, adaptive, cfg);
        table += experiment_csv_row(r) + "\n";
        for (const auto& s : r.seeds) {
            for (const auto& f : s.folds) {
                folds += spec.name + ',' + (adaptive ? "ada" : "fixed") + ',' + std::to_string(s.seed) + ',' +
                         std::to_string(f.fold) + ',' + f.report.csv_row() + ',' + std::to_string(f.new_states) + ',' +
                         (f.new_state_retained ? "1" : "0") + "\n";
            }
        }
        std::cout << experiment_csv_row(r) << "\n";
    }
    write_text(dir / (spec.name + ".csv"), table);
    write_text(dir / (spec.name + "_folds.csv"), folds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive online sticky HDP-HMM"};
    app.require_subcommand(1);

    Common gen_opts, run_opts, eval_opts, rep_opts;

    auto* gen = app.add_subcommand("gen", "generate a synthetic sequence");
    add_common(gen, gen_opts, false);

    auto* run = app.add_subcommand("run", "bootstrap and stream a sequence");
    add_common(run, run_opts, true);
    std::vector<std::string> boot_features, boot_labels;
    std::string stream_path, run_truth;
    bool trace = false;
    run->add_option("--bootstrap", boot_features, "labeled bootstrap feature CSV")->required()->check(CLI::ExistingFile);
    run->add_option("--bootstrap-labels", boot_labels, "labels for each --bootstrap")->required()->check(CLI::ExistingFile);
    run->add_option("--stream", stream_path, "feature CSV to stream")->required()->check(CLI::ExistingFile);
    run->add_option("--truth", run_truth, "optional truth labels; emits a report")->check(CLI::ExistingFile);
    run->add_flag("--trace", trace, "write the per-sweep trace CSV");

    auto* eval = app.add_subcommand("eval", "score decoded labels against truth");
    add_common(eval, eval_opts, false);
    std::string decoded_path, truth_path;
    eval->add_option("--decoded", decoded_path, "decoded label CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", truth_path, "truth label CSV")->required()->check(CLI::ExistingFile);

    auto* rep = app.add_subcommand("reproduce", "run a synthetic experiment over seeds");
    add_common(rep, rep_opts, true);
    std::string experiment, mode;
    std::vector<std::uint64_t> seeds;
    rep->add_option("experiment", experiment, "stationary-noiseless|stationary-noisy|shifting|newclass|combined")
        ->required();
    rep->add_option("mode", mode, "ada|fixed|both")->check(CLI::IsMember({"ada", "fixed", "both"}));
    rep->add_option("--seeds", seeds, "seed list (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) return cmd_gen(gen_opts);
        if (*run) return cmd_run(run_opts, boot_features, boot_labels, stream_path, run_truth, trace);
        if (*eval) return cmd_eval(eval_opts, decoded_path, truth_path);
        if (*rep) {
            try {
                experiment_by_name(experiment);
            } catch (const ParameterError& e) {
                std::cerr << "usage error: " << e.what() << "\n" << rep->help();
                return 2;
            }
            return cmd_reproduce(rep_opts, experiment, mode, seeds);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
