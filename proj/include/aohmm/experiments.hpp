#pragma once

#include <string>
#include <vector>

#include "aohmm/config.hpp"
#include "aohmm/metrics.hpp"

namespace aohmm {

struct ExperimentSpec {
    std::string name;
    Regime regime = Regime::Stationary;
    double sigma = 1.0;
    double drift = 0.0;
};

// stationary-noiseless, stationary-noisy, shifting, newclass, combined.
// Unknown names throw ParameterError.
ExperimentSpec experiment_by_name(const std::string& name);
std::vector<std::string> experiment_names();

struct FoldOutcome {
    int fold = 0;
    EvalReport report;
    std::vector<int> decoded;
    std::vector<int> truth;
    // Exactly one label outside the bootstrap classes was used, and every
    // batch containing new-class frames gave that label to most of them.
    bool new_state_retained = false;
    int new_states = 0;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<FoldOutcome> folds;
    double accuracy = 0.0;  // fold means
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double abs_cardinality = 0.0;
    bool cardinality_zero = false;     // every fold
    bool new_state_retained = false;   // every fold
};

struct ExperimentResult {
    ExperimentSpec spec;
    bool adaptive = true;
    std::vector<SeedOutcome> seeds;
    double accuracy = 0.0;  // seed means
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double abs_cardinality = 0.0;

    int seeds_with_zero_cardinality() const;
    int seeds_with_retained_new_state() const;
};

// Leave-one-out over three sequences per seed: the model is bootstrapped on two
// stationary sequences and streamed the regime version of the third. The
// configuration supplies hyperparameters, batch plan, rate priors and the base
// synthetic settings; `adaptive` overrides its tau mode.
ExperimentResult run_experiment(const ExperimentSpec& spec, bool adaptive, const RunConfig& cfg);

// Table-style CSV: experiment,tau,accuracy,recall,precision,f1,cardinality.
std::string experiment_csv_header();
std::string experiment_csv_row(const ExperimentResult& r);

}  // namespace aohmm
