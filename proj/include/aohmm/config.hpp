#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aohmm/online.hpp"
#include "aohmm/synth.hpp"

namespace aohmm {

enum class Regime { Stationary, Shifting, NewClass, Combined };

struct RunConfig {
    HdpHyperparams hyper;
    BatchPlan plan;
    bool adaptive = true;
    PsiScale psi_scale = PsiScale::LargestEigenvalue;
    MuStatistic mu_statistic = MuStatistic::BatchMean;
    BasePrior base_prior = BasePrior::Pooled;
    GammaDist prior_mu{2.0, 2.0};
    GammaDist prior_beta{2.0, 2.0};
    GammaDist prior_pi{2.0, 2.0};
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int threads = 0;  // 0: hardware concurrency
    double window_frac = 0.10;
    Regime regime = Regime::Stationary;
    SynthConfig synth;

    LearningRates rate_priors() const;
    SamplerOptions sampler() const;
    RunOptions run_options() const;
    void validate() const;
};

// Strict JSON: unknown keys and wrong types throw ParameterError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& cfg);

Regime parse_regime(const std::string& name);
std::string regime_name(Regime r);

LabeledSequence generate_regime(Regime regime, const SynthConfig& cfg, Rng& rng);

}  // namespace aohmm
