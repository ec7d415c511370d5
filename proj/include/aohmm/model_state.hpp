#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aohmm/distributions.hpp"
#include "aohmm/learning_rate.hpp"
#include "aohmm/rng.hpp"

namespace aohmm {

struct HdpHyperparams {
    double gamma = 1.0;  // top-level concentration
    double alpha = 5.0;  // lower-level concentration
    double kappa = 1.0;  // sticky self-transition mass
    int truncation = 20; // weak-limit L

    void validate() const;
};

// One of the L weak-limit slots.
struct EmissionSlot {
    Vector mean;          // mu_k
    Matrix cov;           // Sigma_k
    NiwParams prior;      // unscaled prior for the current batch
    NiwParams posterior;  // conjugate posterior under the most recent assignment
    double occupancy = 0; // frames assigned to k in the most recent assignment
    bool seeded = false;  // prior holds a propagated posterior rather than the base measure
};

struct EmissionState {
    NiwParams base;  // H, used for every slot that has never been observed
    std::vector<EmissionSlot> slots;

    int dim() const { return base.dim(); }
    int size() const { return static_cast<int>(slots.size()); }
};

struct TransitionState {
    Vector beta;            // global weights
    Matrix pi;              // row-stochastic L x L
    Eigen::MatrixXi counts; // n_jk for the current batch
    Eigen::MatrixXi tables; // m_jk
    Eigen::VectorXi overrides;  // sticky override counts w_j
    Vector beta_pseudo;     // absorbed table counts from earlier batches
    Matrix pi_pseudo;       // absorbed transition counts from earlier batches
};

struct ModelState {
    HdpHyperparams hyper;
    EmissionState emissions;
    TransitionState transitions;
    LearningRates rates;
    long batch_index = 0;

    int truncation() const { return hyper.truncation; }
    int dim() const { return emissions.dim(); }

    // Bytes held by the model's containers; independent of stream length.
    std::size_t footprint_bytes() const;
};

// Feature rows with optional 1-based ground-truth labels.
struct LabeledSequence {
    Matrix features;  // T x d
    std::optional<std::vector<int>> labels;

    int length() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

enum class BasePrior {
    // scale from the pooled within-class covariance W, strength tr(W) / tr(C)
    // with C the global covariance, so drawn means spread like the data
    Pooled,
    // scale from C, strength 1
    Global,
};

// Base measure H from bootstrap features: mean = global mean, dof = d + 2,
// scale = 0.75 * S * (dof - d - 1) where S is W or C as chosen above.
// Pooled falls back to Global when labels are missing or no class has two frames.
NiwParams base_prior_from_data(const std::vector<LabeledSequence>& seqs, BasePrior mode = BasePrior::Pooled);

// Slots drawn from the base measure, beta by stick-breaking, pi rows from
// Dir(alpha beta + kappa e_j). No data attached.
ModelState make_initial_state(const HdpHyperparams& hyper, const NiwParams& base, Rng& rng);

// Supervised warm start: labels are clamped and theta, pi, beta are
// Gibbs-sampled for `iters` iterations with the rates at their prior means.
// Leaves counts, tables, occupancies and posteriors populated from the labels.
ModelState init_from_bootstrap(const std::vector<LabeledSequence>& seqs, const HdpHyperparams& hyper, int iters,
                               Rng& rng, const LearningRates& rate_priors = {},
                               BasePrior base_prior = BasePrior::Pooled);

// 1-based ids of states with nonzero occupancy in the most recent assignment.
std::set<int> active_states(const ModelState& state);

// Versioned binary snapshot; restore throws LoadError on bad input.
std::string snapshot(const ModelState& state);
ModelState restore(const std::string& blob);

// Counts n_jk of an assignment made of one or more sequences. `starts` holds
// the first frame of each sequence; transitions across starts are skipped.
Eigen::MatrixXi transition_counts(const std::vector<int>& z, const std::vector<int>& starts, int truncation);

}  // namespace aohmm
