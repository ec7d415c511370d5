#pragma once

#include <optional>
#include <vector>

#include "aohmm/model_state.hpp"

namespace aohmm {

struct NewClassSpec {
    Vector mean = Vector::Constant(1, 600.0);
    // Frame at which the class first appears. Unset: a uniformly chosen
    // segment boundary in the middle third of the sequence.
    std::optional<int> onset;
};

struct SynthConfig {
    std::vector<Vector> means = default_means();
    double sigma = 1.0;                  // isotropic emission standard deviation
    double transition_concentration = 3.0;
    int length = 100;
    double drift = 0.0;                  // added to every mean per frame
    std::optional<NewClassSpec> new_class;
    // Fixed row-stochastic matrix over all generated classes; drawn from
    // Dir(transition_concentration) per sequence when unset.
    std::optional<Matrix> transitions;
    std::uint64_t seed = 1;

    static std::vector<Vector> default_means();  // {100, 200, 300, 400, 500}
    int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
    int states() const { return static_cast<int>(means.size()); }
    void validate() const;
};

// The regime-specific generators below share one core; a disabled feature
// consumes no randomness, so e.g. gen_shifting with drift 0 reproduces
// gen_stationary draw for draw.
LabeledSequence generate(const SynthConfig& cfg, Rng& rng);

LabeledSequence gen_stationary(SynthConfig cfg, Rng& rng);  // drift and new class ignored
LabeledSequence gen_shifting(SynthConfig cfg, Rng& rng);    // new class ignored
LabeledSequence gen_newclass(SynthConfig cfg, Rng& rng);    // drift ignored
LabeledSequence gen_combined(const SynthConfig& cfg, Rng& rng);

// Row-wise Dir(c * 1) transition matrix of size k.
Matrix draw_transition_matrix(int k, double concentration, Rng& rng);

}  // namespace aohmm
