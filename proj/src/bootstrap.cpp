#include <string>

#include "aohmm/errors.hpp"
#include "aohmm/gibbs.hpp"
#include "aohmm/model_state.hpp"

namespace aohmm {

ModelState init_from_bootstrap(const std::vector<LabeledSequence>& seqs, const HdpHyperparams& hyper, int iters,
                               Rng& rng, const LearningRates& rate_priors,
                               BasePrior base_prior) {
    hyper.validate();
    if (seqs.empty()) throw InputError("bootstrap is empty");
    if (iters < 1) throw ParameterError("bootstrap needs at least one iteration");
    const int d = seqs.front().dim();
    Eigen::Index total = 0;
    for (const auto& s : seqs) {
        if (!s.labels) throw InputError("bootstrap sequences must be labeled");
        if (static_cast<int>(s.labels->size()) != s.length()) throw InputError("label count differs from frame count");
        if (s.dim() != d) throw InputError("bootstrap sequences disagree on feature dimension");
        total += s.length();
    }
    if (total == 0) throw InputError("bootstrap has no frames");

    Matrix features(total, d);
    std::vector<int> z;
    std::vector<int> starts;
    z.reserve(static_cast<std::size_t>(total));
    for (const auto& s : seqs) {
        if (s.length() == 0) continue;
        starts.push_back(static_cast<int>(z.size()));
        features.middleRows(static_cast<Eigen::Index>(z.size()), s.length()) = s.features;
        for (int label : *s.labels) {
            if (label < 1 || label > hyper.truncation) {
                throw InputError("bootstrap label " + std::to_string(label) + " outside 1.." +
                                 std::to_string(hyper.truncation));
            }
            z.push_back(label - 1);
        }
    }

    ModelState state = make_initial_state(hyper, base_prior_from_data(seqs, base_prior), rng);
    state.rates = rate_priors;
    state.rates.applied = rate_priors.prior_means();
    state.rates.sampled = state.rates.applied;

    const RateValues& r = state.rates.applied;
    set_assignment(state, features, z, starts);
    for (int it = 0; it < iters; ++it) {
        const AuxCounts aux = sample_aux_counts(state, rng);
        state.transitions.tables = aux.tables;
        state.transitions.overrides = aux.overrides;
        state.transitions.beta = sample_beta(state, aux, r.beta, rng);
        for (int j = 0; j < state.truncation(); ++j) {
            state.transitions.pi.row(j) = sample_pi_row(state, j, r.pi, rng).transpose();
        }
        sample_emissions(state, features, z, r.mu, r.sigma, rng);
    }
    return state;
}

}  // namespace aohmm
