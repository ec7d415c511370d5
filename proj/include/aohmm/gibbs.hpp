#pragma once

#include <vector>

#include "aohmm/model_state.hpp"

namespace aohmm {

struct SamplerOptions {
    bool adapt_rates = true;  // false: all rates pinned at 1 and their samplers skipped
    PsiScale psi_scale = PsiScale::LargestEigenvalue;
    MuStatistic mu_statistic = MuStatistic::BatchMean;
};

struct AuxCounts {
    Eigen::MatrixXi tables;     // m_jk
    Eigen::VectorXi overrides;  // w_j
    Vector adjusted_columns;    // sum_j m_bar_jk, with m_bar_jj = m_jj - w_j
};

struct SweepResult {
    std::vector<int> z;  // 0-based slot per frame
    double log_likelihood = 0.0;
    bool accepted_beta = false;
    bool accepted_pi = false;
};

// Per-slot sufficient statistics of an assignment.
struct EmissionStats {
    std::vector<double> count;
    std::vector<Vector> sum;
    std::vector<Matrix> scatter;  // centred: sum (y - ybar)(y - ybar)'

    static EmissionStats collect(const Matrix& features, const std::vector<int>& z, int truncation);
    Vector mean(int k) const { return sum[k] / count[k]; }
};

// T x L matrix of log N(y_t | theta_k).
Matrix emission_log_likelihoods(const ModelState& state, const Matrix& features);

// Blocked forward-filter backward-sample of z with initial distribution beta.
std::vector<int> sample_states(const ModelState& state, const Matrix& features, Rng& rng);

// Refreshes counts n and occupancies from an assignment.
void set_assignment(ModelState& state, const Matrix& features, const std::vector<int>& z,
                    const std::vector<int>& starts = {0});

AuxCounts sample_aux_counts(const ModelState& state, Rng& rng);

// Unscaled concentrations of the conditional Dirichlets.
Vector beta_concentration(const ModelState& state, const AuxCounts& aux);
Vector pi_row_concentration(const ModelState& state, int row);

Vector sample_beta(const ModelState& state, const AuxCounts& aux, double tau_beta, Rng& rng);
Vector sample_pi_row(const ModelState& state, int row, double tau_pi, Rng& rng);

// Prior actually used for slot k this batch: the tau-scaled propagated prior
// for seeded slots, the base measure otherwise.
NiwParams effective_prior(const ModelState& state, int k, double tau_mu, double tau_sigma, long* clamps = nullptr);

// Conjugate NIW update per slot followed by a (mu_k, Sigma_k) draw. Slots
// without frames are redrawn from their effective prior.
void sample_emissions(ModelState& state, const Matrix& features, const std::vector<int>& z, double tau_mu,
                      double tau_sigma, Rng& rng);

// Recomputes posteriors under an assignment without drawing theta.
void update_posteriors(ModelState& state, const Matrix& features, const std::vector<int>& z);

// Rows whose pi_j enters the tau_pi likelihood: active or seeded states.
std::vector<int> informative_rows(const ModelState& state);

// Samples tau_Sigma, tau_mu, tau_beta and tau_pi into state.rates.sampled.
void update_learning_rates(ModelState& state, const AuxCounts& aux, const SamplerOptions& options, Rng& rng,
                           SweepResult& result);

// log p(Y, z | theta, pi, beta).
double joint_log_likelihood(const ModelState& state, const Matrix& features, const std::vector<int>& z);

// sample_states -> counts -> aux counts -> beta -> pi rows -> emissions -> rates.
// An empty batch leaves the state untouched.
SweepResult gibbs_sweep(ModelState& state, const Matrix& features, Rng& rng, const SamplerOptions& options = {});

}  // namespace aohmm
