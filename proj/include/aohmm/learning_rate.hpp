#pragma once

#include <optional>
#include <vector>

#include "aohmm/distributions.hpp"

namespace aohmm {

struct EmissionState;

// The four learning rates. `applied` scales the priors of the batch being
// processed; `sampled` is the current value of each rate's own chain, whose
// post-burn-in mean becomes the next batch's `applied`.
struct RateValues {
    double mu = 1.0;
    double sigma = 1.0;
    double beta = 1.0;
    double pi = 1.0;

    bool operator==(const RateValues&) const = default;
};

enum class PsiScale { LargestEigenvalue, Determinant };

// Location compared with the prior mean in the tau_mu update.
enum class MuStatistic {
    BatchMean,    // mean of the frames assigned to the state in this sweep
    SampledMean,  // current draw mu_k
    DebiasedBatchMean,  // BatchMean with the frame-average sampling spread removed
};

struct LearningRates {
    RateValues applied;
    RateValues sampled;
    GammaDist prior_mu{2.0, 2.0};
    GammaDist prior_beta{2.0, 2.0};
    GammaDist prior_pi{2.0, 2.0};
    long accepted_beta = 0;
    long proposed_beta = 0;
    long accepted_pi = 0;
    long proposed_pi = 0;
    long dof_clamps = 0;

    // Prior means for mu/beta/pi; tau_Sigma has no prior and starts at 1.
    RateValues prior_means() const { return {prior_mu.mean(), 1.0, prior_beta.mean(), prior_pi.mean()}; }
};

// Smallest Dirichlet concentration allowed after tau-scaling.
inline constexpr double kConcentrationFloor = 1e-6;
// Dof margin above d - 1 used when tau-scaling pushes the IW dof out of range;
// Psi is shrunk with it so the IW mode is kept.
inline constexpr double kDofMargin = 1e-3;
// Ceiling on the scaled IW dof. Above it Psi and nu are shrunk together so
// the IW mode is preserved and repeated large tau_Sigma cannot overflow.
inline constexpr double kMaxDof = 1e12;

// Prior raised to the power tau, re-expressed in standard form:
// (mu0, tau_mu * sigma, tau_Sigma * Psi, tau_Sigma (nu + d + 1) - d - 1).
// `clamps` (optional) is incremented whenever the dof had to be clamped.
NiwParams scale_niw_prior(const NiwParams& prior, double tau_mu, double tau_sigma, long* clamps = nullptr);

// Dir(a)^tau = Dir(tau (a - 1) + 1), floored at kConcentrationFloor when tau != 1.
double scale_concentration(double a, double tau);
Vector scale_concentration(const Vector& a, double tau);

// IG(alpha*, beta*) for tau_Sigma from the posterior NIW scales of the active
// states: alpha* = sum nu_k / (2K), beta* = sum f(Psi_k) nu_k / (2 sum nu_k).
// Empty when no state is active.
std::optional<InvGamma> tau_sigma_posterior(const EmissionState& emissions, PsiScale scale = PsiScale::LargestEigenvalue);
double sample_tau_sigma(const EmissionState& emissions, double current, Rng& rng,
                        PsiScale scale = PsiScale::LargestEigenvalue);

// Gamma(alpha + 1/2, beta + sum_k sigma_k q_k nu_k / (2 sum nu_k)) with
// q_k = (a_k - mu0_k)' Sigma_k^-1 (a_k - mu0_k), a_k chosen by `statistic`.
// Empty when no state is active.
std::optional<GammaDist> tau_mu_posterior(const EmissionState& emissions, const GammaDist& prior,
                                          MuStatistic statistic = MuStatistic::BatchMean);
double sample_tau_mu(const EmissionState& emissions, const GammaDist& prior, double current, Rng& rng,
                     MuStatistic statistic = MuStatistic::BatchMean);

// log of prod_i Dir(x_i | scale(a_i, tau)).
double tau_dirichlet_log_target(double tau, const std::vector<Vector>& concentrations,
                                const std::vector<Vector>& observations);

// One independence Metropolis-Hastings step with the Gamma prior as proposal,
// so the proposal and prior terms cancel and only the Dirichlet ratio remains.
double sample_tau_dirichlet(double current, const std::vector<Vector>& concentrations,
                            const std::vector<Vector>& observations, const GammaDist& prior, Rng& rng,
                            bool* accepted = nullptr);

double psi_scale_value(const Matrix& psi, PsiScale scale);

}  // namespace aohmm
