#include "aohmm/learning_rate.hpp"

#include <algorithm>
#include <cmath>

#include "aohmm/errors.hpp"
#include "aohmm/model_state.hpp"

namespace aohmm {

NiwParams scale_niw_prior(const NiwParams& prior, double tau_mu, double tau_sigma, long* clamps) {
    if (!(tau_mu > 0.0) || !(tau_sigma > 0.0)) throw ParameterError("learning rates must be positive");
    NiwParams out = prior;
    const double d = prior.dim();
    out.strength = tau_mu * prior.strength;
    out.scale = tau_sigma * prior.scale;
    // tau (nu + d + 1) - d - 1, written so that tau = 1 returns nu bit for bit.
    double dof = tau_sigma * prior.dof + (tau_sigma - 1.0) * (d + 1.0);
    if (!(dof > d - 1.0)) {
        // keep the mode Psi / (nu + d + 1) through the clamp
        out.scale *= (2.0 * d + kDofMargin) / (dof + d + 1.0);
        dof = d - 1.0 + kDofMargin;
        if (clamps) ++*clamps;
    }
    if (dof > kMaxDof && tau_sigma > 1.0) {
        out.scale *= (kMaxDof + d + 1.0) / (dof + d + 1.0);
        dof = kMaxDof;
    }
    out.dof = dof;
    return out;
}

double scale_concentration(double a, double tau) {
    // tau (a - 1) + 1. tau = 1 leaves even sub-floor concentrations alone.
    if (tau == 1.0) return a;
    const double scaled = tau * a + (1.0 - tau);
    return scaled > kConcentrationFloor ? scaled : kConcentrationFloor;
}

Vector scale_concentration(const Vector& a, double tau) {
    Vector out(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out[i] = scale_concentration(a[i], tau);
    return out;
}

double psi_scale_value(const Matrix& psi, PsiScale scale) {
    if (scale == PsiScale::Determinant) return psi.determinant();
    if (psi.rows() == 1) return psi(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(psi, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

std::optional<InvGamma> tau_sigma_posterior(const EmissionState& emissions, PsiScale scale) {
    double dof_sum = 0.0;
    double weighted = 0.0;
    int active = 0;
    for (const auto& slot : emissions.slots) {
        if (slot.occupancy <= 0.0) continue;
        ++active;
        dof_sum += slot.posterior.dof;
        weighted += psi_scale_value(slot.posterior.scale, scale) * slot.posterior.dof;
    }
    if (active == 0 || !(dof_sum > 0.0)) return std::nullopt;
    return InvGamma{dof_sum / (2.0 * active), weighted / (2.0 * dof_sum)};
}

double sample_tau_sigma(const EmissionState& emissions, double current, Rng& rng, PsiScale scale) {
    const auto post = tau_sigma_posterior(emissions, scale);
    if (!post || !(post->shape > 0.0) || !(post->scale > 0.0)) return current;
    const double draw = sample(*post, rng);
    return std::isfinite(draw) && draw > 0.0 ? draw : current;
}

std::optional<GammaDist> tau_mu_posterior(const EmissionState& emissions, const GammaDist& prior,
                                          MuStatistic statistic) {
    double dof_sum = 0.0;
    double weighted = 0.0;
    int active = 0;
    for (const auto& slot : emissions.slots) {
        const double n = slot.occupancy;
        if (n <= 0.0) continue;
        ++active;
        Vector location = slot.mean;
        if (statistic != MuStatistic::SampledMean) {
            // Undo the conjugate mean update to recover the frame average.
            const Vector& m0 = slot.seeded ? slot.prior.mean : emissions.base.mean;
            const double prior_strength = slot.posterior.strength - n;
            location = (slot.posterior.strength * slot.posterior.mean - prior_strength * m0) / n;
        }
        const Vector diff = location - slot.prior.mean;
        const Matrix chol = spd_cholesky(slot.cov);
        double quad = chol.triangularView<Eigen::Lower>().solve(diff).squaredNorm();
        // A frame average scatters by cov/n around the true mean on its own.
        if (statistic == MuStatistic::DebiasedBatchMean) quad -= static_cast<double>(diff.size()) / n;
        dof_sum += slot.posterior.dof;
        weighted += slot.prior.strength * quad * slot.posterior.dof;
    }
    if (active == 0 || !(dof_sum > 0.0)) return std::nullopt;
    return GammaDist{prior.shape + 0.5, prior.rate + std::max(0.0, weighted) / (2.0 * dof_sum)};
}

double sample_tau_mu(const EmissionState& emissions, const GammaDist& prior, double current, Rng& rng,
                     MuStatistic statistic) {
    const auto post = tau_mu_posterior(emissions, prior, statistic);
    if (!post) return current;
    const double draw = sample(*post, rng);
    return std::isfinite(draw) && draw > 0.0 ? draw : current;
}

double tau_dirichlet_log_target(double tau, const std::vector<Vector>& concentrations,
                                const std::vector<Vector>& observations) {
    double out = 0.0;
    for (std::size_t i = 0; i < concentrations.size(); ++i) {
        out += log_density(DirichletDist{scale_concentration(concentrations[i], tau)}, observations[i]);
    }
    return out;
}

double sample_tau_dirichlet(double current, const std::vector<Vector>& concentrations,
                            const std::vector<Vector>& observations, const GammaDist& prior, Rng& rng,
                            bool* accepted) {
    if (concentrations.size() != observations.size()) throw ParameterError("MH target/observation mismatch");
    const double proposal = sample(prior, rng);
    const double u = rng.uniform();
    bool take = false;
    if (std::isfinite(proposal) && proposal > 0.0) {
        const double log_ratio = tau_dirichlet_log_target(proposal, concentrations, observations) -
                                 tau_dirichlet_log_target(current, concentrations, observations);
        take = std::log(u) < log_ratio;  // NaN ratios reject
    }
    if (accepted) *accepted = take;
    return take ? proposal : current;
}

}  // namespace aohmm
