#include "aohmm/gibbs.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "aohmm/errors.hpp"

namespace aohmm {

EmissionStats EmissionStats::collect(const Matrix& features, const std::vector<int>& z, int truncation) {
    const int d = static_cast<int>(features.cols());
    EmissionStats st;
    st.count.assign(truncation, 0.0);
    st.sum.assign(truncation, Vector::Zero(d));
    st.scatter.assign(truncation, Matrix::Zero(d, d));
    for (std::size_t t = 0; t < z.size(); ++t) {
        st.count[z[t]] += 1.0;
        st.sum[z[t]] += features.row(static_cast<Eigen::Index>(t)).transpose();
    }
    for (std::size_t t = 0; t < z.size(); ++t) {
        const int k = z[t];
        const Vector diff = features.row(static_cast<Eigen::Index>(t)).transpose() - st.sum[k] / st.count[k];
        st.scatter[k] += diff * diff.transpose();
    }
    return st;
}

Matrix emission_log_likelihoods(const ModelState& state, const Matrix& features) {
    const int L = state.truncation();
    const Eigen::Index T = features.rows();
    const double d = static_cast<double>(features.cols());
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    Matrix out(T, L);
    for (int k = 0; k < L; ++k) {
        const auto& slot = state.emissions.slots[k];
        const Matrix chol = spd_cholesky(slot.cov);
        const double log_det = 2.0 * chol.diagonal().array().log().sum();
        const double constant = -0.5 * (d * log_two_pi + log_det);
        const Matrix centred = features.transpose().colwise() - slot.mean;
        const Matrix white = chol.triangularView<Eigen::Lower>().solve(centred);
        out.col(k) = constant - 0.5 * white.colwise().squaredNorm().transpose().array();
    }
    return out;
}

std::vector<int> sample_states(const ModelState& state, const Matrix& features, Rng& rng) {
    const Eigen::Index T = features.rows();
    const int L = state.truncation();
    if (T == 0) return {};
    const Matrix loglik = emission_log_likelihoods(state, features);
    const Matrix& pi = state.transitions.pi;

    // Normalised forward messages; each row is p(z_t | y_1..t).
    Matrix filtered(T, L);
    Eigen::RowVectorXd predicted = state.transitions.beta.transpose();
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) predicted = filtered.row(t - 1) * pi;
        const double top = loglik.row(t).maxCoeff();
        Eigen::RowVectorXd msg(L);
        if (!std::isfinite(top)) {
            msg = predicted;  // no usable emission information at this frame
        } else {
            msg = predicted.array() * (loglik.row(t).array() - top).exp();
        }
        double total = msg.sum();
        if (!(total > 0.0) || !std::isfinite(total)) {
            msg = (loglik.row(t).array() - top).exp();
            total = msg.sum();
            if (!(total > 0.0) || !std::isfinite(total)) {
                msg.setOnes();
                total = static_cast<double>(L);
            }
        }
        filtered.row(t) = msg / total;
    }

    std::vector<int> z(static_cast<std::size_t>(T));
    std::vector<double> w(L);
    for (int k = 0; k < L; ++k) w[k] = filtered(T - 1, k);
    z[T - 1] = rng.categorical(w);
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const int next = z[t + 1];
        double total = 0.0;
        for (int j = 0; j < L; ++j) {
            w[j] = filtered(t, j) * pi(j, next);
            total += w[j];
        }
        if (!(total > 0.0)) {
            for (int j = 0; j < L; ++j) w[j] = filtered(t, j);
        }
        z[t] = rng.categorical(w);
    }
    return z;
}

void set_assignment(ModelState& state, const Matrix& features, const std::vector<int>& z,
                    const std::vector<int>& starts) {
    const int L = state.truncation();
    if (static_cast<Eigen::Index>(z.size()) != features.rows()) throw InputError("assignment length mismatch");
    for (int k : z) {
        if (k < 0 || k >= L) throw InputError("assignment outside truncation range");
    }
    state.transitions.counts = transition_counts(z, starts, L);
    for (auto& slot : state.emissions.slots) slot.occupancy = 0.0;
    for (int k : z) state.emissions.slots[k].occupancy += 1.0;
}

AuxCounts sample_aux_counts(const ModelState& state, Rng& rng) {
    const int L = state.truncation();
    const auto& hyper = state.hyper;
    const auto& tr = state.transitions;
    AuxCounts aux;
    aux.tables = Eigen::MatrixXi::Zero(L, L);
    aux.overrides = Eigen::VectorXi::Zero(L);
    for (int j = 0; j < L; ++j) {
        for (int k = 0; k < L; ++k) {
            const int customers = tr.counts(j, k);
            if (customers == 0) continue;
            const double mass = hyper.alpha * tr.beta[k] + (j == k ? hyper.kappa : 0.0);
            int tables = 0;
            for (int i = 0; i < customers; ++i) {
                if (rng.uniform() < mass / (i + mass)) ++tables;
            }
            aux.tables(j, k) = tables;
        }
    }
    const double rho = hyper.kappa / (hyper.alpha + hyper.kappa);
    for (int j = 0; j < L; ++j) {
        const int m = aux.tables(j, j);
        if (m == 0 || rho <= 0.0) continue;
        const double p = rho / (rho + tr.beta[j] * (1.0 - rho));
        aux.overrides[j] = rng.binomial(m, p);
    }
    aux.adjusted_columns = aux.tables.colwise().sum().transpose().cast<double>();
    for (int j = 0; j < L; ++j) aux.adjusted_columns[j] -= aux.overrides[j];
    return aux;
}

Vector beta_concentration(const ModelState& state, const AuxCounts& aux) {
    const int L = state.truncation();
    const double base = state.hyper.gamma / L;
    return (base + state.transitions.beta_pseudo.array() + aux.adjusted_columns.array()).matrix();
}

Vector pi_row_concentration(const ModelState& state, int row) {
    const auto& tr = state.transitions;
    Vector a = state.hyper.alpha * tr.beta + tr.pi_pseudo.row(row).transpose() +
               tr.counts.row(row).transpose().cast<double>();
    a[row] += state.hyper.kappa;
    return a;
}

Vector sample_beta(const ModelState& state, const AuxCounts& aux, double tau_beta, Rng& rng) {
    return sample(DirichletDist{scale_concentration(beta_concentration(state, aux), tau_beta)}, rng);
}

Vector sample_pi_row(const ModelState& state, int row, double tau_pi, Rng& rng) {
    return sample(DirichletDist{scale_concentration(pi_row_concentration(state, row), tau_pi)}, rng);
}

NiwParams effective_prior(const ModelState& state, int k, double tau_mu, double tau_sigma, long* clamps) {
    const auto& slot = state.emissions.slots[k];
    if (!slot.seeded) return state.emissions.base;
    return scale_niw_prior(slot.prior, tau_mu, tau_sigma, clamps);
}

namespace {

void condition_slots(ModelState& state, const Matrix& features, const std::vector<int>& z, double tau_mu,
                     double tau_sigma, Rng* rng) {
    const int L = state.truncation();
    const EmissionStats stats = EmissionStats::collect(features, z, L);
    for (int k = 0; k < L; ++k) {
        auto& slot = state.emissions.slots[k];
        const NiwParams prior = effective_prior(state, k, tau_mu, tau_sigma, &state.rates.dof_clamps);
        slot.occupancy = stats.count[k];
        slot.posterior = stats.count[k] > 0.0
                             ? niw_posterior(prior, stats.count[k], stats.mean(k), stats.scatter[k])
                             : prior;
        if (rng) {
            NiwDraw draw = sample_niw(slot.posterior, *rng);
            slot.mean = std::move(draw.mean);
            slot.cov = std::move(draw.cov);
        }
    }
}

}  // namespace

void sample_emissions(ModelState& state, const Matrix& features, const std::vector<int>& z, double tau_mu,
                      double tau_sigma, Rng& rng) {
    condition_slots(state, features, z, tau_mu, tau_sigma, &rng);
}

void update_posteriors(ModelState& state, const Matrix& features, const std::vector<int>& z) {
    condition_slots(state, features, z, state.rates.applied.mu, state.rates.applied.sigma, nullptr);
}

std::vector<int> informative_rows(const ModelState& state) {
    std::vector<int> rows;
    for (int j = 0; j < state.truncation(); ++j) {
        const auto& slot = state.emissions.slots[j];
        if (slot.occupancy > 0.0 || slot.seeded) rows.push_back(j);
    }
    return rows;
}

void update_learning_rates(ModelState& state, const AuxCounts& aux, const SamplerOptions& options, Rng& rng,
                           SweepResult& result) {
    auto& r = state.rates;
    if (!options.adapt_rates) {
        r.sampled = RateValues{};
        return;
    }
    r.sampled.sigma = sample_tau_sigma(state.emissions, r.sampled.sigma, rng, options.psi_scale);
    r.sampled.mu = sample_tau_mu(state.emissions, r.prior_mu, r.sampled.mu, rng, options.mu_statistic);

    bool accepted = false;
    r.sampled.beta = sample_tau_dirichlet(r.sampled.beta, {beta_concentration(state, aux)},
                                          {state.transitions.beta}, r.prior_beta, rng, &accepted);
    ++r.proposed_beta;
    r.accepted_beta += accepted ? 1 : 0;
    result.accepted_beta = accepted;

    const std::vector<int> rows = informative_rows(state);
    if (!rows.empty()) {
        std::vector<Vector> conc;
        std::vector<Vector> obs;
        conc.reserve(rows.size());
        obs.reserve(rows.size());
        for (int j : rows) {
            conc.push_back(pi_row_concentration(state, j));
            obs.push_back(state.transitions.pi.row(j).transpose());
        }
        r.sampled.pi = sample_tau_dirichlet(r.sampled.pi, conc, obs, r.prior_pi, rng, &accepted);
        ++r.proposed_pi;
        r.accepted_pi += accepted ? 1 : 0;
        result.accepted_pi = accepted;
    }
}

double joint_log_likelihood(const ModelState& state, const Matrix& features, const std::vector<int>& z) {
    if (z.empty()) return 0.0;
    const Matrix loglik = emission_log_likelihoods(state, features);
    const auto& tr = state.transitions;
    double out = std::log(tr.beta[z[0]]) + loglik(0, z[0]);
    for (std::size_t t = 1; t < z.size(); ++t) {
        out += std::log(tr.pi(z[t - 1], z[t])) + loglik(static_cast<Eigen::Index>(t), z[t]);
    }
    return out;
}

SweepResult gibbs_sweep(ModelState& state, const Matrix& features, Rng& rng, const SamplerOptions& options) {
    SweepResult result;
    if (features.rows() == 0) return result;
    if (features.cols() != state.dim()) throw InputError("feature dimension does not match the model");
    const RateValues applied = state.rates.applied;

    result.z = sample_states(state, features, rng);
    set_assignment(state, features, result.z);

    const AuxCounts aux = sample_aux_counts(state, rng);
    state.transitions.tables = aux.tables;
    state.transitions.overrides = aux.overrides;

    state.transitions.beta = sample_beta(state, aux, applied.beta, rng);
    for (int j = 0; j < state.truncation(); ++j) {
        state.transitions.pi.row(j) = sample_pi_row(state, j, applied.pi, rng).transpose();
    }
    sample_emissions(state, features, result.z, applied.mu, applied.sigma, rng);
    update_learning_rates(state, aux, options, rng, result);
    result.log_likelihood = joint_log_likelihood(state, features, result.z);
    return result;
}

}  // namespace aohmm
