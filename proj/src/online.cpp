#include "aohmm/online.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "aohmm/csv_io.hpp"
#include "aohmm/errors.hpp"

namespace aohmm {

void BatchPlan::validate() const {
    if (batch_size < 1) throw ParameterError("batch size must be >= 1");
    if (sweeps < 1) throw ParameterError("sweeps must be >= 1");
    if (burn_in < 0 || burn_in >= sweeps) throw ParameterError("burn-in must lie in [0, sweeps)");
    if (bootstrap_iters < 1) throw ParameterError("bootstrap iterations must be >= 1");
}

Matrix MatrixStream::next(int max_rows) {
    const Eigen::Index n = std::min<Eigen::Index>(max_rows, features_.rows() - pos_);
    Matrix out = features_.middleRows(pos_, n);
    pos_ += n;
    return out;
}

CsvStream::CsvStream(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw InputError("cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw InputError(path + ": missing header");
    dim_ = feature_header_dim(header, path);
}

Matrix CsvStream::next(int max_rows) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (static_cast<int>(rows.size()) < max_rows && std::getline(in_, line)) {
        ++line_;
        if (line.empty() || line == "\r") continue;
        rows.push_back(parse_feature_row(line, dim_, path_, line_));
    }
    Matrix out(static_cast<Eigen::Index>(rows.size()), dim_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < dim_; ++c) out(static_cast<Eigen::Index>(i), c) = rows[i][c];
    }
    return out;
}

void condition_on_assignment(ModelState& state, const Matrix& features, const std::vector<int>& z, Rng& rng) {
    set_assignment(state, features, z);
    const AuxCounts aux = sample_aux_counts(state, rng);
    state.transitions.tables = aux.tables;
    state.transitions.overrides = aux.overrides;
    update_posteriors(state, features, z);
}

void propagate_posterior(ModelState& state, const RateValues& next) {
    const int L = state.truncation();
    const RateValues r = state.rates.applied;
    for (auto& slot : state.emissions.slots) {
        if (slot.occupancy > 0.0 || slot.seeded) {
            slot.prior = slot.posterior;
            slot.seeded = true;
        }
    }

    auto& tr = state.transitions;
    const auto& h = state.hyper;
    Vector columns = tr.tables.colwise().sum().transpose().cast<double>();
    for (int k = 0; k < L; ++k) columns[k] -= tr.overrides[k];
    const double base = h.gamma / L;
    for (int k = 0; k < L; ++k) {
        const double conc = scale_concentration(base + tr.beta_pseudo[k] + columns[k], r.beta);
        tr.beta_pseudo[k] = std::max(0.0, conc - base);
    }
    for (int j = 0; j < L; ++j) {
        for (int k = 0; k < L; ++k) {
            const double prior = h.alpha * tr.beta[k] + (j == k ? h.kappa : 0.0);
            const double conc = scale_concentration(prior + tr.pi_pseudo(j, k) + tr.counts(j, k), r.pi);
            tr.pi_pseudo(j, k) = std::max(0.0, conc - prior);
        }
    }
    tr.counts.setZero();
    tr.tables.setZero();
    tr.overrides.setZero();

    state.rates.applied = next;
    state.rates.sampled = next;
    ++state.batch_index;
}

std::vector<int> majority_vote(const Eigen::MatrixXi& votes) {
    std::vector<int> z(static_cast<std::size_t>(votes.rows()));
    for (Eigen::Index t = 0; t < votes.rows(); ++t) {
        Eigen::Index best = 0;
        votes.row(t).maxCoeff(&best);  // first maximum, i.e. the lowest slot
        z[static_cast<std::size_t>(t)] = static_cast<int>(best);
    }
    return z;
}

void write_trace_header(std::ostream& out) {
    out << "batch,sweep,loglik,tau_mu,tau_sigma,tau_beta,tau_pi,accepted_beta,accepted_pi,active\n";
}

OnlineRunner::OnlineRunner(ModelState state, RunOptions options, Rng& rng)
    : state_(std::move(state)), options_(options), rng_(rng) {
    options_.plan.validate();
}

namespace {

bool usable(const RateValues& r) {
    for (double v : {r.mu, r.sigma, r.beta, r.pi}) {
        if (!std::isfinite(v) || !(v > 0.0)) return false;
    }
    return true;
}

}  // namespace

std::vector<int> OnlineRunner::step(const Matrix& batch, BatchDiagnostics* diag) {
    if (batch.rows() == 0) return {};
    if (batch.cols() != state_.dim()) {
        throw InputError("stream frame has " + std::to_string(batch.cols()) + " features, model expects " +
                         std::to_string(state_.dim()));
    }
    const BatchPlan& plan = options_.plan;
    const int L = state_.truncation();
    const RateValues applied = state_.rates.applied;
    state_.rates.sampled = applied;

    Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(batch.rows(), L);
    RateValues sum{0.0, 0.0, 0.0, 0.0};
    double loglik = 0.0;
    int acc_beta = 0;
    int acc_pi = 0;
    const int kept = plan.sweeps - plan.burn_in;
    for (int s = 0; s < plan.sweeps; ++s) {
        const SweepResult res = gibbs_sweep(state_, batch, rng_, options_.sampler);
        const RateValues& cur = state_.rates.sampled;
        if (!usable(cur)) throw NumericError("learning rate left the positive reals");
        if (options_.trace) {
            *options_.trace << state_.batch_index << ',' << s << ',' << res.log_likelihood << ',' << cur.mu << ','
                            << cur.sigma << ',' << cur.beta << ',' << cur.pi << ',' << int(res.accepted_beta) << ','
                            << int(res.accepted_pi) << ',' << active_states(state_).size() << '\n';
        }
        if (s < plan.burn_in) continue;
        for (std::size_t t = 0; t < res.z.size(); ++t) votes(static_cast<Eigen::Index>(t), res.z[t]) += 1;
        sum.mu += cur.mu;
        sum.sigma += cur.sigma;
        sum.beta += cur.beta;
        sum.pi += cur.pi;
        loglik += res.log_likelihood;
        acc_beta += res.accepted_beta;
        acc_pi += res.accepted_pi;
    }

    const std::vector<int> z = majority_vote(votes);
    condition_on_assignment(state_, batch, z, rng_);

    RateValues next;
    if (options_.sampler.adapt_rates) {
        next = {sum.mu / kept, sum.sigma / kept, sum.beta / kept, sum.pi / kept};
    }
    if (diag) {
        diag->batch = state_.batch_index;
        diag->frames = static_cast<int>(batch.rows());
        diag->mean_log_likelihood = loglik / kept;
        diag->applied = applied;
        diag->next = next;
        diag->accept_beta = static_cast<double>(acc_beta) / kept;
        diag->accept_pi = static_cast<double>(acc_pi) / kept;
        diag->active = active_states(state_);
    }
    propagate_posterior(state_, next);

    std::vector<int> labels(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) labels[t] = z[t] + 1;
    return labels;
}

RunResult run_online(const std::vector<LabeledSequence>& bootstrap, StreamSource& stream, const RunOptions& options,
                     const HdpHyperparams& hyper, Rng& rng, const LearningRates& rate_priors) {
    options.plan.validate();
    ModelState state = init_from_bootstrap(bootstrap, hyper, options.plan.bootstrap_iters, rng, rate_priors,
                                           options.base_prior);
    propagate_posterior(state, options.sampler.adapt_rates ? state.rates.applied : RateValues{});

    if (options.trace) write_trace_header(*options.trace);
    RunResult result;
    OnlineRunner runner(std::move(state), options, rng);
    const int rows = options.plan.offline ? INT_MAX : options.plan.batch_size;
    for (;;) {
        Matrix batch = stream.next(rows);
        if (batch.rows() == 0) break;
        BatchDiagnostics diag;
        const std::vector<int> labels = runner.step(batch, &diag);
        result.labels.insert(result.labels.end(), labels.begin(), labels.end());
        result.batches.push_back(std::move(diag));
    }
    result.snapshot = snapshot(runner.state());
    return result;
}

}  // namespace aohmm
