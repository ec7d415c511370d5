#include "aohmm/synth.hpp"

#include <cmath>
#include <string>

#include "aohmm/errors.hpp"

namespace aohmm {

std::vector<Vector> SynthConfig::default_means() {
    std::vector<Vector> out;
    for (double m : {100.0, 200.0, 300.0, 400.0, 500.0}) out.push_back(Vector::Constant(1, m));
    return out;
}

void SynthConfig::validate() const {
    if (means.empty()) throw ParameterError("synthetic config needs at least one state");
    for (const auto& m : means) {
        if (m.size() < 1 || m.size() != means.front().size()) throw ParameterError("state means disagree on dimension");
    }
    if (length < 1) throw ParameterError("sequence length must be >= 1");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    if (!(drift >= 0.0)) throw ParameterError("drift must be >= 0");
    if (!(transition_concentration > 0.0)) throw ParameterError("transition concentration must be > 0");
    if (new_class) {
        if (new_class->mean.size() != means.front().size()) throw ParameterError("new class mean has wrong dimension");
        if (new_class->onset && (*new_class->onset < 0 || *new_class->onset >= length)) {
            throw ParameterError("new class onset outside the sequence");
        }
    }
    if (transitions) {
        const int total = states() + (new_class ? 1 : 0);
        if (transitions->rows() != total || transitions->cols() != total) {
            throw ParameterError("transition matrix must be " + std::to_string(total) + "x" + std::to_string(total));
        }
        for (Eigen::Index j = 0; j < total; ++j) {
            if ((transitions->row(j).array() < 0.0).any() || std::abs(transitions->row(j).sum() - 1.0) > 1e-9) {
                throw ParameterError("transition matrix rows must be probability vectors");
            }
        }
    }
}

Matrix draw_transition_matrix(int k, double concentration, Rng& rng) {
    Matrix p(k, k);
    const DirichletDist dir{Vector::Constant(k, concentration)};
    for (int j = 0; j < k; ++j) p.row(j) = sample(dir, rng).transpose();
    return p;
}

namespace {

int next_state(const Matrix& p, int from, Rng& rng) {
    std::vector<double> w(p.cols());
    for (Eigen::Index k = 0; k < p.cols(); ++k) w[k] = p(from, k);
    return rng.categorical(w);
}

int uniform_index(int n, Rng& rng) {
    const int i = static_cast<int>(rng.uniform() * n);
    return i < n ? i : n - 1;
}

}  // namespace

LabeledSequence generate(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    const int K = cfg.states();
    const int T = cfg.length;
    const int d = cfg.dim();
    const bool extra = cfg.new_class.has_value();
    const int total = extra ? K + 1 : K;

    const Matrix full =
        cfg.transitions ? *cfg.transitions : draw_transition_matrix(total, cfg.transition_concentration, rng);
    std::vector<int> z(T);
    if (!extra || (cfg.new_class->onset && *cfg.new_class->onset == 0)) {
        z[0] = uniform_index(total, rng);
        for (int t = 1; t < T; ++t) z[t] = next_state(full, z[t - 1], rng);
    } else {
        // Known classes only until the onset, renormalised within the block.
        Matrix block = full.topLeftCorner(K, K);
        for (int j = 0; j < K; ++j) block.row(j) /= block.row(j).sum();
        z[0] = uniform_index(K, rng);
        for (int t = 1; t < T; ++t) z[t] = next_state(block, z[t - 1], rng);
        int onset = T / 2;
        if (cfg.new_class->onset) {
            onset = *cfg.new_class->onset;
        } else {
            std::vector<int> candidates;
            for (int t = std::max(1, T / 3); t < (2 * T) / 3; ++t) {
                if (z[t] != z[t - 1]) candidates.push_back(t);
            }
            if (!candidates.empty()) onset = candidates[uniform_index(static_cast<int>(candidates.size()), rng)];
        }
        z[onset] = K;
        for (int t = onset + 1; t < T; ++t) z[t] = next_state(full, z[t - 1], rng);
    }

    LabeledSequence seq;
    seq.features.resize(T, d);
    std::vector<int> labels(T);
    for (int t = 0; t < T; ++t) {
        const Vector& mu = z[t] < K ? cfg.means[z[t]] : cfg.new_class->mean;
        for (int c = 0; c < d; ++c) seq.features(t, c) = mu[c] + cfg.drift * t + cfg.sigma * rng.normal();
        labels[t] = z[t] + 1;
    }
    seq.labels = std::move(labels);
    return seq;
}

LabeledSequence gen_stationary(SynthConfig cfg, Rng& rng) {
    cfg.drift = 0.0;
    cfg.new_class.reset();
    return generate(cfg, rng);
}

LabeledSequence gen_shifting(SynthConfig cfg, Rng& rng) {
    cfg.new_class.reset();
    return generate(cfg, rng);
}

LabeledSequence gen_newclass(SynthConfig cfg, Rng& rng) {
    cfg.drift = 0.0;
    if (!cfg.new_class) cfg.new_class = NewClassSpec{};
    return generate(cfg, rng);
}

LabeledSequence gen_combined(const SynthConfig& cfg, Rng& rng) { return generate(cfg, rng); }

}  // namespace aohmm
