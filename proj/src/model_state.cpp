#include "aohmm/model_state.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>

#include "aohmm/errors.hpp"

namespace aohmm {

void HdpHyperparams::validate() const {
    if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
    if (!(kappa >= 0.0)) throw ParameterError("kappa must be >= 0");
    if (truncation < 2) throw ParameterError("truncation level must be >= 2");
}

namespace {

std::size_t bytes(const Matrix& m) { return sizeof(double) * static_cast<std::size_t>(m.size()); }
std::size_t bytes(const Vector& v) { return sizeof(double) * static_cast<std::size_t>(v.size()); }
std::size_t bytes(const Eigen::MatrixXi& m) { return sizeof(int) * static_cast<std::size_t>(m.size()); }
std::size_t bytes(const Eigen::VectorXi& v) { return sizeof(int) * static_cast<std::size_t>(v.size()); }
std::size_t bytes(const NiwParams& p) { return sizeof(NiwParams) + bytes(p.mean) + bytes(p.scale); }

}  // namespace

std::size_t ModelState::footprint_bytes() const {
    std::size_t total = sizeof(ModelState) + bytes(emissions.base);
    total += emissions.slots.capacity() * sizeof(EmissionSlot);
    for (const auto& s : emissions.slots) {
        total += bytes(s.mean) + bytes(s.cov) + bytes(s.prior) + bytes(s.posterior) - 2 * sizeof(NiwParams);
    }
    const auto& t = transitions;
    total += bytes(t.beta) + bytes(t.pi) + bytes(t.counts) + bytes(t.tables) + bytes(t.overrides) +
             bytes(t.beta_pseudo) + bytes(t.pi_pseudo);
    return total;
}

NiwParams base_prior_from_data(const std::vector<LabeledSequence>& seqs, BasePrior mode) {
    if (seqs.empty()) throw InputError("base measure needs at least one sequence");
    const int d = seqs.front().dim();
    if (d < 1) throw InputError("features must have at least one column");
    Vector sum = Vector::Zero(d);
    double count = 0.0;
    bool labeled = true;
    std::map<int, std::pair<Vector, double>> classes;  // label -> (sum, count)
    for (const auto& s : seqs) {
        if (s.dim() != d) throw InputError("bootstrap sequences disagree on feature dimension");
        labeled = labeled && s.labels.has_value();
        for (int t = 0; t < s.length(); ++t) {
            const Vector y = s.features.row(t).transpose();
            sum += y;
            count += 1.0;
            if (s.labels) {
                auto& c = classes.try_emplace((*s.labels)[t], Vector::Zero(d), 0.0).first->second;
                c.first += y;
                c.second += 1.0;
            }
        }
    }
    if (count < 1.0) throw InputError("bootstrap has no frames");
    NiwParams base;
    base.mean = sum / count;

    Matrix global = Matrix::Zero(d, d);
    Matrix within = Matrix::Zero(d, d);
    for (const auto& s : seqs) {
        for (int t = 0; t < s.length(); ++t) {
            const Vector y = s.features.row(t).transpose();
            global += (y - base.mean) * (y - base.mean).transpose();
            if (labeled) {
                const auto& c = classes.at((*s.labels)[t]);
                const Vector diff = y - c.first / c.second;
                within += diff * diff.transpose();
            }
        }
    }
    if (count > 1.0) global /= count - 1.0;
    const double within_dof = count - static_cast<double>(classes.size());
    const bool pooled = mode == BasePrior::Pooled && labeled && within_dof >= 1.0;

    Matrix cov = pooled ? Matrix(within / within_dof) : global;
    cov = 0.5 * (cov + cov.transpose());
    // Ridge so a constant feature column still gives an SPD scale.
    const double ridge = 1e-6 * (std::max(cov.trace(), 0.0) / d + 1.0);
    cov.diagonal().array() += ridge;
    base.dof = d + 2.0;
    base.strength = 1.0;
    if (pooled) {
        const double spread = global.trace() + d * ridge;
        base.strength = std::clamp(cov.trace() / spread, 1e-6, 1.0);
    }
    base.scale = 0.75 * cov * (base.dof - d - 1.0);
    return base;
}

ModelState make_initial_state(const HdpHyperparams& hyper, const NiwParams& base, Rng& rng) {
    hyper.validate();
    const int L = hyper.truncation;
    ModelState s;
    s.hyper = hyper;
    s.emissions.base = base;
    s.emissions.slots.resize(L);
    for (auto& slot : s.emissions.slots) {
        const NiwDraw draw = sample_niw(base, rng);
        slot.mean = draw.mean;
        slot.cov = draw.cov;
        slot.prior = base;
        slot.posterior = base;
    }
    auto& tr = s.transitions;
    tr.beta = stick_breaking(hyper.gamma, L, rng);
    tr.pi = Matrix::Zero(L, L);
    for (int j = 0; j < L; ++j) {
        Vector a = hyper.alpha * tr.beta;
        a[j] += hyper.kappa;
        for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = std::max(a[k], kConcentrationFloor);
        tr.pi.row(j) = sample(DirichletDist{a}, rng).transpose();
    }
    tr.counts = Eigen::MatrixXi::Zero(L, L);
    tr.tables = Eigen::MatrixXi::Zero(L, L);
    tr.overrides = Eigen::VectorXi::Zero(L);
    tr.beta_pseudo = Vector::Zero(L);
    tr.pi_pseudo = Matrix::Zero(L, L);
    return s;
}

std::set<int> active_states(const ModelState& state) {
    std::set<int> out;
    for (int k = 0; k < state.emissions.size(); ++k) {
        if (state.emissions.slots[k].occupancy > 0.0) out.insert(k + 1);
    }
    return out;
}

Eigen::MatrixXi transition_counts(const std::vector<int>& z, const std::vector<int>& starts, int truncation) {
    Eigen::MatrixXi n = Eigen::MatrixXi::Zero(truncation, truncation);
    std::size_t next_start = 0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        bool is_start = false;
        while (next_start < starts.size() && static_cast<std::size_t>(starts[next_start]) <= t) {
            if (static_cast<std::size_t>(starts[next_start]) == t) is_start = true;
            ++next_start;
        }
        if (t == 0 || is_start) continue;
        n(z[t - 1], z[t]) += 1;
    }
    return n;
}

// ---- snapshot ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'O', 'H', 'M', 'M', 'S', 'N', 'P'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    template <typename T>
    void pod(const T& v) {
        const char* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }
    void vec(const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) pod(v[i]);
    }
    void mat(const Matrix& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) pod(m.data()[i]);
    }
    void imat(const Eigen::MatrixXi& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) pod(static_cast<std::int32_t>(m.data()[i]));
    }
    void niw(const NiwParams& p) {
        vec(p.mean);
        pod(p.strength);
        mat(p.scale);
        pod(p.dof);
    }
    std::string finish() {
        pod(fnv1a(buf_.data(), buf_.size()));
        return std::move(buf_);
    }
    std::string buf_;
};

class Reader {
public:
    explicit Reader(const std::string& blob) : blob_(blob) {}
    template <typename T>
    T pod() {
        if (pos_ + sizeof(T) > blob_.size()) throw LoadError("snapshot truncated");
        T v;
        std::memcpy(&v, blob_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    Vector vec(int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = pod<double>();
        return v;
    }
    Matrix mat(int r, int c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = pod<double>();
        return m;
    }
    Eigen::MatrixXi imat(int r, int c) {
        Eigen::MatrixXi m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = pod<std::int32_t>();
        return m;
    }
    NiwParams niw(int d) {
        NiwParams p;
        p.mean = vec(d);
        p.strength = pod<double>();
        p.scale = mat(d, d);
        p.dof = pod<double>();
        return p;
    }
    std::size_t pos() const { return pos_; }

private:
    const std::string& blob_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string snapshot(const ModelState& s) {
    Writer w;
    w.buf_.append(kMagic, sizeof(kMagic));
    w.pod(kVersion);
    const auto L = static_cast<std::uint32_t>(s.truncation());
    const auto d = static_cast<std::uint32_t>(s.dim());
    w.pod(L);
    w.pod(d);
    w.pod(s.hyper.gamma);
    w.pod(s.hyper.alpha);
    w.pod(s.hyper.kappa);
    w.niw(s.emissions.base);
    for (const auto& slot : s.emissions.slots) {
        w.vec(slot.mean);
        w.mat(slot.cov);
        w.niw(slot.prior);
        w.niw(slot.posterior);
        w.pod(slot.occupancy);
        w.pod(static_cast<std::uint8_t>(slot.seeded ? 1 : 0));
    }
    const auto& t = s.transitions;
    w.vec(t.beta);
    w.mat(t.pi);
    w.imat(t.counts);
    w.imat(t.tables);
    w.imat(t.overrides);
    w.vec(t.beta_pseudo);
    w.mat(t.pi_pseudo);
    const auto& r = s.rates;
    for (const RateValues* v : {&r.applied, &r.sampled}) {
        w.pod(v->mu);
        w.pod(v->sigma);
        w.pod(v->beta);
        w.pod(v->pi);
    }
    for (const GammaDist* g : {&r.prior_mu, &r.prior_beta, &r.prior_pi}) {
        w.pod(g->shape);
        w.pod(g->rate);
    }
    for (long c : {r.accepted_beta, r.proposed_beta, r.accepted_pi, r.proposed_pi, r.dof_clamps}) {
        w.pod(static_cast<std::int64_t>(c));
    }
    w.pod(static_cast<std::int64_t>(s.batch_index));
    return w.finish();
}

ModelState restore(const std::string& blob) {
    if (blob.size() < sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
        throw LoadError("snapshot truncated");
    }
    if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) throw LoadError("not a model snapshot");
    const std::size_t body = blob.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, blob.data() + body, sizeof(stored));

    Reader r(blob);
    for (std::size_t i = 0; i < sizeof(kMagic); ++i) r.pod<char>();
    const auto version = r.pod<std::uint32_t>();
    if (version != kVersion) throw LoadError("unsupported snapshot version " + std::to_string(version));
    if (stored != fnv1a(blob.data(), body)) throw LoadError("snapshot checksum mismatch (truncated or corrupt)");

    const int L = static_cast<int>(r.pod<std::uint32_t>());
    const int d = static_cast<int>(r.pod<std::uint32_t>());
    if (L < 2 || d < 1 || L > 100000 || d > 100000) throw LoadError("snapshot dimensions out of range");
    ModelState s;
    s.hyper.truncation = L;
    s.hyper.gamma = r.pod<double>();
    s.hyper.alpha = r.pod<double>();
    s.hyper.kappa = r.pod<double>();
    s.emissions.base = r.niw(d);
    s.emissions.slots.resize(L);
    for (auto& slot : s.emissions.slots) {
        slot.mean = r.vec(d);
        slot.cov = r.mat(d, d);
        slot.prior = r.niw(d);
        slot.posterior = r.niw(d);
        slot.occupancy = r.pod<double>();
        slot.seeded = r.pod<std::uint8_t>() != 0;
    }
    auto& t = s.transitions;
    t.beta = r.vec(L);
    t.pi = r.mat(L, L);
    t.counts = r.imat(L, L);
    t.tables = r.imat(L, L);
    t.overrides = r.imat(L, 1);
    t.beta_pseudo = r.vec(L);
    t.pi_pseudo = r.mat(L, L);
    auto& rates = s.rates;
    for (RateValues* v : {&rates.applied, &rates.sampled}) {
        v->mu = r.pod<double>();
        v->sigma = r.pod<double>();
        v->beta = r.pod<double>();
        v->pi = r.pod<double>();
    }
    for (GammaDist* g : {&rates.prior_mu, &rates.prior_beta, &rates.prior_pi}) {
        g->shape = r.pod<double>();
        g->rate = r.pod<double>();
    }
    for (long* c : {&rates.accepted_beta, &rates.proposed_beta, &rates.accepted_pi, &rates.proposed_pi,
                    &rates.dof_clamps}) {
        *c = static_cast<long>(r.pod<std::int64_t>());
    }
    s.batch_index = static_cast<long>(r.pod<std::int64_t>());
    if (r.pos() != body) throw LoadError("snapshot has trailing bytes");
    s.hyper.validate();
    return s;
}

}  // namespace aohmm
