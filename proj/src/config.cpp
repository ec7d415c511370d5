#include "aohmm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aohmm/errors.hpp"

namespace aohmm {

using json = nlohmann::json;

LearningRates RunConfig::rate_priors() const {
    LearningRates r;
    r.prior_mu = prior_mu;
    r.prior_beta = prior_beta;
    r.prior_pi = prior_pi;
    return r;
}

SamplerOptions RunConfig::sampler() const { return SamplerOptions{adaptive, psi_scale, mu_statistic}; }

RunOptions RunConfig::run_options() const {
    RunOptions o;
    o.plan = plan;
    o.sampler = sampler();
    o.base_prior = base_prior;
    return o;
}

void RunConfig::validate() const {
    hyper.validate();
    plan.validate();
    synth.validate();
    for (const GammaDist* g : {&prior_mu, &prior_beta, &prior_pi}) {
        if (!(g->shape > 0.0) || !(g->rate > 0.0)) throw ParameterError("rate priors need positive shape and rate");
    }
    if (seeds.empty()) throw ParameterError("seed list is empty");
    if (threads < 0) throw ParameterError("threads must be >= 0");
    if (!(window_frac >= 0.0)) throw ParameterError("window_frac must be >= 0");
}

Regime parse_regime(const std::string& name) {
    if (name == "stationary") return Regime::Stationary;
    if (name == "shifting") return Regime::Shifting;
    if (name == "newclass") return Regime::NewClass;
    if (name == "combined") return Regime::Combined;
    throw ParameterError("unknown regime '" + name + "' (stationary|shifting|newclass|combined)");
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Stationary: return "stationary";
        case Regime::Shifting: return "shifting";
        case Regime::NewClass: return "newclass";
        case Regime::Combined: return "combined";
    }
    return "stationary";
}

LabeledSequence generate_regime(Regime regime, const SynthConfig& cfg, Rng& rng) {
    switch (regime) {
        case Regime::Stationary: return gen_stationary(cfg, rng);
        case Regime::Shifting: return gen_shifting(cfg, rng);
        case Regime::NewClass: return gen_newclass(cfg, rng);
        case Regime::Combined: {
            SynthConfig c = cfg;
            if (!c.new_class) c.new_class = NewClassSpec{};
            return gen_combined(c, rng);
        }
    }
    return gen_stationary(cfg, rng);
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParameterError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) throw ParameterError("unknown config key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

Vector to_vector(const json& j) {
    if (j.is_number()) return Vector::Constant(1, j.get<double>());
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json from_vector(const Vector& v) {
    if (v.size() == 1) return v[0];
    return std::vector<double>(v.data(), v.data() + v.size());
}

GammaDist to_gamma(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw ParameterError("gamma prior must be [shape, rate]");
    return {v[0], v[1]};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    try {
        const json j = json::parse(text);
        check_keys(j, "config", {"hyper", "plan", "tau", "psi_scale", "mu_statistic", "base_prior", "rate_priors", "seed", "seeds", "threads",
                                 "window_frac", "regime", "synth"});
        if (j.contains("hyper")) {
            const auto& h = j["hyper"];
            check_keys(h, "hyper", {"gamma", "alpha", "kappa", "truncation"});
            read(h, "gamma", cfg.hyper.gamma);
            read(h, "alpha", cfg.hyper.alpha);
            read(h, "kappa", cfg.hyper.kappa);
            read(h, "truncation", cfg.hyper.truncation);
        }
        if (j.contains("plan")) {
            const auto& p = j["plan"];
            check_keys(p, "plan", {"batch_size", "sweeps", "burn_in", "bootstrap_iters", "offline"});
            read(p, "batch_size", cfg.plan.batch_size);
            read(p, "sweeps", cfg.plan.sweeps);
            read(p, "burn_in", cfg.plan.burn_in);
            read(p, "bootstrap_iters", cfg.plan.bootstrap_iters);
            read(p, "offline", cfg.plan.offline);
        }
        if (j.contains("tau")) {
            const auto tau = j["tau"].get<std::string>();
            if (tau != "adaptive" && tau != "fixed") throw ParameterError("tau must be 'adaptive' or 'fixed'");
            cfg.adaptive = tau == "adaptive";
        }
        if (j.contains("psi_scale")) {
            const auto s = j["psi_scale"].get<std::string>();
            if (s == "eigenvalue") {
                cfg.psi_scale = PsiScale::LargestEigenvalue;
            } else if (s == "determinant") {
                cfg.psi_scale = PsiScale::Determinant;
            } else {
                throw ParameterError("psi_scale must be 'eigenvalue' or 'determinant'");
            }
        }
        if (j.contains("mu_statistic")) {
            const auto m = j["mu_statistic"].get<std::string>();
            if (m == "batch-mean") {
                cfg.mu_statistic = MuStatistic::BatchMean;
            } else if (m == "debiased-batch-mean") {
                cfg.mu_statistic = MuStatistic::DebiasedBatchMean;
            } else if (m == "sampled-mean") {
                cfg.mu_statistic = MuStatistic::SampledMean;
            } else {
                throw ParameterError("mu_statistic must be 'batch-mean', 'debiased-batch-mean' or 'sampled-mean'");
            }
        }
        if (j.contains("base_prior")) {
            const auto b = j["base_prior"].get<std::string>();
            if (b == "pooled") {
                cfg.base_prior = BasePrior::Pooled;
            } else if (b == "global") {
                cfg.base_prior = BasePrior::Global;
            } else {
                throw ParameterError("base_prior must be 'pooled' or 'global'");
            }
        }
        if (j.contains("rate_priors")) {
            const auto& r = j["rate_priors"];
            check_keys(r, "rate_priors", {"mu", "beta", "pi"});
            if (r.contains("mu")) cfg.prior_mu = to_gamma(r["mu"]);
            if (r.contains("beta")) cfg.prior_beta = to_gamma(r["beta"]);
            if (r.contains("pi")) cfg.prior_pi = to_gamma(r["pi"]);
        }
        read(j, "seed", cfg.seed);
        read(j, "seeds", cfg.seeds);
        read(j, "threads", cfg.threads);
        read(j, "window_frac", cfg.window_frac);
        if (j.contains("regime")) cfg.regime = parse_regime(j["regime"].get<std::string>());
        if (j.contains("synth")) {
            const auto& s = j["synth"];
            check_keys(s, "synth", {"means", "sigma", "transition_concentration", "length", "drift", "new_class"});
            if (s.contains("means")) {
                cfg.synth.means.clear();
                for (const auto& m : s["means"]) cfg.synth.means.push_back(to_vector(m));
            }
            read(s, "sigma", cfg.synth.sigma);
            read(s, "transition_concentration", cfg.synth.transition_concentration);
            read(s, "length", cfg.synth.length);
            read(s, "drift", cfg.synth.drift);
            if (s.contains("new_class") && !s["new_class"].is_null()) {
                const auto& n = s["new_class"];
                check_keys(n, "synth.new_class", {"mean", "onset"});
                NewClassSpec spec;
                if (n.contains("mean")) spec.mean = to_vector(n["mean"]);
                if (n.contains("onset") && !n["onset"].is_null()) spec.onset = n["onset"].get<int>();
                cfg.synth.new_class = spec;
            }
        }
    } catch (const json::exception& e) {
        throw ParameterError(std::string("invalid config: ") + e.what());
    }
    cfg.synth.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
    json j;
    j["hyper"] = {{"gamma", cfg.hyper.gamma},
                  {"alpha", cfg.hyper.alpha},
                  {"kappa", cfg.hyper.kappa},
                  {"truncation", cfg.hyper.truncation}};
    j["plan"] = {{"batch_size", cfg.plan.batch_size},
                 {"sweeps", cfg.plan.sweeps},
                 {"burn_in", cfg.plan.burn_in},
                 {"bootstrap_iters", cfg.plan.bootstrap_iters},
                 {"offline", cfg.plan.offline}};
    j["tau"] = cfg.adaptive ? "adaptive" : "fixed";
    j["psi_scale"] = cfg.psi_scale == PsiScale::Determinant ? "determinant" : "eigenvalue";
    j["mu_statistic"] = cfg.mu_statistic == MuStatistic::SampledMean         ? "sampled-mean"
                        : cfg.mu_statistic == MuStatistic::DebiasedBatchMean ? "debiased-batch-mean"
                                                                             : "batch-mean";
    j["base_prior"] = cfg.base_prior == BasePrior::Global ? "global" : "pooled";
    j["rate_priors"] = {{"mu", {cfg.prior_mu.shape, cfg.prior_mu.rate}},
                        {"beta", {cfg.prior_beta.shape, cfg.prior_beta.rate}},
                        {"pi", {cfg.prior_pi.shape, cfg.prior_pi.rate}}};
    j["seed"] = cfg.seed;
    j["seeds"] = cfg.seeds;
    j["threads"] = cfg.threads;
    j["window_frac"] = cfg.window_frac;
    j["regime"] = regime_name(cfg.regime);
    json means = json::array();
    for (const auto& m : cfg.synth.means) means.push_back(from_vector(m));
    j["synth"] = {{"means", means},
                  {"sigma", cfg.synth.sigma},
                  {"transition_concentration", cfg.synth.transition_concentration},
                  {"length", cfg.synth.length},
                  {"drift", cfg.synth.drift}};
    if (cfg.synth.new_class) {
        json n = {{"mean", from_vector(cfg.synth.new_class->mean)}};
        n["onset"] = cfg.synth.new_class->onset ? json(*cfg.synth.new_class->onset) : json(nullptr);
        j["synth"]["new_class"] = n;
    }
    return j.dump(2) + "\n";
}

}  // namespace aohmm
