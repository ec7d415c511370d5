#include "aohmm/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aohmm {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed), normal_(0.0, 1.0) {}

double Rng::uniform() {
    // 53 random bits mapped to the open interval (0, 1).
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
    if (shape < 1.0) return std::exp(log_gamma(shape));
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

double Rng::log_gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
    if (shape >= 1.0) return std::log(gamma(shape));
    // G(a) = G(a + 1) * U^(1/a)
    std::gamma_distribution<double> dist(shape + 1.0, 1.0);
    const double g = dist(engine_);
    return std::log(g) + std::log(uniform()) / shape;
}

int Rng::binomial(int trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    int hits = 0;
    for (int i = 0; i < trials; ++i) hits += uniform() < p ? 1 : 0;
    return hits;
}

int Rng::categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw std::invalid_argument("categorical weights must have a positive finite sum");
    }
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    // Round-off: return the last index with positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return static_cast<int>(i);
    }
    return 0;
}

Rng Rng::split(std::uint64_t key) const { return Rng(mix_seed(seed_, key)); }

std::string Rng::serialize() const {
    std::ostringstream out;
    out << seed_ << ' ' << engine_ << ' ' << normal_;
    return out.str();
}

void Rng::deserialize(const std::string& blob) {
    std::istringstream in(blob);
    in >> seed_ >> engine_ >> normal_;
    if (!in) throw std::runtime_error("malformed rng state");
}

bool Rng::operator==(const Rng& other) const {
    return seed_ == other.seed_ && engine_ == other.engine_ && normal_ == other.normal_;
}

}  // namespace aohmm
