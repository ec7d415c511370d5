#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace aohmm {

// Seedable random stream threaded explicitly through every sampler.
// Two streams constructed from the same seed produce bitwise-identical
// draw sequences; the full state round-trips through serialize().
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0x5eed);

    double uniform();          // (0, 1), never exactly 0 or 1
    double normal();           // N(0, 1)
    double gamma(double shape);  // Gamma(shape, rate 1)
    // log of a Gamma(shape, 1) draw; stays finite for shapes down to 1e-300.
    double log_gamma(double shape);
    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }
    bool bernoulli(double p) { return uniform() < p; }
    int binomial(int trials, double p);
    int categorical(const std::vector<double>& weights);  // unnormalised, >= 0

    // Child stream whose seed is derived from this stream's seed and a key.
    // Does not advance this stream.
    Rng split(std::uint64_t key) const;

    std::uint64_t seed() const { return seed_; }

    std::string serialize() const;
    void deserialize(const std::string& blob);

    bool operator==(const Rng& other) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// splitmix64 finaliser; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace aohmm
