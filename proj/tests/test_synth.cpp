#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aohmm/config.hpp"
#include "aohmm/errors.hpp"
#include "aohmm/synth.hpp"

using namespace aohmm;

namespace {

struct ClassMoments {
    std::vector<double> mean, var;
};

ClassMoments moments(const LabeledSequence& s, int classes, double drift = 0.0) {
    ClassMoments m{std::vector<double>(classes, 0.0), std::vector<double>(classes, 0.0)};
    std::vector<double> n(classes, 0.0), sq(classes, 0.0);
    for (int t = 0; t < s.length(); ++t) {
        const int k = (*s.labels)[t] - 1;
        const double y = s.features(t, 0) - drift * t;
        n[k] += 1.0;
        m.mean[k] += y;
        sq[k] += y * y;
    }
    for (int k = 0; k < classes; ++k) {
        m.mean[k] /= n[k];
        m.var[k] = sq[k] / n[k] - m.mean[k] * m.mean[k];
    }
    return m;
}

// Bhattacharyya coefficient of two univariate Gaussians.
double bhattacharyya(double m1, double v1, double m2, double v2) {
    const double v = 0.5 * (v1 + v2);
    const double db = 0.125 * (m1 - m2) * (m1 - m2) / v + 0.5 * std::log(v / std::sqrt(v1 * v2));
    return std::exp(-db);
}

}  // namespace

TEST_CASE("unit-variance classes sit on their means") {
    SynthConfig cfg;
    Rng rng(1);
    const LabeledSequence s = gen_stationary(cfg, rng);
    CHECK(s.length() == 100);
    const ClassMoments m = moments(s, 5);
    for (int k = 0; k < 5; ++k) CHECK(std::abs(m.mean[k] - 100.0 * (k + 1)) < 1.0);
}

TEST_CASE("sigma 50 makes adjacent classes overlap") {
    SynthConfig cfg;
    cfg.sigma = 50.0;
    cfg.length = 5000;
    Rng rng(2);
    const ClassMoments m = moments(gen_stationary(cfg, rng), 5);
    for (int k = 0; k + 1 < 5; ++k) CHECK(bhattacharyya(m.mean[k], m.var[k], m.mean[k + 1], m.var[k + 1]) > 0.3);
}

TEST_CASE("fixed seed reproduces the sequence") {
    SynthConfig cfg;
    cfg.sigma = 10.0;
    Rng a(3), b(3);
    const LabeledSequence x = gen_combined(cfg, a), y = gen_combined(cfg, b);
    CHECK(x.features == y.features);
    CHECK(*x.labels == *y.labels);
}

TEST_CASE("drift offsets the generating mean per frame") {
    SynthConfig cfg;
    cfg.sigma = 1e-9;
    cfg.drift = 0.5;
    Rng rng(4);
    const LabeledSequence s = gen_shifting(cfg, rng);
    auto offset = [&](int t) { return s.features(t, 0) - 100.0 * (*s.labels)[t]; };
    CHECK(offset(10) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(offset(99) == doctest::Approx(49.5).epsilon(1e-6));
    CHECK(cfg.drift * cfg.length == doctest::Approx(0.5 * (cfg.means[1][0] - cfg.means[0][0])));
}

TEST_CASE("zero drift reproduces the stationary draw") {
    SynthConfig cfg;
    cfg.sigma = 10.0;
    Rng a(5), b(5);
    const LabeledSequence x = gen_shifting(cfg, a), y = gen_stationary(cfg, b);
    CHECK(x.features == y.features);
    CHECK(*x.labels == *y.labels);
}

TEST_CASE("transition frequencies follow the matrix") {
    SynthConfig cfg;
    cfg.length = 10000;
    Rng draw(6);
    const Matrix pi = draw_transition_matrix(5, 3.0, draw);
    cfg.transitions = pi;
    Rng rng(7);
    const LabeledSequence s = gen_stationary(cfg, rng);
    Matrix n = Matrix::Zero(5, 5);
    for (int t = 1; t < s.length(); ++t) n((*s.labels)[t - 1] - 1, (*s.labels)[t] - 1) += 1.0;
    double chi2 = 0.0;
    for (int j = 0; j < 5; ++j) {
        const double row = n.row(j).sum();
        for (int k = 0; k < 5; ++k) {
            const double e = row * pi(j, k);
            chi2 += (n(j, k) - e) * (n(j, k) - e) / e;
        }
    }
    CHECK(chi2 < 45.31);  // chi-square, 20 dof, p = 0.001
}

TEST_CASE("transition matrix checks") {
    SynthConfig cfg;
    Rng rng(8);
    cfg.transitions = Matrix::Constant(4, 4, 0.25);
    CHECK_THROWS_AS(gen_stationary(cfg, rng), ParameterError);
    Matrix bad = Matrix::Constant(5, 5, 0.2);
    bad(0, 0) = 0.5;
    cfg.transitions = bad;
    CHECK_THROWS_AS(gen_stationary(cfg, rng), ParameterError);
    Rng d(9);
    const Matrix pi = draw_transition_matrix(5, 3.0, d);
    for (int j = 0; j < 5; ++j) CHECK(pi.row(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("new class appears in the middle third and recurs") {
    SynthConfig cfg;
    cfg.sigma = 10.0;
    cfg.new_class = NewClassSpec{};
    for (std::uint64_t seed = 10; seed < 30; ++seed) {
        Rng rng(seed);
        const LabeledSequence s = gen_newclass(cfg, rng);
        const auto& z = *s.labels;
        const auto first = std::find(z.begin(), z.end(), 6);
        REQUIRE(first != z.end());
        const long onset = first - z.begin();
        CHECK(onset >= 33);
        CHECK(onset < 67);
        CHECK(*std::max_element(z.begin(), z.end()) == 6);
    }
}

TEST_CASE("explicit onset is honoured") {
    SynthConfig cfg;
    cfg.new_class = NewClassSpec{Vector::Constant(1, 600.0), 40};
    Rng rng(11);
    const LabeledSequence s = gen_newclass(cfg, rng);
    for (int t = 0; t < 40; ++t) CHECK((*s.labels)[t] <= 5);
    CHECK((*s.labels)[40] == 6);
    cfg.new_class->onset = 100;
    CHECK_THROWS_AS(gen_newclass(cfg, rng), ParameterError);
}

TEST_CASE("combined regime drifts and adds the class") {
    SynthConfig cfg;
    cfg.sigma = 1e-9;
    cfg.drift = 0.5;
    cfg.new_class = NewClassSpec{};
    Rng rng(12);
    const LabeledSequence s = generate_regime(Regime::Combined, cfg, rng);
    bool saw_new = false;
    for (int t = 0; t < s.length(); ++t) {
        const int k = (*s.labels)[t];
        const double base = k == 6 ? 600.0 : 100.0 * k;
        CHECK(s.features(t, 0) - base == doctest::Approx(0.5 * t).epsilon(1e-6));
        saw_new = saw_new || k == 6;
    }
    CHECK(saw_new);
}
