#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aohmm/errors.hpp"
#include "aohmm/learning_rate.hpp"
#include "aohmm/model_state.hpp"
#include "oracles.hpp"

using namespace aohmm;

namespace {

Matrix mat1(double x) { return Matrix::Constant(1, 1, x); }

NiwParams niw1(double mean, double strength, double psi, double nu) {
    return NiwParams{Vector::Constant(1, mean), strength, mat1(psi), nu};
}

// One occupied slot whose posterior Psi and dof are given.
EmissionSlot psi_slot(const Matrix& psi, double nu) {
    EmissionSlot s;
    const int d = static_cast<int>(psi.rows());
    s.mean = Vector::Zero(d);
    s.cov = Matrix::Identity(d, d);
    s.prior = NiwParams{Vector::Zero(d), 1.0, psi, nu};
    s.posterior = s.prior;
    s.occupancy = 1.0;
    s.seeded = true;
    return s;
}

EmissionState state_of(std::vector<EmissionSlot> slots) {
    EmissionState e;
    const int d = static_cast<int>(slots.front().mean.size());
    e.base = NiwParams{Vector::Zero(d), 1.0, Matrix::Identity(d, d), d + 2.0};
    e.slots = std::move(slots);
    return e;
}

}  // namespace

TEST_CASE("unit rates return the prior unchanged") {
    Matrix psi(2, 2);
    psi << 2.0, 0.4, 0.4, 1.5;
    const NiwParams p{Vector::Constant(2, 3.0), 2.5, psi, 7.0};
    const NiwParams q = scale_niw_prior(p, 1.0, 1.0);
    CHECK(q.mean == p.mean);
    CHECK(q.strength == p.strength);
    CHECK(q.scale == p.scale);
    CHECK(q.dof == p.dof);
}

TEST_CASE("scaled inverse wishart keeps its mode") {
    const NiwParams p = niw1(0.0, 1.0, 3.0, 6.0);
    for (double tau : {0.3, 2.0, 7.5}) {
        const NiwParams q = scale_niw_prior(p, 1.0, tau);
        CHECK(q.scale(0, 0) / (q.dof + 2.0) == doctest::Approx(3.0 / 8.0).epsilon(1e-14));
    }
}

TEST_CASE("tau_mu = 2 halves the prior covariance of the mean") {
    const NiwParams p = niw1(1.0, 4.0, 2.0, 5.0);
    const NiwParams q = scale_niw_prior(p, 2.0, 1.0);
    CHECK(q.mean == p.mean);
    CHECK(1.0 / q.strength == doctest::Approx(0.5 / p.strength).epsilon(1e-15));
}

// Variance of a univariate IW(psi, nu), i.e. InvGamma(nu/2, psi/2).
double iw1_variance(double psi, double nu) {
    const double a = nu / 2.0, b = psi / 2.0;
    return b * b / ((a - 1.0) * (a - 1.0) * (a - 2.0));
}

double mc_iw1_variance(const NiwParams& n, std::uint64_t seed) {
    Rng rng(seed);
    double s = 0.0, s2 = 0.0;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
        const double x = sample(InvWishart{n.scale, n.dof}, rng)(0, 0);
        s += x;
        s2 += x * x;
    }
    const double m = s / draws;
    return s2 / draws - m * m;
}

TEST_CASE("scaled inverse wishart variance") {
    const double tau = 4.0;
    const NiwParams p = niw1(0.0, 1.0, 50.0, 50.0);
    const NiwParams q = scale_niw_prior(p, 1.0, tau);
    CHECK(std::abs(mc_iw1_variance(q, 1) / iw1_variance(q.scale(0, 0), q.dof) - 1.0) < 0.05);
    // with the mode kept exact, V/tau is only reached for large nu (0.81 of it at nu = 50)
    const NiwParams big = niw1(0.0, 1.0, 500.0, 500.0);
    const NiwParams qb = scale_niw_prior(big, 1.0, tau);
    const double ratio = mc_iw1_variance(qb, 3) / (mc_iw1_variance(big, 4) / tau);
    CHECK(std::abs(ratio - 1.0) < 0.15);
}

TEST_CASE("dof clamp and cap") {
    long clamps = 0;
    const NiwParams low = scale_niw_prior(niw1(0.0, 1.0, 1.0, 2.0), 1.0, 1e-3, &clamps);
    CHECK(clamps == 1);
    CHECK(low.dof == doctest::Approx(kDofMargin));
    CHECK(low.scale(0, 0) / (low.dof + 2.0) == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
    const NiwParams high = scale_niw_prior(niw1(0.0, 1.0, 1e11, 1e11), 1.0, 100.0);
    CHECK(high.dof == kMaxDof);
    // mode preserved through the cap
    CHECK(high.scale(0, 0) / (high.dof + 2.0) == doctest::Approx(1e11 / (1e11 + 2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(scale_niw_prior(niw1(0.0, 1.0, 1.0, 3.0), 0.0, 1.0), ParameterError);
}

TEST_CASE("concentration scaling") {
    CHECK(scale_concentration(3.0, 1.0) == 3.0);
    CHECK(scale_concentration(1e-9, 1.0) == 1e-9);
    CHECK(scale_concentration(3.0, 0.5) == doctest::Approx(2.0));
    CHECK(scale_concentration(0.5, 10.0) == kConcentrationFloor);
}

TEST_CASE("dirichlet modes survive tau scaling") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Vector a(4);
        for (int k = 0; k < 4; ++k) a[k] = 1.0 + 10.0 * rng.uniform();
        const double tau = 0.05 + 5.0 * rng.uniform();
        const Vector b = scale_concentration(a, tau);
        const Vector ma = (a.array() - 1.0) / (a.array() - 1.0).sum();
        const Vector mb = (b.array() - 1.0) / (b.array() - 1.0).sum();
        for (int k = 0; k < 4; ++k) CHECK(mb[k] == doctest::Approx(ma[k]).epsilon(1e-12));
    }
}

TEST_CASE("tau_sigma posterior for one state") {
    const auto post = tau_sigma_posterior(state_of({psi_slot(mat1(2.0), 4.0)}));
    REQUIRE(post);
    CHECK(post->shape == doctest::Approx(2.0));
    CHECK(post->scale == doctest::Approx(1.0));
}

TEST_CASE("tau_sigma posterior of two identical states matches one") {
    const auto one = tau_sigma_posterior(state_of({psi_slot(mat1(2.0), 4.0)}));
    const auto two = tau_sigma_posterior(state_of({psi_slot(mat1(2.0), 4.0), psi_slot(mat1(2.0), 4.0)}));
    REQUIRE(one);
    REQUIRE(two);
    CHECK(two->shape == doctest::Approx(one->shape));
    CHECK(two->scale == doctest::Approx(one->scale));
}

TEST_CASE("largest eigenvalue scale") {
    Matrix psi = Matrix::Zero(2, 2);
    psi(0, 0) = 4.0;
    psi(1, 1) = 1.0;
    CHECK(psi_scale_value(psi, PsiScale::LargestEigenvalue) == doctest::Approx(4.0));
    CHECK(psi_scale_value(psi, PsiScale::Determinant) == doctest::Approx(4.0));
    const auto post = tau_sigma_posterior(state_of({psi_slot(psi, 5.0)}));
    REQUIRE(post);
    CHECK(post->scale == doctest::Approx(2.0));
}

TEST_CASE("no active state leaves tau_sigma alone") {
    EmissionSlot s = psi_slot(mat1(2.0), 4.0);
    s.occupancy = 0.0;
    const EmissionState e = state_of({s});
    CHECK_FALSE(tau_sigma_posterior(e));
    Rng rng(1);
    CHECK(sample_tau_sigma(e, 0.7, rng) == 0.7);
}

TEST_CASE("tau_mu posterior with zero displacement") {
    EmissionSlot s = psi_slot(mat1(2.0), 4.0);
    s.mean = Vector::Zero(1);
    const auto post = tau_mu_posterior(state_of({s}), GammaDist{2.0, 3.0}, MuStatistic::SampledMean);
    REQUIRE(post);
    CHECK(post->shape == doctest::Approx(2.5));
    CHECK(post->rate == doctest::Approx(3.0));
}

TEST_CASE("tau_mu posterior hand example") {
    // sigma = 1, mu = 3, mu0 = 1, Sigma = 2, prior Gamma(1, 1)
    EmissionSlot s;
    s.mean = Vector::Constant(1, 3.0);
    s.cov = mat1(2.0);
    s.prior = niw1(1.0, 1.0, 2.0, 4.0);
    s.posterior = s.prior;
    s.occupancy = 1.0;
    s.seeded = true;
    const auto post = tau_mu_posterior(state_of({s}), GammaDist{1.0, 1.0}, MuStatistic::SampledMean);
    REQUIRE(post);
    CHECK(post->shape == doctest::Approx(1.5));
    CHECK(post->rate == doctest::Approx(2.0));
}

TEST_CASE("batch-mean statistic recovers the frame average") {
    // Posterior of prior (mu0 = 1, sigma = 1) after 4 frames averaging 3.
    EmissionSlot s;
    s.mean = Vector::Constant(1, -50.0);  // a sampled draw far away; must be ignored
    s.cov = mat1(2.0);
    s.prior = niw1(1.0, 1.0, 2.0, 4.0);
    s.posterior = niw_posterior(s.prior, 4.0, Vector::Constant(1, 3.0), mat1(0.5));
    s.occupancy = 4.0;
    s.seeded = true;
    const auto post = tau_mu_posterior(state_of({s}), GammaDist{1.0, 1.0}, MuStatistic::BatchMean);
    REQUIRE(post);
    CHECK(post->rate == doctest::Approx(2.0).epsilon(1e-12));
    // debiased: quad 2 - 1/4
    const auto deb = tau_mu_posterior(state_of({s}), GammaDist{1.0, 1.0}, MuStatistic::DebiasedBatchMean);
    REQUIRE(deb);
    CHECK(deb->rate == doctest::Approx(1.0 + 1.75 / 2.0).epsilon(1e-12));
}

TEST_CASE("tau_mu conjugacy against quadrature") {
    Rng rng(17);
    for (int inst = 0; inst < 10; ++inst) {
        const double a = 1.0 + 3.0 * rng.uniform();
        const double b = 0.5 + 3.0 * rng.uniform();
        const double sigma = 0.2 + 5.0 * rng.uniform();
        const double var = 0.5 + 4.0 * rng.uniform();
        const double mu0 = 10.0 * (rng.uniform() - 0.5);
        const double A = mu0 + 4.0 * (rng.uniform() - 0.5);

        EmissionSlot s;
        s.mean = Vector::Constant(1, A);
        s.cov = mat1(var);
        s.prior = niw1(mu0, sigma, 1.0, 3.0);
        s.posterior = s.prior;
        s.occupancy = 1.0;
        s.seeded = true;
        const auto post = tau_mu_posterior(state_of({s}), GammaDist{a, b}, MuStatistic::SampledMean);
        REQUIRE(post);

        auto unnorm = [&](double tau) {
            return oracle::normal_pdf(A, mu0, var / (tau * sigma)) * oracle::gamma_pdf(tau, a, b);
        };
        const double z = oracle::log_space_integral(unnorm, 1e-12, 200.0, 200000);
        for (double tau : {0.05, 0.3, 0.8, 1.5, 3.0, 6.0}) {
            CHECK(std::abs(unnorm(tau) / z - oracle::gamma_pdf(tau, post->shape, post->rate)) < 1e-8);
        }
    }
}

TEST_CASE("dirichlet target: same rate gives unit ratio") {
    const std::vector<Vector> a{Vector::Constant(3, 2.0)};
    Vector x(3);
    x << 0.2, 0.3, 0.5;
    CHECK(tau_dirichlet_log_target(0.7, a, {x}) - tau_dirichlet_log_target(0.7, a, {x}) == 0.0);
    CHECK(tau_dirichlet_log_target(0.7, a, {x}) ==
          doctest::Approx(oracle::dirichlet_log_pdf(scale_concentration(a[0], 0.7), x)).epsilon(1e-13));
}

TEST_CASE("dirichlet target favours the rate whose mode holds x") {
    Vector a(3);
    a << 3.0, 5.0, 9.0;
    const Vector scaled = scale_concentration(a, 5.0);
    const Vector mode = (scaled.array() - 1.0) / (scaled.array() - 1.0).sum();
    CHECK(tau_dirichlet_log_target(5.0, {a}, {mode}) > tau_dirichlet_log_target(0.1, {a}, {mode}));
}

TEST_CASE("MH step always accepts a proposal equal to the current rate") {
    // A Gamma with enormous shape proposes the mean almost surely.
    const GammaDist sharp{1e12, 1e12};
    Vector x(3);
    x << 0.2, 0.3, 0.5;
    Rng rng(3);
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
        bool ok = false;
        sample_tau_dirichlet(1.0, {Vector::Constant(3, 2.0)}, {x}, sharp, rng, &ok);
        accepted += ok;
    }
    CHECK(accepted == 1000);
}

TEST_CASE("MH chain reproduces the quadrature posterior") {
    Vector a(3), x(3);
    a << 2.0, 3.0, 4.0;
    x << 0.25, 0.3, 0.45;
    const GammaDist prior{2.0, 2.0};
    auto unnorm = [&](double tau) {
        return std::exp(oracle::dirichlet_log_pdf(scale_concentration(a, tau), x)) * oracle::gamma_pdf(tau, 2.0, 2.0);
    };
    const double hi = 8.0;
    const int bins = 50;
    std::vector<double> expected(bins);
    double total = 0.0;
    for (int i = 0; i < bins; ++i) {
        expected[i] = oracle::simpson(unnorm, hi * i / bins, hi * (i + 1) / bins, 200);
        total += expected[i];
    }
    total += oracle::simpson(unnorm, hi, 60.0, 20000);
    Rng rng(8);
    std::vector<double> hist(bins, 0.0);
    double tau = 1.0;
    const int steps = 200000;
    for (int s = 0; s < steps; ++s) {
        tau = sample_tau_dirichlet(tau, {a}, {x}, prior, rng);
        const int b = static_cast<int>(tau / hi * bins);
        if (b < bins) hist[b] += 1.0;
    }
    double tv = 0.0;
    for (int i = 0; i < bins; ++i) tv += std::abs(hist[i] / steps - expected[i] / total);
    CHECK(0.5 * tv < 0.03);
}
