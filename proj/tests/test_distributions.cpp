#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "aohmm/distributions.hpp"
#include "aohmm/errors.hpp"

using namespace aohmm;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Matrix mat1(double x) { return Matrix::Constant(1, 1, x); }

// InvGamma log density written out directly.
double inv_gamma_oracle(double a, double b, double x) {
    return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

// 2x2 inverse-Wishart log density with every term spelled out.
double iw2_oracle(const Matrix& psi, double nu, const Matrix& x) {
    const double det_psi = psi(0, 0) * psi(1, 1) - psi(0, 1) * psi(1, 0);
    const double det_x = x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
    Matrix x_inv(2, 2);
    x_inv << x(1, 1), -x(0, 1), -x(1, 0), x(0, 0);
    x_inv /= det_x;
    const double trace = (psi * x_inv).trace();
    const double log_gamma2 = 0.5 * std::log(std::numbers::pi) + std::lgamma(nu / 2.0) + std::lgamma(nu / 2.0 - 0.5);
    return 0.5 * nu * std::log(det_psi) - nu * std::log(2.0) - log_gamma2 - 0.5 * (nu + 3.0) * std::log(det_x) -
           0.5 * trace;
}

double student_t3_cdf(double t) {
    const double u = t / std::sqrt(3.0);
    return 0.5 + (u / (1.0 + u * u) + std::atan(u)) / std::numbers::pi;
}

}  // namespace

TEST_CASE("mvnormal draws are reproducible for a fixed seed") {
    const MvNormal n{Vector::Zero(2), Matrix::Identity(2, 2)};
    Rng a(7), b(7);
    const Vector x = sample(n, a);
    const Vector y = sample(n, b);
    CHECK(x.size() == 2);
    CHECK(x == y);
}

TEST_CASE("degenerate mvnormal covariance is rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(sample(MvNormal{vec({5.0}), mat1(0.0)}, rng), NumericError);
}

TEST_CASE("mvnormal sample moments") {
    Matrix cov = Matrix::Zero(2, 2);
    cov(0, 0) = 4.0;
    cov(1, 1) = 9.0;
    const MvNormal n{vec({1.0, 2.0}), cov};
    Rng rng(11);
    const int draws = 100000;
    Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
    for (int i = 0; i < draws; ++i) {
        const Vector x = sample(n, rng);
        sum += x;
        sq += x.cwiseProduct(x);
    }
    const Vector mean = sum / draws;
    const Vector var = sq / draws - mean.cwiseProduct(mean);
    CHECK(std::abs(mean[0] - 1.0) < 0.05);
    CHECK(std::abs(mean[1] - 2.0) < 0.05);
    CHECK(std::abs(var[0] / 4.0 - 1.0) < 0.05);
    CHECK(std::abs(var[1] / 9.0 - 1.0) < 0.05);
}

TEST_CASE("inverse wishart mean matches psi over nu - p - 1") {
    const InvWishart iw{mat1(1.0), 5.0};
    Rng rng(3);
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) sum += sample(iw, rng)(0, 0);
    CHECK(std::abs(sum / draws / (1.0 / 3.0) - 1.0) < 0.03);
}

TEST_CASE("univariate inverse wishart equals inverse gamma at a point") {
    const double iw = log_density(InvWishart{mat1(2.0), 4.0}, mat1(1.0));
    CHECK(iw == doctest::Approx(log_density(InvGamma{2.0, 1.0}, 1.0)).epsilon(1e-12));
    CHECK(iw == doctest::Approx(inv_gamma_oracle(2.0, 1.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("inverse wishart scale family") {
    const double c = 3.5;
    Rng a(5), b(6);
    std::vector<double> x, y;
    for (int i = 0; i < 20000; ++i) {
        x.push_back(c * sample(InvWishart{mat1(1.0), 6.0}, a)(0, 0));
        y.push_back(sample(InvWishart{mat1(c), 6.0}, b)(0, 0));
    }
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto i = static_cast<std::size_t>(q * x.size());
        CHECK(std::abs(x[i] / y[i] - 1.0) < 0.05);
    }
}

TEST_CASE("niw with huge strength pins the mean") {
    const NiwParams p{vec({2.0}), 1e9, mat1(1.0), 5.0};
    Rng rng(9);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, std::abs(sample_niw(p, rng).mean[0] - 2.0));
    CHECK(worst < 1e-3);
}

TEST_CASE("niw mean marginal is student t") {
    // nu = 3, d = 1: mu ~ t_3(0, Psi / (sigma * 3))
    const NiwParams p{vec({0.0}), 1.0, mat1(1.0), 3.0};
    Rng rng(21);
    const int n = 10000;
    std::vector<double> draws;
    for (int i = 0; i < n; ++i) draws.push_back(sample_niw(p, rng).mean[0] * std::sqrt(3.0));
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = student_t3_cdf(draws[i]);
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks < 1.628 / std::sqrt(double(n)));  // p > 0.01
}

TEST_CASE("niw covariance draws stay spd") {
    Matrix psi(2, 2);
    psi << 2.0, 0.3, 0.3, 1.0;
    const NiwParams p{Vector::Zero(2), 0.5, psi, 3.5};
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const Matrix s = sample_niw(p, rng).cov;
        Eigen::SelfAdjointEigenSolver<Matrix> es(s);
        REQUIRE(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("dirichlet means") {
    Rng rng(4);
    const int draws = 100000;
    Vector flat = Vector::Zero(3), skew = Vector::Zero(3);
    for (int i = 0; i < draws; ++i) {
        flat += sample(DirichletDist{vec({1.0, 1.0, 1.0})}, rng);
        skew += sample(DirichletDist{vec({2.0, 3.0, 5.0})}, rng);
    }
    flat /= draws;
    skew /= draws;
    for (int k = 0; k < 3; ++k) CHECK(std::abs(flat[k] * 3.0 - 1.0) < 0.01);
    CHECK(std::abs(skew[0] / 0.2 - 1.0) < 0.01);
    CHECK(std::abs(skew[1] / 0.3 - 1.0) < 0.01);
    CHECK(std::abs(skew[2] / 0.5 - 1.0) < 0.01);
}

TEST_CASE("dirichlet with one dominant concentration") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) CHECK(sample(DirichletDist{vec({1e6, 1.0})}, rng)[0] > 0.99);
}

TEST_CASE("stick breaking degenerate cases") {
    Rng rng(1);
    const Vector one = stick_breaking(1.0, 1, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 1.0);
    for (int i = 0; i < 100; ++i) CHECK(stick_breaking(1e-6, 20, rng)[0] > 0.999);
}

TEST_CASE("stick breaking weight expectations follow GEM") {
    const double g = 5.0;
    Rng rng(13);
    const int draws = 100000;
    Vector sum = Vector::Zero(50);
    for (int i = 0; i < draws; ++i) sum += stick_breaking(g, 50, rng);
    sum /= draws;
    for (int k = 1; k <= 10; ++k) {
        const double expected = std::pow(g / (1.0 + g), k - 1) / (1.0 + g);
        CHECK(std::abs(sum[k - 1] / expected - 1.0) < 0.05);
    }
}

TEST_CASE("closed-form log densities") {
    CHECK(log_density(InvGamma{1.0, 1.0}, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(log_density(DirichletDist{vec({1.0, 1.0})}, vec({0.5, 0.5})) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    const Matrix i2 = Matrix::Identity(2, 2);
    CHECK(log_density(InvWishart{i2, 4.0}, i2) == doctest::Approx(iw2_oracle(i2, 4.0, i2)).epsilon(1e-12));
    Matrix psi(2, 2), x(2, 2);
    psi << 3.0, 0.5, 0.5, 2.0;
    x << 1.2, -0.2, -0.2, 0.7;
    CHECK(log_density(InvWishart{psi, 6.5}, x) == doctest::Approx(iw2_oracle(psi, 6.5, x)).epsilon(1e-12));
}

TEST_CASE("densities outside support") {
    CHECK(std::isinf(log_density(InvGamma{1.0, 1.0}, -1.0)));
    CHECK(std::isinf(log_density(GammaDist{2.0, 1.0}, 0.0)));
    CHECK(std::isinf(log_density(DirichletDist{vec({1.0, 1.0})}, vec({1.2, -0.2}))));
}

TEST_CASE("niw posterior hand example") {
    // data {2, 2, 2}: mean 2, scatter 0
    const NiwParams prior{vec({0.0}), 1.0, mat1(1.0), 3.0};
    const NiwParams post = niw_posterior(prior, 3.0, vec({2.0}), mat1(0.0));
    CHECK(post.mean[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(post.strength == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(post.dof == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(post.scale(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("invalid parameters throw") {
    Rng rng(1);
    CHECK_THROWS_AS(sample(InvWishart{mat1(1.0), 0.0}, rng), ParameterError);
    CHECK_THROWS_AS(sample(DirichletDist{vec({1.0, -1.0})}, rng), ParameterError);
    CHECK_THROWS(spd_cholesky(Matrix()));
}

TEST_CASE("rng serialization round trip") {
    Rng a(99);
    for (int i = 0; i < 10; ++i) a.normal();
    Rng b(1);
    b.deserialize(a.serialize());
    CHECK(a == b);
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(0.3) == b.gamma(0.3));
}
