#pragma once

#include <Eigen/Dense>

#include "aohmm/rng.hpp"

namespace aohmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct MvNormal {
    Vector mean;
    Matrix cov;
};

struct InvWishart {
    Matrix scale;  // Psi
    double dof = 0.0;
};

struct InvGamma {
    double shape = 1.0;
    double scale = 1.0;
};

struct GammaDist {
    double shape = 1.0;
    double rate = 1.0;
    double mean() const { return shape / rate; }
};

struct DirichletDist {
    Vector concentration;
};

// Normal-Inverse-Wishart: Sigma ~ IW(scale, dof), mu | Sigma ~ N(mean, Sigma / strength).
struct NiwParams {
    Vector mean;
    double strength = 1.0;
    Matrix scale;
    double dof = 0.0;

    int dim() const { return static_cast<int>(mean.size()); }
};

struct NiwDraw {
    Vector mean;
    Matrix cov;
};

// Lower Cholesky factor of an SPD matrix. On failure retries once with
// 1e-8 * trace / d added to the diagonal, then throws NumericError.
Matrix spd_cholesky(const Matrix& m);

Vector sample(const MvNormal& dist, Rng& rng);
Matrix sample(const InvWishart& dist, Rng& rng);
double sample(const InvGamma& dist, Rng& rng);
double sample(const GammaDist& dist, Rng& rng);
Vector sample(const DirichletDist& dist, Rng& rng);
NiwDraw sample_niw(const NiwParams& prior, Rng& rng);

// Conjugate NIW update with `count` observations whose sample mean is
// `sample_mean` and centred scatter matrix is `scatter`.
NiwParams niw_posterior(const NiwParams& prior, double count, const Vector& sample_mean, const Matrix& scatter);

// GEM(gamma) truncated at `count` weights; residual mass goes to the last entry.
Vector stick_breaking(double gamma, int count, Rng& rng);

// Log densities return -infinity outside the support.
double log_density(const MvNormal& dist, const Vector& x);
double log_density(const InvWishart& dist, const Matrix& x);
double log_density(const InvGamma& dist, double x);
double log_density(const GammaDist& dist, double x);
double log_density(const DirichletDist& dist, const Vector& x);

double log_multivariate_gamma(double a, int p);

}  // namespace aohmm
