#include "aohmm/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "aohmm/errors.hpp"

namespace aohmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kJitter = 1e-8;

double log_det_from_cholesky(const Matrix& chol) {
    return 2.0 * chol.diagonal().array().log().sum();
}

bool try_cholesky(const Matrix& m, Matrix& out) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return false;
    out = llt.matrixL();
    return out.diagonal().minCoeff() > 0.0 && out.allFinite();
}

void require(bool ok, const char* what) {
    if (!ok) throw ParameterError(what);
}

}  // namespace

Matrix spd_cholesky(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw NumericError("covariance must be square and non-empty");
    Matrix chol;
    if (try_cholesky(m, chol)) return chol;
    const double d = static_cast<double>(m.rows());
    const double jitter = kJitter * m.trace() / d;
    if (jitter > 0.0 && std::isfinite(jitter)) {
        Matrix bumped = m;
        bumped.diagonal().array() += jitter;
        if (try_cholesky(bumped, chol)) return chol;
    }
    throw NumericError("matrix is not symmetric positive-definite");
}

double log_multivariate_gamma(double a, int p) {
    double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
    for (int j = 0; j < p; ++j) out += std::lgamma(a - 0.5 * j);
    return out;
}

Vector sample(const MvNormal& dist, Rng& rng) {
    require(dist.mean.size() >= 1 && dist.cov.rows() == dist.mean.size(), "MvNormal dimensions");
    const Matrix chol = spd_cholesky(dist.cov);
    Vector z(dist.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return dist.mean + chol * z;
}

Matrix sample(const InvWishart& dist, Rng& rng) {
    const int p = static_cast<int>(dist.scale.rows());
    require(p >= 1 && dist.scale.cols() == p, "InvWishart scale must be square");
    require(dist.dof > p - 1, "InvWishart dof must exceed p - 1");
    // Bartlett decomposition of the Wishart(Psi^-1, nu) precision.
    const Matrix scale_chol = spd_cholesky(dist.scale);
    const Matrix identity = Matrix::Identity(p, p);
    const Matrix scale_inv = scale_chol.triangularView<Eigen::Lower>().transpose().solve(
        scale_chol.triangularView<Eigen::Lower>().solve(identity));
    const Matrix prec_chol = spd_cholesky(0.5 * (scale_inv + scale_inv.transpose()));

    Matrix bartlett = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        bartlett(i, i) = std::sqrt(rng.chi_square(dist.dof - i));
        for (int j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    const Matrix t = prec_chol * bartlett;
    const Matrix t_inv = t.triangularView<Eigen::Lower>().solve(identity);
    Matrix sigma = t_inv.transpose() * t_inv;
    return 0.5 * (sigma + sigma.transpose());
}

double sample(const InvGamma& dist, Rng& rng) {
    require(dist.shape > 0.0 && dist.scale > 0.0, "InvGamma parameters must be positive");
    return dist.scale / rng.gamma(dist.shape);
}

double sample(const GammaDist& dist, Rng& rng) {
    require(dist.shape > 0.0 && dist.rate > 0.0, "Gamma parameters must be positive");
    return rng.gamma(dist.shape) / dist.rate;
}

Vector sample(const DirichletDist& dist, Rng& rng) {
    const Eigen::Index n = dist.concentration.size();
    require(n >= 1, "Dirichlet needs at least one component");
    require(dist.concentration.minCoeff() > 0.0 && dist.concentration.allFinite(),
            "Dirichlet concentrations must be positive");
    Vector logs(n);
    for (Eigen::Index i = 0; i < n; ++i) logs[i] = rng.log_gamma(dist.concentration[i]);
    const double top = logs.maxCoeff();
    Vector x = (logs.array() - top).exp();
    x /= x.sum();
    // Keep every entry strictly positive so log densities stay finite.
    constexpr double tiny = std::numeric_limits<double>::min();
    bool floored = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (x[i] < tiny) {
            x[i] = tiny;
            floored = true;
        }
    }
    if (floored) x /= x.sum();
    return x;
}

NiwDraw sample_niw(const NiwParams& prior, Rng& rng) {
    require(prior.strength > 0.0, "NIW strength must be positive");
    NiwDraw out;
    out.cov = sample(InvWishart{prior.scale, prior.dof}, rng);
    out.mean = sample(MvNormal{prior.mean, out.cov / prior.strength}, rng);
    return out;
}

NiwParams niw_posterior(const NiwParams& prior, double count, const Vector& sample_mean, const Matrix& scatter) {
    if (count <= 0.0) return prior;
    NiwParams post;
    const double strength = prior.strength + count;
    post.strength = strength;
    post.mean = (prior.strength * prior.mean + count * sample_mean) / strength;
    post.dof = prior.dof + count;
    const Vector diff = sample_mean - prior.mean;
    post.scale = prior.scale + scatter + (prior.strength * count / strength) * (diff * diff.transpose());
    post.scale = 0.5 * (post.scale + post.scale.transpose());
    return post;
}

Vector stick_breaking(double gamma, int count, Rng& rng) {
    require(gamma > 0.0, "stick-breaking concentration must be positive");
    require(count >= 1, "stick-breaking needs at least one weight");
    Vector w(count);
    double remaining = 1.0;
    for (int k = 0; k + 1 < count; ++k) {
        // Beta(1, gamma) via inversion: 1 - U^(1/gamma)
        const double v = -std::expm1(std::log(rng.uniform()) / gamma);
        w[k] = remaining * v;
        remaining -= w[k];
        if (remaining < 0.0) remaining = 0.0;
    }
    w[count - 1] = remaining;
    return w;
}

double log_density(const MvNormal& dist, const Vector& x) {
    const Matrix chol = spd_cholesky(dist.cov);
    const Vector diff = x - dist.mean;
    const Vector white = chol.triangularView<Eigen::Lower>().solve(diff);
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_from_cholesky(chol) + white.squaredNorm());
}

double log_density(const InvWishart& dist, const Matrix& x) {
    const int p = static_cast<int>(dist.scale.rows());
    require(dist.dof > p - 1, "InvWishart dof must exceed p - 1");
    Matrix x_chol;
    if (x.rows() != p || !try_cholesky(x, x_chol)) return kNegInf;
    const Matrix scale_chol = spd_cholesky(dist.scale);
    const Matrix identity = Matrix::Identity(p, p);
    const Matrix x_inv = x_chol.triangularView<Eigen::Lower>().transpose().solve(
        x_chol.triangularView<Eigen::Lower>().solve(identity));
    const double nu = dist.dof;
    return 0.5 * nu * log_det_from_cholesky(scale_chol) - 0.5 * nu * p * std::log(2.0) -
           log_multivariate_gamma(0.5 * nu, p) - 0.5 * (nu + p + 1) * log_det_from_cholesky(x_chol) -
           0.5 * (dist.scale * x_inv).trace();
}

double log_density(const InvGamma& dist, double x) {
    require(dist.shape > 0.0 && dist.scale > 0.0, "InvGamma parameters must be positive");
    if (!(x > 0.0)) return kNegInf;
    return dist.shape * std::log(dist.scale) - std::lgamma(dist.shape) - (dist.shape + 1.0) * std::log(x) -
           dist.scale / x;
}

double log_density(const GammaDist& dist, double x) {
    require(dist.shape > 0.0 && dist.rate > 0.0, "Gamma parameters must be positive");
    if (!(x > 0.0)) return kNegInf;
    return dist.shape * std::log(dist.rate) - std::lgamma(dist.shape) + (dist.shape - 1.0) * std::log(x) -
           dist.rate * x;
}

double log_density(const DirichletDist& dist, const Vector& x) {
    const Vector& a = dist.concentration;
    require(a.size() >= 1 && a.minCoeff() > 0.0, "Dirichlet concentrations must be positive");
    if (x.size() != a.size() || x.minCoeff() <= 0.0 || std::abs(x.sum() - 1.0) > 1e-8) return kNegInf;
    double out = std::lgamma(a.sum());
    for (Eigen::Index i = 0; i < a.size(); ++i) out += (a[i] - 1.0) * std::log(x[i]) - std::lgamma(a[i]);
    return out;
}

}  // namespace aohmm
