#ifndef ICATCMA_GAUSSIAN_HPP
#define ICATCMA_GAUSSIAN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "icatcma/types.hpp"

namespace icatcma {

/// Lower bound on the eigenvalues of sigma^2 C.
inline constexpr double kMinEigenvalue = 1e-30;

/// Raised when the Gaussian model becomes numerically unusable (non-finite or
/// indefinite covariance). The run that owns the model cannot continue.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Population size, recombination weights and learning rates of the CMA
/// block. Weights are indexed by rank (weights[0] belongs to the best).
template <typename Scalar = double>
struct Hyperparameters {
    Index lambda = 0;
    Index mu = 0;
    Vector<Scalar> weights;
    Scalar mu_eff = 0;
    Scalar c_m = 1;
    Scalar c_sigma = 0;
    Scalar d_sigma = 1;
    Scalar c_c = 0;
    Scalar c_1 = 0;
    Scalar c_mu = 0;
};

/// Standard CMA-ES defaults for an N-dimensional continuous part with
/// truncated (nonnegative) log-weights. `lambda` = 0 selects 4 + floor(3 ln N).
template <typename Scalar = double>
Hyperparameters<Scalar> default_hyperparameters(Index n, Index lambda = 0)
{
    if (n < 1)
        throw std::invalid_argument("default_hyperparameters: dimension must be >= 1");
    Hyperparameters<Scalar> h;
    const Scalar dim = Scalar(n);
    h.lambda = lambda > 0 ? lambda : 4 + static_cast<Index>(std::floor(3 * std::log(dim)));
    if (h.lambda < 2)
        throw std::invalid_argument("default_hyperparameters: population size must be >= 2");
    h.mu = h.lambda / 2;

    h.weights = Vector<Scalar>::Zero(h.lambda);
    for (Index k = 0; k < h.mu; ++k)
        h.weights[k] = std::log((Scalar(h.lambda) + 1) / 2) - std::log(Scalar(k + 1));
    h.weights /= h.weights.sum();
    h.mu_eff = Scalar(1) / h.weights.squaredNorm();

    const Scalar mu_eff = h.mu_eff;
    h.c_m = 1;
    h.c_sigma = (mu_eff + 2) / (dim + mu_eff + 5);
    h.d_sigma = 1 + 2 * std::max(Scalar(0), std::sqrt((mu_eff - 1) / (dim + 1)) - 1) + h.c_sigma;
    h.c_c = (4 + mu_eff / dim) / (dim + 4 + 2 * mu_eff / dim);
    h.c_1 = 2 / ((dim + Scalar(1.3)) * (dim + Scalar(1.3)) + mu_eff);
    h.c_mu = std::min(Scalar(1) - h.c_1,
                      2 * (mu_eff - 2 + 1 / mu_eff) / ((dim + 2) * (dim + 2) + mu_eff));
    return h;
}

/// E||N(0, I_N)||, series approximation.
template <typename Scalar = double>
Scalar expected_chi_norm(Index n)
{
    if (n < 1)
        throw std::invalid_argument("expected_chi_norm: dimension must be >= 1");
    const Scalar dim = Scalar(n);
    return std::sqrt(dim) * (1 - 1 / (4 * dim) + 1 / (21 * dim * dim));
}

/// Gaussian half of the CatCMA sampling distribution: N(mean, sigma^2 C).
///
/// The eigendecomposition of C is cached; call decompose() after modifying C
/// directly. All update functions below read the cache of the *current* C.
template <typename Scalar = double>
struct GaussianModel {
    Vector<Scalar> mean;
    Scalar sigma = 1;
    Matrix<Scalar> C;
    Vector<Scalar> p_sigma;
    Vector<Scalar> p_c;
    Index t = 0;

    // Cache: C = B diag(eigenvalues) B^T.
    Matrix<Scalar> B;
    Vector<Scalar> eigenvalues;
    Matrix<Scalar> sqrt_factor;  // B diag(sqrt(eigenvalues))
    Matrix<Scalar> inv_sqrt_C;   // B diag(1/sqrt(eigenvalues)) B^T

    Index dim() const { return mean.size(); }

    static GaussianModel initial(Vector<Scalar> mean, Scalar sigma)
    {
        if (!(sigma > 0))
            throw std::invalid_argument("GaussianModel: sigma must be positive");
        GaussianModel g;
        const Index n = mean.size();
        g.mean = std::move(mean);
        g.sigma = sigma;
        g.C = Matrix<Scalar>::Identity(n, n);
        g.p_sigma = Vector<Scalar>::Zero(n);
        g.p_c = Vector<Scalar>::Zero(n);
        g.decompose();
        return g;
    }

    /// Symmetrizes C and refreshes the eigendecomposition cache.
    void decompose()
    {
        if (!C.allFinite())
            throw NumericalFailure("covariance matrix has non-finite entries");
        C = Scalar(0.5) * (C + C.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(C);
        if (solver.info() != Eigen::Success)
            throw NumericalFailure("eigendecomposition of the covariance matrix failed");
        eigenvalues = solver.eigenvalues();
        if (!(eigenvalues.minCoeff() > 0))
            throw NumericalFailure("covariance matrix lost positive definiteness (min eigenvalue "
                                   + std::to_string(static_cast<double>(eigenvalues.minCoeff()))
                                   + ")");
        B = solver.eigenvectors();
        const Vector<Scalar> d = eigenvalues.array().sqrt();
        sqrt_factor = B * d.asDiagonal();
        inv_sqrt_C = B * d.cwiseInverse().asDiagonal() * B.transpose();
    }
};

/// lambda columns x_k = mean + sigma C^(1/2) z_k.
template <typename Scalar>
Matrix<Scalar> sample_population(const GaussianModel<Scalar>& model, Index lambda, Rng& rng)
{
    std::normal_distribution<Scalar> normal;
    Matrix<Scalar> z(model.dim(), lambda);
    for (Index k = 0; k < lambda; ++k)
        for (Index i = 0; i < model.dim(); ++i)
            z(i, k) = normal(rng);
    Matrix<Scalar> x = model.sigma * model.sqrt_factor * z;
    x.colwise() += model.mean;
    return x;
}

/// mean' = mean + c_m sum_k w_{rank(k)} (x_k - mean). Columns of xs are x_k.
template <typename Scalar>
Vector<Scalar> update_mean(const GaussianModel<Scalar>& model, const Matrix<Scalar>& xs,
                           std::span<const Index> ranks, const Hyperparameters<Scalar>& hyper)
{
    Vector<Scalar> step = Vector<Scalar>::Zero(model.dim());
    for (Index k = 0; k < xs.cols(); ++k) {
        const Scalar w = hyper.weights[ranks[k] - 1];
        if (w != Scalar(0))
            step += w * (xs.col(k) - model.mean);
    }
    return model.mean + hyper.c_m * step;
}

template <typename Scalar>
struct EvolutionPaths {
    Vector<Scalar> p_sigma;
    Vector<Scalar> p_c;
    bool h_sigma = true;
};

/// Cumulates the mean shift into both paths. Reads the pre-update sigma, C and
/// mean of `model`; the stall flag h_sigma uses the model's iteration count.
template <typename Scalar>
EvolutionPaths<Scalar> update_evolution_paths(const GaussianModel<Scalar>& model,
                                              const Vector<Scalar>& new_mean,
                                              const Hyperparameters<Scalar>& hyper)
{
    const Index n = model.dim();
    const Scalar norm = hyper.c_m * hyper.weights.norm();
    const Vector<Scalar> shift = (new_mean - model.mean) / (norm * model.sigma);

    // Both paths measure the mean shift in units of sigma.
    EvolutionPaths<Scalar> paths;
    paths.p_sigma = (1 - hyper.c_sigma) * model.p_sigma
                    + std::sqrt(hyper.c_sigma * (2 - hyper.c_sigma)) * (model.inv_sqrt_C * shift);

    const Scalar decay = std::sqrt(1 - std::pow(1 - hyper.c_sigma, Scalar(2 * (model.t + 1))));
    const Scalar threshold = decay * (Scalar(1.4) + Scalar(2) / Scalar(n + 1))
                             * expected_chi_norm<Scalar>(n);
    paths.h_sigma = paths.p_sigma.norm() < threshold;

    paths.p_c = (1 - hyper.c_c) * model.p_c;
    if (paths.h_sigma)
        paths.p_c += std::sqrt(hyper.c_c * (2 - hyper.c_c)) * shift;
    return paths;
}

/// sigma' = sigma exp((c_sigma / d_sigma)(||p_sigma'|| / E||N(0,I)|| - 1)).
template <typename Scalar>
Scalar update_step_size(Scalar sigma, const Vector<Scalar>& p_sigma,
                        const Hyperparameters<Scalar>& hyper)
{
    const Scalar ratio = p_sigma.norm() / expected_chi_norm<Scalar>(p_sigma.size());
    return sigma * std::exp((hyper.c_sigma / hyper.d_sigma) * (ratio - 1));
}

/// Rank-mu plus rank-one update of C, using the pre-update mean and sigma.
template <typename Scalar>
Matrix<Scalar> update_covariance(const GaussianModel<Scalar>& model, const Matrix<Scalar>& xs,
                                 std::span<const Index> ranks, const Vector<Scalar>& p_c,
                                 bool h_sigma, const Hyperparameters<Scalar>& hyper)
{
    const Index n = model.dim();
    Matrix<Scalar> rank_mu = Matrix<Scalar>::Zero(n, n);
    Scalar weight_sum(0);
    for (Index k = 0; k < xs.cols(); ++k) {
        const Scalar w = hyper.weights[ranks[k] - 1];
        if (w == Scalar(0))
            continue;
        const Vector<Scalar> y = (xs.col(k) - model.mean) / model.sigma;
        rank_mu.noalias() += w * y * y.transpose();
        weight_sum += w;
    }
    const Scalar stall = h_sigma ? Scalar(0) : hyper.c_c * (2 - hyper.c_c);
    Matrix<Scalar> updated = model.C + hyper.c_mu * (rank_mu - weight_sum * model.C)
                             + hyper.c_1 * (p_c * p_c.transpose() - (1 - stall) * model.C);
    return Scalar(0.5) * (updated + updated.transpose());
}

/// sigma <- max(sigma, sqrt(min_eigenvalue / min eig(C))), rounded up so that
/// sigma^2 min eig(C) >= min_eigenvalue holds in floating point. Expects the cache
/// to describe the current C.
template <typename Scalar>
Scalar enforce_sigma_floor(GaussianModel<Scalar>& model,
                           Scalar min_eigenvalue = Scalar(kMinEigenvalue))
{
    const Scalar smallest = model.eigenvalues.minCoeff();
    if (!(smallest > 0))
        throw NumericalFailure("covariance matrix lost positive definiteness");
    if (model.sigma * model.sigma * smallest >= min_eigenvalue)
        return model.sigma;
    Scalar floor = std::sqrt(min_eigenvalue / smallest);
    // The rounded square root can land one ulp short.
    while (floor * floor * smallest < min_eigenvalue)
        floor = std::nextafter(floor, std::numeric_limits<Scalar>::infinity());
    model.sigma = std::max(model.sigma, floor);
    return model.sigma;
}

/// One generation of the Gaussian block: mean, paths, step size, covariance,
/// eigendecomposition and step-size floor. Advances the model's clock.
template <typename Scalar>
void gaussian_step(GaussianModel<Scalar>& model, const Matrix<Scalar>& xs,
                   std::span<const Index> ranks, const Hyperparameters<Scalar>& hyper)
{
    Vector<Scalar> new_mean = update_mean(model, xs, ranks, hyper);
    EvolutionPaths<Scalar> paths = update_evolution_paths(model, new_mean, hyper);
    const Scalar new_sigma = update_step_size(model.sigma, paths.p_sigma, hyper);
    Matrix<Scalar> new_c = update_covariance(model, xs, ranks, paths.p_c, paths.h_sigma, hyper);

    model.mean = std::move(new_mean);
    model.p_sigma = std::move(paths.p_sigma);
    model.p_c = std::move(paths.p_c);
    model.sigma = new_sigma;
    model.C = std::move(new_c);
    ++model.t;
    if (!std::isfinite(model.sigma) || !model.mean.allFinite())
        throw NumericalFailure("Gaussian model has non-finite mean or step size");
    model.decompose();
    enforce_sigma_floor(model);
}

}  // namespace icatcma

#endif  // ICATCMA_GAUSSIAN_HPP
