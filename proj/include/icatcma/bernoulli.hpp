#ifndef ICATCMA_BERNOULLI_HPP
#define ICATCMA_BERNOULLI_HPP

#include <cmath>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "icatcma/types.hpp"

namespace icatcma {

/// Margin parameter: the probability that a sample hits the all-margin corner.
inline constexpr double kDefaultMarginXi = 0.27;

/// Constant of the trust-region (delta) adaptation. Not the interaction strength.
inline constexpr double kAsngAlpha = 1.5;

template <typename Scalar>
struct Margins {
    Vector<Scalar> q_min;
    Vector<Scalar> q_max;
};

/// q_min_i = 1 - (1 - xi)^(1/m), q_max = 1 - q_min.
template <typename Scalar = double>
Margins<Scalar> margin_bounds(Index m, Scalar xi = Scalar(kDefaultMarginXi))
{
    if (m < 1)
        throw std::invalid_argument("margin_bounds: m must be >= 1");
    if (!(xi > Scalar(0) && xi < Scalar(1)))
        throw std::invalid_argument("margin_bounds: xi must lie in (0, 1)");
    const Scalar lo = Scalar(1) - std::pow(Scalar(1) - xi, Scalar(1) / Scalar(m));
    return {Vector<Scalar>::Constant(m, lo), Vector<Scalar>::Constant(m, Scalar(1) - lo)};
}

/// Bernoulli half of the CatCMA sampling distribution, together with the
/// adaptive learning-rate state (delta, s, gamma).
template <typename Scalar = double>
struct BernoulliModel {
    Vector<Scalar> q;
    Vector<Scalar> q_min;
    Vector<Scalar> q_max;
    Scalar delta = Scalar(1);
    Vector<Scalar> s;
    Scalar gamma = Scalar(0);

    Index dim() const { return q.size(); }

    /// Maximum-entropy start q = 0.5, delta = 1, s = 0, gamma = 0.
    static BernoulliModel initial(Index m, Scalar xi = Scalar(kDefaultMarginXi))
    {
        auto margins = margin_bounds<Scalar>(m, xi);
        BernoulliModel model;
        model.q = Vector<Scalar>::Constant(m, Scalar(0.5));
        model.q_min = std::move(margins.q_min);
        model.q_max = std::move(margins.q_max);
        model.s = Vector<Scalar>::Zero(m);
        return model;
    }
};

template <typename Scalar>
BinaryVector sample(const BernoulliModel<Scalar>& model, Rng& rng)
{
    std::uniform_real_distribution<Scalar> uniform(Scalar(0), Scalar(1));
    BinaryVector c(model.dim());
    for (Index i = 0; i < c.size(); ++i)
        c[i] = uniform(rng) < model.q[i] ? 1 : 0;
    return c;
}

template <typename Scalar>
Scalar log_pmf(const Vector<Scalar>& q, const BinaryVector& c)
{
    if (q.size() != c.size())
        throw std::invalid_argument("log_pmf: dimension mismatch");
    Scalar sum(0);
    for (Index i = 0; i < q.size(); ++i) {
        if (!(q[i] > Scalar(0) && q[i] < Scalar(1)))
            throw std::domain_error("log_pmf: probabilities must lie strictly inside (0, 1)");
        sum += c[i] ? std::log(q[i]) : std::log1p(-q[i]);
    }
    return sum;
}

/// Diagonal of the Fisher information matrix, 1 / (q_i (1 - q_i)).
template <typename Scalar>
Vector<Scalar> fisher_diag(const Vector<Scalar>& q)
{
    if (!((q.array() > Scalar(0)).all() && (q.array() < Scalar(1)).all()))
        throw std::domain_error("fisher_diag: probabilities must lie strictly inside (0, 1)");
    return (q.array() * (Scalar(1) - q.array())).inverse().matrix();
}

/// Mahalanobis norm of g under the diagonal Fisher metric at q.
template <typename Scalar>
Scalar fisher_norm(const Vector<Scalar>& q, const Vector<Scalar>& g)
{
    return std::sqrt((g.array().square() * fisher_diag(q).array()).sum());
}

/// G = sum_k w_{rank(k)} (c_k - q). Ranks are 1-based; weights are indexed by rank.
template <typename Scalar>
Vector<Scalar> natural_gradient(const Vector<Scalar>& q, std::span<const BinaryVector> binaries,
                                std::span<const Index> ranks, const Vector<Scalar>& weights)
{
    if (binaries.empty())
        throw std::invalid_argument("natural_gradient: empty population");
    if (binaries.size() != ranks.size())
        throw std::invalid_argument("natural_gradient: ranks do not match population");
    Vector<Scalar> g = Vector<Scalar>::Zero(q.size());
    for (std::size_t k = 0; k < binaries.size(); ++k) {
        const Scalar w = weights[ranks[k] - 1];
        if (w == Scalar(0))
            continue;
        g += w * (binaries[k].template cast<Scalar>() - q);
    }
    return g;
}

/// eta = delta / ||G||_F(q). Returns 0 for a null gradient, in which case the
/// caller skips the update.
template <typename Scalar>
Scalar learning_rate(const BernoulliModel<Scalar>& model, const Vector<Scalar>& g)
{
    const Scalar norm = fisher_norm(model.q, g);
    if (!(norm > Scalar(0)))
        return Scalar(0);
    return model.delta / norm;
}

/// Accumulates G into (s, gamma) and adapts delta. Uses the current q and the
/// current delta (through beta = delta / sqrt(m)). delta is capped at sqrt(m).
template <typename Scalar>
void asng_update(BernoulliModel<Scalar>& model, const Vector<Scalar>& g)
{
    const Scalar beta = model.delta / std::sqrt(Scalar(model.dim()));
    const Vector<Scalar> fisher = fisher_diag(model.q);
    const Scalar rate = beta * (Scalar(2) - beta);
    model.s = (Scalar(1) - beta) * model.s
              + std::sqrt(rate) * (fisher.array().sqrt() * g.array()).matrix();
    model.gamma = (Scalar(1) - beta) * (Scalar(1) - beta) * model.gamma
                  + rate * (g.array().square() * fisher.array()).sum();
    model.delta *= std::exp(beta * (model.s.squaredNorm() / Scalar(kAsngAlpha) - model.gamma));
    // Keep beta <= 1. Past that the (1 - beta) factors change sign, and beyond
    // beta = 2 the accumulation rate has no real square root.
    model.delta = std::min(model.delta, std::sqrt(Scalar(model.dim())));
}

/// q <- clip(q + eta G, q_min, q_max).
template <typename Scalar>
void update_and_clip(BernoulliModel<Scalar>& model, Scalar eta, const Vector<Scalar>& g)
{
    model.q = (model.q + eta * g).cwiseMax(model.q_min).cwiseMin(model.q_max);
}

/// Full Bernoulli step for one generation: learning rate, q update, ASNG
/// update and clip. Returns false (and leaves the model untouched) when the
/// gradient has zero Fisher norm.
template <typename Scalar>
bool update(BernoulliModel<Scalar>& model, const Vector<Scalar>& g)
{
    const Scalar eta = learning_rate(model, g);
    if (eta == Scalar(0))
        return false;
    // The trust region accumulates the step actually taken, eta G / delta,
    // which is G normalized to unit Fisher norm.
    asng_update(model, Vector<Scalar>(g / fisher_norm(model.q, g)));
    update_and_clip(model, eta, g);
    return true;
}

}  // namespace icatcma

#endif  // ICATCMA_BERNOULLI_HPP
