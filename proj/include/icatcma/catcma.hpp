#ifndef ICATCMA_CATCMA_HPP
#define ICATCMA_CATCMA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "icatcma/bernoulli.hpp"
#include "icatcma/gaussian.hpp"
#include "icatcma/types.hpp"

namespace icatcma {

/// One sampled pair. `v` is the continuous search vector: either x itself or
/// the parameters w of a hyper-representation map.
template <typename Scalar = double>
struct Candidate {
    BinaryVector c;
    Vector<Scalar> v;
    Scalar value = std::numeric_limits<Scalar>::quiet_NaN();
    Index rank = 0;
};

/// 1-based ascending ranks (minimization). Ties keep the candidate order.
template <typename Scalar>
std::vector<Index> rank(std::span<const Scalar> values)
{
    for (const Scalar v : values)
        if (std::isnan(v))
            throw NumericalFailure("objective returned NaN");
    std::vector<Index> order(values.size());
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] < values[b]; });
    std::vector<Index> ranks(values.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        ranks[order[r]] = static_cast<Index>(r) + 1;
    return ranks;
}

/// Joint state of CatCMA: theta = (q, mean, sigma^2 C) plus bookkeeping.
template <typename Scalar = double>
struct CatCMAState {
    BernoulliModel<Scalar> bernoulli;
    GaussianModel<Scalar> gaussian;
    Hyperparameters<Scalar> hyper;
    std::int64_t evals_used = 0;
    Scalar best_value = std::numeric_limits<Scalar>::infinity();
    Candidate<Scalar> best_candidate;

    Index t() const { return gaussian.t; }
    Index lambda() const { return hyper.lambda; }

    static CatCMAState initial(Index m, Vector<Scalar> mean, Scalar sigma, Index lambda = 0)
    {
        if (m < 1 || mean.size() < 1)
            throw std::invalid_argument("CatCMAState: both dimensions must be >= 1");
        CatCMAState state;
        state.hyper = default_hyperparameters<Scalar>(mean.size(), lambda);
        state.bernoulli = BernoulliModel<Scalar>::initial(m);
        state.gaussian = GaussianModel<Scalar>::initial(std::move(mean), sigma);
        return state;
    }
};

template <typename Scalar>
std::vector<Candidate<Scalar>> ask(const CatCMAState<Scalar>& state, Rng& rng)
{
    const Matrix<Scalar> xs = sample_population(state.gaussian, state.lambda(), rng);
    std::vector<Candidate<Scalar>> population(static_cast<std::size_t>(state.lambda()));
    for (Index k = 0; k < state.lambda(); ++k) {
        auto& cand = population[static_cast<std::size_t>(k)];
        cand.v = xs.col(k);
        cand.c = sample(state.bernoulli, rng);
    }
    return population;
}

namespace detail {

template <typename Scalar>
std::vector<Index> rank_population(const CatCMAState<Scalar>& state,
                                   std::span<Candidate<Scalar>> population)
{
    if (static_cast<Index>(population.size()) != state.lambda())
        throw std::invalid_argument("tell: population size does not match lambda");
    std::vector<Scalar> values(population.size());
    for (std::size_t k = 0; k < population.size(); ++k) {
        values[k] = population[k].value;
        if (!std::isfinite(values[k]))
            throw NumericalFailure("objective returned a non-finite value");
    }
    std::vector<Index> ranks = rank<Scalar>(values);
    for (std::size_t k = 0; k < population.size(); ++k)
        population[k].rank = ranks[k];
    return ranks;
}

template <typename Scalar>
Matrix<Scalar> stack_continuous(std::span<const Candidate<Scalar>> population)
{
    Matrix<Scalar> xs(population.front().v.size(), static_cast<Index>(population.size()));
    for (std::size_t k = 0; k < population.size(); ++k)
        xs.col(static_cast<Index>(k)) = population[k].v;
    return xs;
}

template <typename Scalar>
void refresh_incumbent(CatCMAState<Scalar>& state, std::span<const Candidate<Scalar>> population)
{
    for (const auto& cand : population) {
        if (cand.value < state.best_value) {
            state.best_value = cand.value;
            state.best_candidate = cand;
        }
    }
}

}  // namespace detail

/// Gaussian block of tell only; q and the ASNG state are left untouched.
template <typename Scalar>
void tell_gaussian(CatCMAState<Scalar>& state, std::span<Candidate<Scalar>> population)
{
    const std::vector<Index> ranks = detail::rank_population(state, population);
    const std::span<const Candidate<Scalar>> view(population);
    gaussian_step(state.gaussian, detail::stack_continuous(view), ranks, state.hyper);
    state.evals_used += state.lambda();
    detail::refresh_incumbent(state, view);
}

/// Full CatCMA update from one evaluated population: Gaussian block, then the
/// Bernoulli block (natural gradient, ASNG learning rate, clip).
template <typename Scalar>
void tell(CatCMAState<Scalar>& state, std::span<Candidate<Scalar>> population)
{
    const std::vector<Index> ranks = detail::rank_population(state, population);
    const std::span<const Candidate<Scalar>> view(population);
    gaussian_step(state.gaussian, detail::stack_continuous(view), ranks, state.hyper);

    std::vector<BinaryVector> binaries;
    binaries.reserve(population.size());
    for (const auto& cand : population)
        binaries.push_back(cand.c);
    const Vector<Scalar> g
        = natural_gradient<Scalar>(state.bernoulli.q, binaries, ranks, state.hyper.weights);
    update(state.bernoulli, g);

    state.evals_used += state.lambda();
    detail::refresh_incumbent(state, view);
}

enum class Termination { Continue, Success, Budget };

/// Success (best < target, strict) takes precedence over budget exhaustion.
template <typename Scalar>
Termination should_terminate(const CatCMAState<Scalar>& state, std::int64_t budget, Scalar target)
{
    if (state.best_value < target)
        return Termination::Success;
    if (state.evals_used >= budget)
        return Termination::Budget;
    return Termination::Continue;
}

/// Plain ask/evaluate/tell loop. `objective(c, v)` returns the value.
template <typename Scalar, typename Objective>
Termination run(CatCMAState<Scalar>& state, Objective&& objective, Rng& rng,
                std::int64_t budget, Scalar target)
{
    Termination status = should_terminate(state, budget, target);
    while (status == Termination::Continue) {
        auto population = ask(state, rng);
        for (auto& cand : population)
            cand.value = objective(cand.c, cand.v);
        tell<Scalar>(state, population);
        status = should_terminate(state, budget, target);
    }
    return status;
}

}  // namespace icatcma

#endif  // ICATCMA_CATCMA_HPP
