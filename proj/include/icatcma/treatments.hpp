#ifndef ICATCMA_TREATMENTS_HPP
#define ICATCMA_TREATMENTS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icatcma/catcma.hpp"
#include "icatcma/problems.hpp"
#include "icatcma/types.hpp"

namespace icatcma {

// ---------------------------------------------------------------------------
// Hyper-representation: x = phi_w(c) = V c + b.
//
// Packed layout of w (length n (m + 1)): V in row-major order, then b.
// ---------------------------------------------------------------------------

inline Index affine_dim(Index n, Index m) { return n * (m + 1); }

template <typename Scalar = double>
struct AffineMap {
    Matrix<Scalar> V;
    Vector<Scalar> b;
};

template <typename Scalar>
Vector<Scalar> pack_affine(const Matrix<Scalar>& V, const Vector<Scalar>& b)
{
    if (V.rows() != b.size())
        throw std::invalid_argument("pack_affine: V and b disagree on n");
    const Index n = V.rows();
    const Index m = V.cols();
    Vector<Scalar> w(affine_dim(n, m));
    Eigen::Map<RowMajorMatrix<Scalar>>(w.data(), n, m) = V;
    w.tail(n) = b;
    return w;
}

template <typename Scalar>
AffineMap<Scalar> unpack_affine(const Vector<Scalar>& w, Index n, Index m)
{
    if (n < 1 || m < 1 || w.size() != affine_dim(n, m))
        throw std::invalid_argument("unpack_affine: parameter length does not equal n (m + 1)");
    AffineMap<Scalar> map;
    map.V = Eigen::Map<const RowMajorMatrix<Scalar>>(w.data(), n, m);
    map.b = w.tail(n);
    return map;
}

/// V c + b read directly from the packed parameters.
template <typename Scalar>
Vector<Scalar> apply_affine(const Vector<Scalar>& w, const BinaryVector& c, Index n)
{
    const Index m = c.size();
    if (w.size() != affine_dim(n, m))
        throw std::invalid_argument("apply_affine: parameter length does not equal n (m + 1)");
    const Eigen::Map<const RowMajorMatrix<Scalar>> V(w.data(), n, m);
    return V * c.template cast<Scalar>() + w.tail(n);
}

/// F(c, w) = f(c, phi_w(c)). One call of the result is one call of f.
template <typename Scalar, typename Objective>
auto wrap_objective(Objective f, Index n)
{
    return [f = std::move(f), n](const BinaryVector& c, const Vector<Scalar>& w) -> Scalar {
        return f(c, apply_affine(w, c, n));
    };
}

template <typename Scalar>
struct AffineGradient {
    Matrix<Scalar> dV;
    Vector<Scalar> db;
};

/// Gradient of F(c, w) = f_II(c, V c + b) for an affine-optimum instance:
/// with r = V c + b - phi*(c), dF/db = 2 r and dF/dV = 2 r c^T.
/// At V = alpha V* this reduces to dF/db = 2 (b - b*), and at b = b* to
/// dF/dV = 2 (V - alpha V*) c c^T.
template <typename Scalar>
AffineGradient<Scalar> analytic_grad_fII_affine(const ProblemInstance<Scalar>& inst,
                                                const BinaryVector& c, const Matrix<Scalar>& V,
                                                const Vector<Scalar>& b)
{
    if (inst.kind != ProblemKind::F2)
        throw std::invalid_argument("analytic_grad_fII_affine: requires an f2 instance");
    if (V.rows() != inst.n || V.cols() != inst.m || b.size() != inst.n || c.size() != inst.m)
        throw std::invalid_argument("analytic_grad_fII_affine: dimension mismatch");
    const Vector<Scalar> cv = c.template cast<Scalar>();
    const Vector<Scalar> residual = V * cv + b - phi_star(inst, c);
    return {Scalar(2) * residual * cv.transpose(), Scalar(2) * residual};
}

// ---------------------------------------------------------------------------
// Warm starting: q frozen for t_freeze generations, one shared c per
// generation.
// ---------------------------------------------------------------------------

struct TFreezePolicy {
    enum class Kind { Adaptive, Fixed };
    Kind kind = Kind::Adaptive;
    double factor = 5.0;  // A in floor(A * 100 * ell / lambda)
    Index iterations = 0;  // fixed T

    static TFreezePolicy adaptive(double a = 5.0) { return {Kind::Adaptive, a, 0}; }
    static TFreezePolicy fixed(Index t) { return {Kind::Fixed, 0.0, t}; }

    /// "adaptive:A" or "fixed:T".
    static TFreezePolicy parse(std::string_view text)
    {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw std::invalid_argument("t-freeze policy must be adaptive:A or fixed:T, got '"
                                        + std::string(text) + "'");
        const std::string_view kind = text.substr(0, colon);
        const std::string value(text.substr(colon + 1));
        std::size_t used = 0;
        try {
            if (kind == "adaptive") {
                const double a = std::stod(value, &used);
                if (used == value.size() && a >= 0 && std::isfinite(a))
                    return adaptive(a);
            } else if (kind == "fixed") {
                const long long t = std::stoll(value, &used);
                if (used == value.size() && t >= 0)
                    return fixed(static_cast<Index>(t));
            }
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("t-freeze policy must be adaptive:A or fixed:T, got '"
                                    + std::string(text) + "'");
    }

    std::string to_string() const
    {
        if (kind == Kind::Fixed)
            return "fixed:" + std::to_string(iterations);
        std::string a = std::to_string(factor);
        a.erase(a.find_last_not_of('0') + 1);
        if (!a.empty() && a.back() == '.')
            a.pop_back();
        return "adaptive:" + a;
    }

    friend bool operator==(const TFreezePolicy&, const TFreezePolicy&) = default;
};

inline Index resolve_t_freeze(const TFreezePolicy& policy, Index ell, Index lambda)
{
    if (ell < 1 || lambda < 1)
        throw std::invalid_argument("resolve_t_freeze: ell and lambda must be >= 1");
    if (policy.kind == TFreezePolicy::Kind::Fixed)
        return policy.iterations;
    return static_cast<Index>(std::floor(policy.factor * 100.0 * double(ell) / double(lambda)));
}

/// lambda candidates sharing one c drawn from the (frozen) q.
template <typename Scalar>
std::vector<Candidate<Scalar>> warm_start_ask(const CatCMAState<Scalar>& state, Rng& rng)
{
    const BinaryVector shared = sample(state.bernoulli, rng);
    const Matrix<Scalar> xs = sample_population(state.gaussian, state.lambda(), rng);
    std::vector<Candidate<Scalar>> population(static_cast<std::size_t>(state.lambda()));
    for (Index k = 0; k < state.lambda(); ++k) {
        auto& cand = population[static_cast<std::size_t>(k)];
        cand.c = shared;
        cand.v = xs.col(k);
    }
    return population;
}

template <typename Scalar>
void warm_start_tell(CatCMAState<Scalar>& state, std::span<Candidate<Scalar>> population)
{
    tell_gaussian(state, population);
}

// ---------------------------------------------------------------------------
// ICatCMA: CatCMA with optional warm starting and hyper-representation.
// ---------------------------------------------------------------------------

enum class Algorithm { CatCMA, WarmStart, HyperRepresentation, ICatCMA };

inline std::string_view to_string(Algorithm algo)
{
    switch (algo) {
    case Algorithm::CatCMA: return "catcma";
    case Algorithm::WarmStart: return "ws";
    case Algorithm::HyperRepresentation: return "hr";
    case Algorithm::ICatCMA: return "icatcma";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    if (name == "catcma") return Algorithm::CatCMA;
    if (name == "ws") return Algorithm::WarmStart;
    if (name == "hr") return Algorithm::HyperRepresentation;
    if (name == "icatcma") return Algorithm::ICatCMA;
    throw std::invalid_argument("unknown algorithm '" + std::string(name)
                                + "' (expected catcma, ws, hr or icatcma)");
}

inline bool uses_warm_start(Algorithm a)
{
    return a == Algorithm::WarmStart || a == Algorithm::ICatCMA;
}

inline bool uses_hyper_representation(Algorithm a)
{
    return a == Algorithm::HyperRepresentation || a == Algorithm::ICatCMA;
}

template <typename Scalar = double>
class ICatCMA {
public:
    using Objective = std::function<Scalar(const BinaryVector&, const Vector<Scalar>&)>;

    /// Continuous search dimension ell is n(m + 1) with the hyper-representation
    /// and n otherwise. Starts from mean 0 and sigma = 1 / (ell + m).
    ICatCMA(Objective f, Index n, Index m, bool warm_start, bool hyper_representation,
            TFreezePolicy policy = TFreezePolicy::adaptive())
        : objective_(std::move(f)), n_(n), m_(m), warm_start_(warm_start),
          hyper_representation_(hyper_representation)
    {
        if (n < 1 || m < 1)
            throw std::invalid_argument("ICatCMA: n and m must be >= 1");
        if (!objective_)
            throw std::invalid_argument("ICatCMA: empty objective");
        ell_ = hyper_representation_ ? affine_dim(n, m) : n;
        if (hyper_representation_)
            objective_ = wrap_objective<Scalar>(std::move(objective_), n);
        state_ = CatCMAState<Scalar>::initial(m, Vector<Scalar>::Zero(ell_),
                                              Scalar(1) / Scalar(ell_ + m));
        t_freeze_ = warm_start_ ? resolve_t_freeze(policy, ell_, state_.lambda()) : 0;
    }

    bool in_warm_start() const { return warm_start_ && state_.t() < t_freeze_; }

    std::vector<Candidate<Scalar>> ask(Rng& rng) const
    {
        return in_warm_start() ? warm_start_ask(state_, rng) : icatcma::ask(state_, rng);
    }

    void tell(std::span<Candidate<Scalar>> population)
    {
        if (in_warm_start())
            warm_start_tell(state_, population);
        else
            icatcma::tell(state_, population);
    }

    /// Continuous vector in problem space for a candidate.
    Vector<Scalar> decode(const Candidate<Scalar>& cand) const
    {
        return hyper_representation_ ? apply_affine(cand.v, cand.c, n_) : cand.v;
    }

    /// Objective value of a candidate (through phi_w with the
    /// hyper-representation); counts one objective call.
    Scalar evaluate(const Candidate<Scalar>& cand)
    {
        ++objective_calls_;
        return objective_(cand.c, cand.v);
    }

    /// ask, evaluate every candidate, tell.
    void step(Rng& rng)
    {
        auto population = ask(rng);
        for (auto& cand : population)
            cand.value = evaluate(cand);
        tell(population);
    }

    const CatCMAState<Scalar>& state() const { return state_; }
    Index n() const { return n_; }
    Index m() const { return m_; }
    Index continuous_dim() const { return ell_; }
    Index t_freeze() const { return t_freeze_; }
    std::int64_t objective_calls() const { return objective_calls_; }

private:
    Objective objective_;
    Index n_;
    Index m_;
    bool warm_start_;
    bool hyper_representation_;
    Index ell_ = 0;
    Index t_freeze_ = 0;
    CatCMAState<Scalar> state_;
    std::int64_t objective_calls_ = 0;
};

template <typename Scalar = double>
ICatCMA<Scalar> make_icatcma(typename ICatCMA<Scalar>::Objective f, Index n, Index m,
                             Algorithm algo, TFreezePolicy policy = TFreezePolicy::adaptive())
{
    return ICatCMA<Scalar>(std::move(f), n, m, uses_warm_start(algo),
                           uses_hyper_representation(algo), policy);
}

}  // namespace icatcma

#endif  // ICATCMA_TREATMENTS_HPP
