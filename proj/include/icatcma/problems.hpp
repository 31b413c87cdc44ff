#ifndef ICATCMA_PROBLEMS_HPP
#define ICATCMA_PROBLEMS_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "icatcma/types.hpp"

namespace icatcma {

/// Test problems with binary/continuous interaction.
///
///   F1      ||x (.) c - b*||^2                    (masking, type I)
///   F2      f_c(c) + ||x - phi*(c)||^2            (moving optimum, type II)
///   F2Tanh  F2 with phi*(c) = tanh(alpha V* c + b*)
///   F3      ||x (.) c - phi*(c)||^2               (both)
///
/// with f_c(c) = sum_i (1 - c_i) and phi*(c) = alpha V* c + b*.
enum class ProblemKind { F1, F2, F2Tanh, F3 };

inline std::string_view to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::F1: return "f1";
    case ProblemKind::F2: return "f2";
    case ProblemKind::F2Tanh: return "f2tanh";
    case ProblemKind::F3: return "f3";
    }
    return "?";
}

inline ProblemKind parse_problem_kind(std::string_view name)
{
    if (name == "f1") return ProblemKind::F1;
    if (name == "f2") return ProblemKind::F2;
    if (name == "f2tanh") return ProblemKind::F2Tanh;
    if (name == "f3") return ProblemKind::F3;
    throw std::invalid_argument("unknown problem kind '" + std::string(name)
                                + "' (expected f1, f2, f2tanh or f3)");
}

inline bool requires_square(ProblemKind kind)
{
    return kind == ProblemKind::F1 || kind == ProblemKind::F3;
}

template <typename Scalar = double>
struct ProblemInstance {
    ProblemKind kind = ProblemKind::F2;
    Index n = 0;
    Index m = 0;
    Scalar alpha = 0;
    Matrix<Scalar> V_star;  // n x m, ||V*||_F = 1
    Vector<Scalar> b_star;  // ||b*||_2 = 1
    std::uint64_t seed = 0;
};

/// Draws V* and b* i.i.d. N(0, 1) from a stream seeded with `seed` and
/// normalizes both to unit norm. b* is redrawn in the (measure zero) case of
/// a vanishing component.
template <typename Scalar = double>
ProblemInstance<Scalar> generate_instance(ProblemKind kind, Index n, Index m, Scalar alpha,
                                          std::uint64_t seed)
{
    if (n < 1 || m < 1)
        throw std::invalid_argument("generate_instance: n and m must be >= 1");
    if (!(alpha >= 0))
        throw std::invalid_argument("generate_instance: alpha must be >= 0");
    if (requires_square(kind) && n != m)
        throw std::invalid_argument("generate_instance: " + std::string(to_string(kind))
                                    + " requires n == m");

    Rng rng(seed);
    std::normal_distribution<Scalar> normal;
    ProblemInstance<Scalar> inst;
    inst.kind = kind;
    inst.n = n;
    inst.m = m;
    inst.alpha = alpha;
    inst.seed = seed;
    inst.V_star.resize(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j)
            inst.V_star(i, j) = normal(rng);
    inst.V_star /= inst.V_star.norm();
    do {
        inst.b_star.resize(n);
        for (Index i = 0; i < n; ++i)
            inst.b_star[i] = normal(rng);
        inst.b_star /= inst.b_star.norm();
    } while (inst.b_star.cwiseAbs().minCoeff() <= Scalar(1e-12));
    return inst;
}

template <typename Scalar>
Scalar binary_penalty(const BinaryVector& c)
{
    return Scalar(c.size() - c.template cast<Index>().sum());
}

/// Optimal continuous vector for a given c (F2, F2Tanh, F3).
template <typename Scalar>
Vector<Scalar> phi_star(const ProblemInstance<Scalar>& inst, const BinaryVector& c)
{
    if (inst.kind == ProblemKind::F1)
        throw std::invalid_argument("phi_star: not defined for f1");
    if (c.size() != inst.m)
        throw std::invalid_argument("phi_star: binary dimension mismatch");
    Vector<Scalar> affine = inst.alpha * (inst.V_star * c.template cast<Scalar>()) + inst.b_star;
    if (inst.kind == ProblemKind::F2Tanh)
        return affine.array().tanh().matrix();
    return affine;
}

template <typename Scalar, typename Derived>
Scalar evaluate(const ProblemInstance<Scalar>& inst, const BinaryVector& c,
                const Eigen::MatrixBase<Derived>& x)
{
    if (c.size() != inst.m || x.size() != inst.n)
        throw std::invalid_argument("evaluate: dimension mismatch");
    switch (inst.kind) {
    case ProblemKind::F1:
        return (x.cwiseProduct(c.template cast<Scalar>()) - inst.b_star).squaredNorm();
    case ProblemKind::F2:
    case ProblemKind::F2Tanh:
        return binary_penalty<Scalar>(c) + (x - phi_star(inst, c)).squaredNorm();
    case ProblemKind::F3:
        return (x.cwiseProduct(c.template cast<Scalar>()) - phi_star(inst, c)).squaredNorm();
    }
    throw std::logic_error("evaluate: unreachable");
}

template <typename Scalar>
struct Optimum {
    BinaryVector c;
    Vector<Scalar> x;
    Scalar value = std::numeric_limits<Scalar>::infinity();
};

/// Global optimum by enumerating all 2^m binary vectors; the inner minimum
/// over x is analytic for every kind.
template <typename Scalar>
Optimum<Scalar> optimum(const ProblemInstance<Scalar>& inst)
{
    if (inst.m > 20)
        throw std::invalid_argument("optimum: enumeration limited to m <= 20");
    Optimum<Scalar> best;
    BinaryVector c(inst.m);
    for (std::uint64_t code = 0; code < (std::uint64_t(1) << inst.m); ++code) {
        for (Index j = 0; j < inst.m; ++j)
            c[j] = (code >> j) & 1U;
        Vector<Scalar> x;
        Scalar value(0);
        switch (inst.kind) {
        case ProblemKind::F1:
            // Masked coordinates are free; b* is optimal for them as well.
            x = inst.b_star;
            for (Index i = 0; i < inst.n; ++i)
                if (!c[i])
                    value += inst.b_star[i] * inst.b_star[i];
            break;
        case ProblemKind::F2:
        case ProblemKind::F2Tanh:
            x = phi_star(inst, c);
            value = binary_penalty<Scalar>(c);
            break;
        case ProblemKind::F3:
            x = phi_star(inst, c);
            for (Index i = 0; i < inst.n; ++i)
                if (!c[i])
                    value += x[i] * x[i];
            break;
        }
        if (value < best.value) {
            best.c = c;
            best.x = std::move(x);
            best.value = value;
        }
    }
    return best;
}

/// Writes a self-describing, full-precision text record of an instance.
template <typename Scalar>
void write_instance(std::ostream& os, const ProblemInstance<Scalar>& inst)
{
    const auto old_precision = os.precision(std::numeric_limits<Scalar>::max_digits10);
    os << "icatcma-instance 1\n"
       << "kind " << to_string(inst.kind) << '\n'
       << "n " << inst.n << '\n'
       << "m " << inst.m << '\n'
       << "alpha " << inst.alpha << '\n'
       << "seed " << inst.seed << '\n'
       << "V_star";
    for (Index i = 0; i < inst.n; ++i)
        for (Index j = 0; j < inst.m; ++j)
            os << ' ' << inst.V_star(i, j);
    os << "\nb_star";
    for (Index i = 0; i < inst.n; ++i)
        os << ' ' << inst.b_star[i];
    os << '\n';
    os.precision(old_precision);
}

template <typename Scalar = double>
ProblemInstance<Scalar> read_instance(std::istream& is)
{
    auto expect = [&](std::string_view key) {
        std::string word;
        if (!(is >> word) || word != key)
            throw std::runtime_error("read_instance: expected '" + std::string(key) + "', got '"
                                     + word + "'");
    };
    auto number = [&](auto& out, std::string_view what) {
        if (!(is >> out))
            throw std::runtime_error("read_instance: malformed " + std::string(what));
    };
    expect("icatcma-instance");
    int version = 0;
    number(version, "version");
    if (version != 1)
        throw std::runtime_error("read_instance: unsupported version");

    ProblemInstance<Scalar> inst;
    std::string kind;
    expect("kind");
    number(kind, "kind");
    inst.kind = parse_problem_kind(kind);
    expect("n");
    number(inst.n, "n");
    expect("m");
    number(inst.m, "m");
    if (inst.n < 1 || inst.m < 1)
        throw std::runtime_error("read_instance: dimensions must be positive");
    expect("alpha");
    number(inst.alpha, "alpha");
    expect("seed");
    number(inst.seed, "seed");
    inst.V_star.resize(inst.n, inst.m);
    expect("V_star");
    for (Index i = 0; i < inst.n; ++i)
        for (Index j = 0; j < inst.m; ++j)
            number(inst.V_star(i, j), "V_star");
    inst.b_star.resize(inst.n);
    expect("b_star");
    for (Index i = 0; i < inst.n; ++i)
        number(inst.b_star[i], "b_star");
    return inst;
}

}  // namespace icatcma

#endif  // ICATCMA_PROBLEMS_HPP
