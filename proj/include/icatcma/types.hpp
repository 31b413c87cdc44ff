#ifndef ICATCMA_TYPES_HPP
#define ICATCMA_TYPES_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace icatcma {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A point of {0,1}^m. Entries are exactly 0 or 1.
using BinaryVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

/// One generator per optimizer run; instance generation uses its own stream.
using Rng = std::mt19937_64;

}  // namespace icatcma

#endif  // ICATCMA_TYPES_HPP
