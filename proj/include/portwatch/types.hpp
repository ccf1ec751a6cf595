#pragma once

#include <Eigen/Core>

namespace portwatch {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Column t of a series matrix is the p-dimensional snapshot at tick t
// (Eigen's default column-major storage keeps snapshots contiguous).
using SeriesMatrix = Matrix<double>;
using BoolMatrix = Matrix<bool>;

}  // namespace portwatch
