#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace endgame::geo {

template <class Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;
using Point = Point2<double>;

/// Planar Euclidean distance in km.
template <class DerivedA, class DerivedB>
auto distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).norm();
}

/// Columns of a 2 x n matrix from a point list.
template <class Scalar = double>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> to_matrix(std::span<const Point2<Scalar>> points) {
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> m(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = points[i];
  return m;
}

/// Symmetric pairwise distance matrix over the columns of `nodes`.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> distance_matrix(
    const Eigen::MatrixBase<Derived>& nodes) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = nodes.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = Scalar(0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (nodes.col(i) - nodes.col(j)).norm();
    }
  }
  return d;
}

}  // namespace endgame::geo
