#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>

namespace vdup {

/// Cosine similarity of two dense vectors; 0 if either has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_dense(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  if (a.size() == b.size() && a == b) return Scalar(1);
  return a.dot(b) / (na * nb);
}

/// Column index of the centroid closest (squared Euclidean) to `x`; ties go to
/// the lowest index. `centroids` holds one centroid per column.
template <typename DerivedX, typename DerivedC>
Eigen::Index nearest_centroid(const Eigen::MatrixBase<DerivedX>& x,
                              const Eigen::MatrixBase<DerivedC>& centroids,
                              typename DerivedX::Scalar* best_distance = nullptr) {
  using Scalar = typename DerivedX::Scalar;
  Eigen::Index best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    const Scalar d = (x - centroids.col(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_distance) *best_distance = best_d;
  return best;
}

}  // namespace vdup
