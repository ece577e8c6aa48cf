#pragma once

#include "vdup/dense.hpp"
#include "vdup/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace vdup {

template <typename Scalar>
struct KMeansResult {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix centroids;                     // dim x k
  std::vector<Eigen::Index> labels;     // one per input point
  std::vector<Scalar> inertia_history;  // after each assignment step
  int iterations = 0;

  Scalar inertia() const { return inertia_history.empty() ? Scalar(0) : inertia_history.back(); }
};

namespace detail {

/// Uniform double in [0,1) from the top 53 bits; independent of the standard
/// library's distribution implementations so results match across toolchains.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Scalar, typename DerivedP>
Scalar assign_all(const Eigen::MatrixBase<DerivedP>& points,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centroids,
                  std::vector<Eigen::Index>& labels, std::vector<Scalar>& distances) {
  const Eigen::Index n = points.cols();
  labels.resize(n);
  distances.resize(n);
  Scalar inertia(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    labels[i] = nearest_centroid(points.col(i), centroids, &distances[i]);
    inertia += distances[i];
  }
  return inertia;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding.
///
/// `points` holds one point per column. Deterministic for a fixed
/// (points, k, seed). Stops after `max_iters` updates or once no centroid
/// moves by `tol` or more. A cluster left empty after an assignment step is
/// re-seeded at the point farthest from its assigned centroid.
template <typename Scalar, typename DerivedP>
KMeansResult<Scalar> kmeans(const Eigen::MatrixBase<DerivedP>& points, Eigen::Index k,
                            std::uint64_t seed, int max_iters = 100, Scalar tol = Scalar(1e-4)) {
  using Matrix = typename KMeansResult<Scalar>::Matrix;
  const Eigen::Index n = points.cols();
  const Eigen::Index dim = points.rows();
  if (k < 1) fail(ErrorKind::Validation, "k-means: k must be >= 1");
  if (n < k) {
    fail(ErrorKind::InsufficientData, "k-means: " + std::to_string(n) +
                                          " feature vectors are fewer than k=" + std::to_string(k));
  }
  if (max_iters < 1) fail(ErrorKind::Validation, "k-means: max_iters must be >= 1");

  std::mt19937_64 rng(seed);
  Matrix centroids(dim, k);

  // k-means++ seeding.
  std::vector<bool> chosen(n, false);
  std::vector<Scalar> d2(n, std::numeric_limits<Scalar>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(detail::unit_draw(rng) * static_cast<double>(n));
  centroids.col(0) = points.col(first);
  chosen[first] = true;
  for (Eigen::Index c = 1; c < k; ++c) {
    Scalar total(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.col(i) - centroids.col(c - 1)).squaredNorm());
      total += d2[i];
    }
    Eigen::Index pick = -1;
    if (total > Scalar(0)) {
      const Scalar target = static_cast<Scalar>(detail::unit_draw(rng)) * total;
      Scalar cumulative(0);
      for (Eigen::Index i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (d2[i] > Scalar(0) && cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > Scalar(0)) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Fewer distinct points than k: fall back to the next unused index.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centroids.col(c) = points.col(pick);
  }

  KMeansResult<Scalar> result;
  std::vector<Scalar> distances;
  std::vector<Eigen::Index> counts(k);
  int it = 0;
  for (; it < max_iters; ++it) {
    result.inertia_history.push_back(
        detail::assign_all<Scalar>(points, centroids, result.labels, distances));

    Matrix updated = Matrix::Zero(dim, k);
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      updated.col(result.labels[i]) += points.col(i);
      ++counts[result.labels[i]];
    }
    std::vector<bool> reseeded(n, false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        updated.col(c) /= static_cast<Scalar>(counts[c]);
        continue;
      }
      Eigen::Index far = -1;
      Scalar far_d(-1);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!reseeded[i] && distances[i] > far_d) {
          far_d = distances[i];
          far = i;
        }
      }
      reseeded[far] = true;
      updated.col(c) = points.col(far);
    }

    Scalar shift(0);
    for (Eigen::Index c = 0; c < k; ++c) {
      shift = std::max(shift, (updated.col(c) - centroids.col(c)).norm());
    }
    centroids = std::move(updated);
    if (shift < tol) {
      ++it;
      break;
    }
  }
  result.inertia_history.push_back(
      detail::assign_all<Scalar>(points, centroids, result.labels, distances));
  result.centroids = std::move(centroids);
  result.iterations = it;
  return result;
}

}  // namespace vdup
