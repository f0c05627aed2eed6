#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adling/autodiff/tensor.hpp"

namespace adling::interpret {

struct KMeansOptions {
  std::size_t k = 10;
  std::size_t max_iter = 100;
  double tol = 1e-6;  // stop once no centroid moves farther than this
};

struct KMeansResult {
  ad::Tensor centroids;                // [k x dim]
  std::vector<std::size_t> assignment;  // nearest centroid per row, ties to the lowest id
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia after each assignment step; non-increasing.
  std::vector<double> inertia_trace;
  std::uint64_t seed = 0;
};

/// k-means++ seeding under `seed`, Lloyd iterations, then
/// single-point (Hartigan) transfers until none lowers the inertia. A
/// cluster that comes up empty takes the point farthest from its own
/// centroid. Throws
/// PreconditionError unless 1 <= k <= rows.
KMeansResult kmeans(const ad::Tensor& points, const KMeansOptions& options, std::uint64_t seed);

/// Lowest-inertia run over the given seeds; ties keep the earlier seed.
KMeansResult kmeans_best_of(const ad::Tensor& points, const KMeansOptions& options,
                            std::span<const std::uint64_t> seeds);

/// `restarts` seeds derived from `root_seed`.
std::vector<std::uint64_t> restart_seeds(std::uint64_t root_seed, std::size_t restarts);

/// Sum of squared distances of each row to its assigned centroid.
double inertia(const ad::Tensor& points, const ad::Tensor& centroids, std::span<const std::size_t> assignment);

}  // namespace adling::interpret
