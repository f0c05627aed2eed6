#include "adling/interpret/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::interpret {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

// Draws an index with probability proportional to weight.
std::size_t draw_weighted(const std::vector<double>& weight, double total, Rng& rng) {
  double target = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i] <= 0.0) continue;
    if (target < weight[i]) return i;
    target -= weight[i];
    last_positive = i;
  }
  return last_positive;  // roundoff ran past the end
}

ad::Tensor plus_plus_seeding(const ad::Tensor& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows(), dim = points.cols();
  ad::Tensor centroids({k, dim});
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t chosen = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(points.row(chosen).data(), dim, centroids.row(c).data());
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c)));
      potential += nearest[i];
    }
    // Once every point coincides with a centroid, fall back to uniform picks.
    chosen = potential > 0.0 ? draw_weighted(nearest, potential, rng) : rng.below(n);
  }
  return centroids;
}

// Returns the inertia of the new assignment.
double assign(const ad::Tensor& points, const ad::Tensor& centroids, std::vector<std::size_t>& assignment,
              std::vector<double>& distance) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = squared_distance(points.row(i), centroids.row(0));
    for (std::size_t c = 1; c < centroids.rows(); ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
    distance[i] = best_d;
    total += best_d;
  }
  return total;
}

// Moves the farthest point of a multi-member cluster into each empty one.
void repair_empty(const ad::Tensor& points, ad::Tensor& centroids, std::vector<std::size_t>& assignment,
                  std::vector<double>& distance) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t c : assignment) ++sizes[c];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    std::size_t far = points.rows();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (sizes[assignment[i]] < 2) continue;
      if (far == points.rows() || distance[i] > distance[far]) far = i;
    }
    if (far == points.rows()) return;  // cannot happen while k <= rows
    --sizes[assignment[far]];
    ++sizes[c];
    assignment[far] = c;
    distance[far] = 0.0;
    std::copy_n(points.row(far).data(), points.cols(), centroids.row(c).data());
  }
}

// Mean of each cluster's members; returns the largest centroid move.
double update_centroids(const ad::Tensor& points, ad::Tensor& centroids, const std::vector<std::size_t>& assignment) {
  const std::size_t k = centroids.rows(), dim = points.cols();
  ad::Tensor sums({k, dim}, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto row = points.row(i);
    auto acc = sums.row(assignment[i]);
    for (std::size_t j = 0; j < dim; ++j) acc[j] += row[j];
    ++sizes[assignment[i]];
  }
  double shift = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    auto acc = sums.row(c);
    for (double& v : acc) v /= static_cast<double>(sizes[c]);
    shift = std::max(shift, std::sqrt(squared_distance(acc, centroids.row(c))));
    std::copy(acc.begin(), acc.end(), centroids.row(c).begin());
  }
  return shift;
}

// Hartigan single-point transfers: moving x from cluster a (size n_a) to b
// changes the inertia by n_b/(n_b+1)*|x-c_b|^2 - n_a/(n_a-1)*|x-c_a|^2.
// Every accepted move strictly lowers the inertia, and a point that no move
// improves is already nearest to its own centroid. Returns true if a point
// moved.
bool hartigan_pass(const ad::Tensor& points, ad::Tensor& centroids, std::vector<std::size_t>& assignment) {
  const std::size_t k = centroids.rows(), dim = points.cols();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t c : assignment) ++sizes[c];
  bool moved = false;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const std::size_t a = assignment[i];
    if (sizes[a] < 2) continue;
    const auto x = points.row(i);
    const double na = static_cast<double>(sizes[a]);
    const double leave = na / (na - 1.0) * squared_distance(x, centroids.row(a));
    std::size_t best = a;
    double best_gain = 1e-12 * std::max(leave, 1e-300);
    for (std::size_t b = 0; b < k; ++b) {
      if (b == a) continue;
      const double nb = static_cast<double>(sizes[b]);
      const double gain = leave - nb / (nb + 1.0) * squared_distance(x, centroids.row(b));
      if (gain > best_gain) {
        best_gain = gain;
        best = b;
      }
    }
    if (best == a) continue;
    auto ca = centroids.row(a);
    auto cb = centroids.row(best);
    const double nb = static_cast<double>(sizes[best]);
    for (std::size_t j = 0; j < dim; ++j) {
      ca[j] = (ca[j] * na - x[j]) / (na - 1.0);
      cb[j] = (cb[j] * nb + x[j]) / (nb + 1.0);
    }
    --sizes[a];
    ++sizes[best];
    assignment[i] = best;
    moved = true;
  }
  return moved;
}

}  // namespace

double inertia(const ad::Tensor& points, const ad::Tensor& centroids, std::span<const std::size_t> assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) total += squared_distance(points.row(i), centroids.row(assignment[i]));
  return total;
}

KMeansResult kmeans(const ad::Tensor& points, const KMeansOptions& options, std::uint64_t seed) {
  const std::size_t n = points.rows();
  if (options.k == 0 || options.k > n) {
    throw PreconditionError("k-means needs 1 <= k <= " + std::to_string(n) + ", got k=" + std::to_string(options.k));
  }
  if (!points.all_finite()) throw NumericError("non-finite activation values");
  Rng rng(seed);
  KMeansResult r;
  r.seed = seed;
  r.centroids = plus_plus_seeding(points, options.k, rng);
  r.assignment.assign(n, 0);
  std::vector<double> distance(n, 0.0);

  while (true) {
    assign(points, r.centroids, r.assignment, distance);
    repair_empty(points, r.centroids, r.assignment, distance);
    r.inertia_trace.push_back(inertia(points, r.centroids, r.assignment));
    if (r.iterations == options.max_iter) break;
    ++r.iterations;
    if (update_centroids(points, r.centroids, r.assignment) < options.tol) {
      // Settle the assignment against the final centroids.
      assign(points, r.centroids, r.assignment, distance);
      repair_empty(points, r.centroids, r.assignment, distance);
      r.inertia_trace.push_back(inertia(points, r.centroids, r.assignment));
      break;
    }
  }
  // Lloyd stops at any fixed point of assign/update; transfers of single
  // points escape many of the poor ones. The centroids are rebuilt from
  // scratch afterwards so incremental updates leave no drift.
  std::size_t passes = 0;
  while (passes < options.max_iter && hartigan_pass(points, r.centroids, r.assignment)) ++passes;
  if (passes > 0) {
    update_centroids(points, r.centroids, r.assignment);
    assign(points, r.centroids, r.assignment, distance);
    repair_empty(points, r.centroids, r.assignment, distance);
    r.inertia_trace.push_back(inertia(points, r.centroids, r.assignment));
  }
  r.inertia = r.inertia_trace.back();
  return r;
}

KMeansResult kmeans_best_of(const ad::Tensor& points, const KMeansOptions& options,
                            std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("k-means needs at least one restart");
  KMeansResult best = kmeans(points, options, seeds[0]);
  for (std::size_t s = 1; s < seeds.size(); ++s) {
    KMeansResult r = kmeans(points, options, seeds[s]);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

std::vector<std::uint64_t> restart_seeds(std::uint64_t root_seed, std::size_t restarts) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < restarts; ++i) seeds.push_back(substream_seed(root_seed, "restart" + std::to_string(i)));
  return seeds;
}

}  // namespace adling::interpret
