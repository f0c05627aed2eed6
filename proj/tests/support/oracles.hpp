#pragma once

// Test-only helpers: finite-difference harnesses for tape operations and
// random tensor generators. Nothing here calls into the code paths the
// oracles check beyond building the forward graph.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "adling/autodiff/grad_check.hpp"
#include "adling/autodiff/ops.hpp"
#include "adling/random.hpp"

namespace testing {

using adling::ad::ParamSet;
using adling::ad::Tape;
using adling::ad::Tensor;
using adling::ad::Var;

Tensor random_tensor(adling::ad::Shape shape, adling::Rng& rng, double lo = -1.0, double hi = 1.0);

using GraphBuilder = std::function<Var(Tape&, std::map<std::string, Var>&)>;

/// Max relative error between analytic and central-difference gradients of
/// sum(R * build(inputs)) w.r.t. every entry of `inputs`, where R is a fixed
/// random projection.
double op_gradient_error(const ParamSet& inputs, const GraphBuilder& build, double epsilon = 1e-5,
                         std::uint64_t seed = 99);

}  // namespace testing

namespace testing {

/// Minimum k=2 inertia over every two-way partition of the rows (both
/// parts nonempty), each part scored against its own mean.
double brute_force_two_means(const Tensor& points);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Exact two-sided bootstrap p-value by enumerating every resample of both
/// sequences (n^n each), counting |diff - observed| >= |observed|.
double bootstrap_p_exhaustive(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace testing
