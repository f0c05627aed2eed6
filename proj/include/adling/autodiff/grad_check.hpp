#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "adling/autodiff/param_set.hpp"

namespace adling::ad {

/// Scalar objective of a parameter set. When `grads` is non-null the
/// objective also accumulates its analytic gradient there.
using Objective = std::function<double(const ParamSet& params, ParamSet* grads)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Check at most this many coordinates per parameter (chosen under `seed`);
  // unset checks all of them.
  std::optional<std::size_t> max_coordinates_per_parameter;
  std::uint64_t seed = 0;
};

/// Central differences (f(p + e) - f(p - e)) / 2e against the analytic
/// gradient; relative error |a - n| / max(|a|, |n|, 1e-8).
/// Throws NumericError when f is not finite.
GradCheckResult grad_check(const Objective& f, ParamSet params, const GradCheckOptions& options = {});

}  // namespace adling::ad
