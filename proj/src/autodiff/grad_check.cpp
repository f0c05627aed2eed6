#include "adling/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::ad {

GradCheckResult grad_check(const Objective& f, ParamSet params, const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("grad_check epsilon must be positive");
  const auto evaluate = [&](const ParamSet& p) {
    const double value = f(p, nullptr);
    if (!std::isfinite(value)) throw NumericError("objective is not finite");
    return value;
  };

  ParamSet analytic = params.zeros_like();
  if (!std::isfinite(f(params, &analytic))) throw NumericError("objective is not finite");

  Rng rng(options.seed);
  GradCheckResult result;
  for (const std::string& name : params.names()) {
    Tensor& value = params.at(name);
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coordinates_per_parameter && coords.size() > *options.max_coordinates_per_parameter) {
      rng.shuffle(coords);
      coords.resize(*options.max_coordinates_per_parameter);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const double original = value[idx];
      value[idx] = original + options.epsilon;
      const double plus = evaluate(params);
      value[idx] = original - options.epsilon;
      const double minus = evaluate(params);
      value[idx] = original;

      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic.at(name)[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates_checked;
      if (result.coordinates_checked == 1 || rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = name;
        result.worst_index = idx;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace adling::ad
