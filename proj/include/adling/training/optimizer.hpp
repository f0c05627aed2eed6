#pragma once

#include <cstdint>

#include "adling/autodiff/param_set.hpp"

namespace adling::training {

/// Rescales every gradient by clip / norm when the global norm over all
/// tensors exceeds `clip`. Returns the norm before clipping. Throws
/// NumericError naming the first parameter with a non-finite entry.
double clip_global_norm(ad::ParamSet& grads, double clip);

double global_norm(const ad::ParamSet& grads);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments, one moment pair per parameter.
class Adam {
 public:
  Adam(const ad::ParamSet& params, AdamConfig config = {});

  /// p -= lr * m_hat / (sqrt(v_hat) + eps). Throws ShapeError when `grads`
  /// does not mirror the parameters.
  void step(ad::ParamSet& params, const ad::ParamSet& grads);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const ad::ParamSet& first_moment() const { return m_; }
  const ad::ParamSet& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  ad::ParamSet m_;
  ad::ParamSet v_;
  std::uint64_t t_ = 0;
};

}  // namespace adling::training
