#include "adling/training/optimizer.hpp"

#include <cmath>

#include "adling/error.hpp"

namespace adling::training {

double global_norm(const ad::ParamSet& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squared_norm();
  return std::sqrt(sq);
}

double clip_global_norm(ad::ParamSet& grads, double clip) {
  if (!(clip > 0.0)) throw ConfigError("clip norm must be positive");
  for (const auto& [name, g] : grads) {
    if (!g.all_finite()) throw NumericError("non-finite gradient in parameter '" + name + "'");
  }
  const double norm = global_norm(grads);
  if (norm > clip) {
    const double factor = clip / norm;
    for (auto& [name, g] : grads) g.scale(factor);
  }
  return norm;
}

Adam::Adam(const ad::ParamSet& params, AdamConfig config)
    : config_(config), m_(params.zeros_like()), v_(params.zeros_like()) {}

void Adam::step(ad::ParamSet& params, const ad::ParamSet& grads) {
  if (params.names() != m_.names() || grads.names() != m_.names()) {
    throw ShapeError("optimizer step: parameter names differ from the optimizer state");
  }
  for (const auto& [name, m] : m_) {
    if (params.at(name).shape() != m.shape() || grads.at(name).shape() != m.shape()) {
      throw ShapeError("optimizer step: shape mismatch for '" + name + "'");
    }
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    double* pv = p.data();
    const double* g = grads.at(name).data();
    double* m = m_.at(name).data();
    double* v = v_.at(name).data();
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      pv[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace adling::training
