#include "adling/stats/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::stats {
namespace {

std::size_t count_correct(std::span<const int> outcomes) {
  std::size_t n = 0;
  for (int v : outcomes) {
    if (v != 0 && v != 1) throw PreconditionError("bootstrap outcomes must be 0 or 1");
    n += static_cast<std::size_t>(v);
  }
  return n;
}

std::size_t resample_correct(std::span<const int> outcomes, Rng& rng) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) n += static_cast<std::size_t>(outcomes[rng.below(outcomes.size())]);
  return n;
}

}  // namespace

BootstrapResult bootstrap_diff_test(std::span<const int> correct_a, std::span<const int> correct_b,
                                    std::size_t n_resamples, std::uint64_t seed) {
  if (correct_a.empty() || correct_b.empty()) throw PreconditionError("bootstrap needs two nonempty outcome sequences");
  if (n_resamples < 100) throw ConfigError("n_resamples must be at least 100");
  const double na = static_cast<double>(correct_a.size());
  const double nb = static_cast<double>(correct_b.size());

  BootstrapResult r;
  r.n_resamples = n_resamples;
  r.seed = seed;
  r.accuracy_a = static_cast<double>(count_correct(correct_a)) / na;
  r.accuracy_b = static_cast<double>(count_correct(correct_b)) / nb;
  r.observed_diff = r.accuracy_a - r.accuracy_b;
  const double threshold = std::abs(r.observed_diff);

  Rng rng(seed);
  std::size_t extreme = 0;
  for (std::size_t k = 0; k < n_resamples; ++k) {
    const double diff = static_cast<double>(resample_correct(correct_a, rng)) / na -
                        static_cast<double>(resample_correct(correct_b, rng)) / nb;
    // The slack keeps exact ties (e.g. zero observed difference) on the
    // inclusive side despite rounding.
    if (std::abs(diff - r.observed_diff) >= threshold - 1e-12) ++extreme;
  }
  const double floor = 1.0 / static_cast<double>(n_resamples);
  r.p_value = std::clamp(static_cast<double>(extreme) / static_cast<double>(n_resamples), floor, 1.0);
  return r;
}

std::string format_gender_report(const BootstrapResult& r, const std::string& mode) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "male_acc=%.3f female_acc=%.3f diff=%+.3f p=%.4f n_resamples=%zu seed=%llu mode=%s\n",
                r.accuracy_a, r.accuracy_b, r.observed_diff, r.p_value, r.n_resamples,
                static_cast<unsigned long long>(r.seed), mode.c_str());
  return buf;
}

}  // namespace adling::stats
