#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adling::stats {

struct BootstrapResult {
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double observed_diff = 0.0;  // accuracy_a - accuracy_b
  double p_value = 1.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultResamples = 10000;

/// Two-sided bootstrap test of a difference in accuracy. Each resample
/// draws both outcome sequences independently with replacement at their own
/// sizes; p is the share of resampled differences with
/// |diff - observed| >= |observed|, clamped to [1/n_resamples, 1].
/// Outcomes must be 0 or 1. Throws PreconditionError on an empty sequence
/// and ConfigError when n_resamples < 100.
BootstrapResult bootstrap_diff_test(std::span<const int> correct_a, std::span<const int> correct_b,
                                    std::size_t n_resamples = kDefaultResamples, std::uint64_t seed = 0);

/// `male_acc=<x.xxx> female_acc=<x.xxx> diff=<+-x.xxx> p=<x.xxxx> n_resamples=<n> seed=<s> mode=<mode>`
std::string format_gender_report(const BootstrapResult& result, const std::string& mode);

}  // namespace adling::stats
