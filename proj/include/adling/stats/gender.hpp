#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adling/corpus/dataset.hpp"

namespace adling::stats {

struct ClassCounts {
  std::size_t ad = 0;
  std::size_t control = 0;

  std::size_t total() const { return ad + control; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_classes(std::span<const corpus::EncodedSample> samples);

struct GenderSubsets {
  std::vector<corpus::EncodedSample> male;
  std::vector<corpus::EncodedSample> female;  // downsampled to the male size and class mix
  std::uint64_t seed = 0;
  ClassCounts male_counts;
  ClassCounts female_counts;
  ClassCounts female_pool_counts;  // before downsampling
};

/// Keeps every male sample and draws, per class and without replacement,
/// exactly as many female samples as the male subset has in that class.
/// Samples of unknown gender are left out. Throws PreconditionError unless
/// the male subset has both classes, and InsufficientDataError when the
/// female pool cannot cover a class.
GenderSubsets gender_partition_downsample(std::span<const corpus::EncodedSample> samples, std::uint64_t seed);

}  // namespace adling::stats
