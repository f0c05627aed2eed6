#include "adling/stats/gender.hpp"

#include <algorithm>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::stats {

ClassCounts count_classes(std::span<const corpus::EncodedSample> samples) {
  ClassCounts c;
  for (const corpus::EncodedSample& s : samples) (s.label == corpus::Label::ad ? c.ad : c.control) += 1;
  return c;
}

GenderSubsets gender_partition_downsample(std::span<const corpus::EncodedSample> samples, std::uint64_t seed) {
  GenderSubsets out;
  out.seed = seed;
  // Female pool indices per class (0 = Control, 1 = AD).
  std::vector<std::size_t> pool[2];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const corpus::EncodedSample& s = samples[i];
    if (!s.source) continue;
    if (s.source->gender == corpus::Gender::male) out.male.push_back(s);
    else if (s.source->gender == corpus::Gender::female) pool[static_cast<std::size_t>(s.label)].push_back(i);
  }
  out.male_counts = count_classes(out.male);
  out.female_pool_counts = {pool[1].size(), pool[0].size()};
  if (out.male_counts.ad == 0 || out.male_counts.control == 0) {
    throw PreconditionError("the male subset needs both AD and Control samples (has " +
                            std::to_string(out.male_counts.ad) + " AD, " + std::to_string(out.male_counts.control) +
                            " Control)");
  }
  if (pool[1].size() < out.male_counts.ad || pool[0].size() < out.male_counts.control) {
    throw InsufficientDataError("female pool too small: need " + std::to_string(out.male_counts.ad) + " AD (have " +
                                std::to_string(pool[1].size()) + ") and " + std::to_string(out.male_counts.control) +
                                " Control (have " + std::to_string(pool[0].size()) + ")");
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t label : {1u, 0u}) {
    const std::size_t need = label == 1 ? out.male_counts.ad : out.male_counts.control;
    rng.shuffle(pool[label]);
    chosen.insert(chosen.end(), pool[label].begin(), pool[label].begin() + static_cast<std::ptrdiff_t>(need));
  }
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) out.female.push_back(samples[i]);
  out.female_counts = count_classes(out.female);
  return out;
}

}  // namespace adling::stats
