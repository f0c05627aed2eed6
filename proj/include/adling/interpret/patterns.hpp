#pragma once

#include <map>
#include <string>
#include <vector>

#include "adling/corpus/types.hpp"
#include "adling/interpret/activations.hpp"
#include "adling/interpret/kmeans.hpp"

namespace adling::interpret {

struct TagFrequency {
  std::string tag;
  std::size_t count = 0;
  double frequency = 0.0;  // count / total tags in the cluster
};

struct ClusterPattern {
  std::size_t cluster_id = 0;
  std::vector<TagFrequency> top_tags;      // prefix of `distribution`
  std::vector<TagFrequency> distribution;  // every tag, descending, ties lexicographic
  std::size_t support = 0;                 // member utterances carrying POS tags
  std::size_t total_tags = 0;
  std::size_t members = 0;                 // all member utterances
  std::size_t untagged = 0;                // members skipped for lacking POS tags
  corpus::Label label = corpus::Label::control;  // majority true label, ties to Control
  double label_share = 0.0;
};

/// Pattern of a single tag-count table.
ClusterPattern pattern_from_counts(std::size_t cluster_id, const std::map<std::string, std::size_t>& counts,
                                   std::size_t top_k = 4);

/// One pattern per cluster id 0..k-1, counting every POS tag of every
/// tagged member utterance.
std::vector<ClusterPattern> cluster_pos_patterns(const KMeansResult& result, const ActivationMatrix& am,
                                                 std::size_t top_k = 4);

/// `cluster <id> label=<AD|Control> share=<x.xx> support=<n>` followed by
/// `tag,freq` lines; blocks separated by a blank line.
std::string format_cluster_report(const std::vector<ClusterPattern>& patterns);

}  // namespace adling::interpret
