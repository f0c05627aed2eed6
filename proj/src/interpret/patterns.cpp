#include "adling/interpret/patterns.hpp"

#include <algorithm>
#include <cstdio>

#include "adling/error.hpp"

namespace adling::interpret {

ClusterPattern pattern_from_counts(std::size_t cluster_id, const std::map<std::string, std::size_t>& counts,
                                   std::size_t top_k) {
  ClusterPattern p;
  p.cluster_id = cluster_id;
  for (const auto& [tag, n] : counts) p.total_tags += n;
  for (const auto& [tag, n] : counts) {
    if (n == 0) continue;
    p.distribution.push_back({tag, n, static_cast<double>(n) / static_cast<double>(p.total_tags)});
  }
  // The map iterates tags lexicographically and the sort is stable.
  std::stable_sort(p.distribution.begin(), p.distribution.end(),
                   [](const TagFrequency& a, const TagFrequency& b) { return a.count > b.count; });
  p.top_tags.assign(p.distribution.begin(), p.distribution.begin() + std::min(top_k, p.distribution.size()));
  return p;
}

std::vector<ClusterPattern> cluster_pos_patterns(const KMeansResult& result, const ActivationMatrix& am,
                                                 std::size_t top_k) {
  if (result.assignment.size() != am.rows()) throw ShapeError("cluster assignment does not match the activations");
  const std::size_t k = result.centroids.rows();
  std::vector<std::map<std::string, std::size_t>> counts(k);
  std::vector<std::size_t> support(k, 0), members(k, 0), ad(k, 0);
  for (std::size_t i = 0; i < am.rows(); ++i) {
    const std::size_t c = result.assignment[i];
    const corpus::UtterancePtr& u = am.meta[i];
    ++members[c];
    if (!u) continue;
    ad[c] += u->label == corpus::Label::ad;
    if (!u->pos) continue;
    ++support[c];
    for (const corpus::PosTag& tag : *u->pos) ++counts[c][tag.str()];
  }
  std::vector<ClusterPattern> patterns;
  for (std::size_t c = 0; c < k; ++c) {
    ClusterPattern p = pattern_from_counts(c, counts[c], top_k);
    p.support = support[c];
    p.members = members[c];
    p.untagged = members[c] - support[c];
    const std::size_t control = members[c] - ad[c];
    p.label = ad[c] > control ? corpus::Label::ad : corpus::Label::control;
    p.label_share = members[c] ? static_cast<double>(std::max(ad[c], control)) / static_cast<double>(members[c]) : 0.0;
    patterns.push_back(std::move(p));
  }
  return patterns;
}

std::string format_cluster_report(const std::vector<ClusterPattern>& patterns) {
  std::string out;
  char line[160];
  for (const ClusterPattern& p : patterns) {
    if (!out.empty()) out += '\n';
    std::snprintf(line, sizeof line, "cluster %zu label=%s share=%.2f support=%zu\n", p.cluster_id,
                  std::string(corpus::to_string(p.label)).c_str(), p.label_share, p.support);
    out += line;
    for (const TagFrequency& t : p.top_tags) {
      std::snprintf(line, sizeof line, "%s,%.4f\n", t.tag.c_str(), t.frequency);
      out += line;
    }
  }
  return out;
}

}  // namespace adling::interpret
