#include "adling/corpus/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::corpus {

std::vector<Utterance> extract_utterances(std::span<const Transcript> corpus, bool require_pos) {
  std::vector<Utterance> out;
  for (const Transcript& t : corpus) {
    for (const Utterance& u : t.utterances) {
      if (require_pos && !u.has_pos()) continue;
      out.push_back(u);
    }
  }
  return out;
}

std::string pos_token(const PosTag& tag) { return "<pos:" + tag.str() + ">"; }

Vocabulary::Vocabulary() : tokens_{std::string(kPad), std::string(kOov)} {
  ids_.emplace(tokens_[0], kPadId);
  ids_.emplace(tokens_[1], kOovId);
}

Vocabulary Vocabulary::build(std::span<const Utterance> utterances, std::size_t max_size, bool tagged) {
  if (max_size < 3) throw ConfigError("vocabulary max_size must be at least 3, got " + std::to_string(max_size));
  if (utterances.empty()) throw PreconditionError("cannot build a vocabulary from zero utterances");

  std::map<std::string, std::size_t> counts;
  for (const Utterance& u : utterances) {
    for (const auto& w : u.words) ++counts[w];
    if (tagged && u.pos) {
      for (const auto& tag : *u.pos) ++counts[pos_token(tag)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is already lexicographic, so a stable sort on count
  // alone gives the lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  vocab.max_size_ = max_size;
  for (const auto& [token, count] : ranked) {
    if (vocab.tokens_.size() >= max_size) break;
    if (token == kPad || token == kOov) continue;
    vocab.ids_.emplace(token, static_cast<int>(vocab.tokens_.size()));
    vocab.tokens_.push_back(token);
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPad || tokens[1] != kOov) {
    throw FormatError(1, "vocabulary must start with " + std::string(kPad) + " and " + std::string(kOov));
  }
  Vocabulary vocab;
  vocab.max_size_ = std::max(tokens.size(), std::size_t{3});
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (!vocab.ids_.emplace(tokens[i], static_cast<int>(i)).second) {
      throw FormatError(i + 1, "duplicate vocabulary token '" + tokens[i] + "'");
    }
  }
  vocab.tokens_ = std::move(tokens);
  return vocab;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kOovId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw BoundsError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::fingerprint() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined += '\n';
  }
  return fnv1a64(joined);
}

std::vector<std::string> utterance_tokens(const Utterance& u, bool tagged) {
  if (tagged && !u.pos) {
    throw PreconditionError("tagged encoding of utterance " + u.transcript_id + ":" + std::to_string(u.index) +
                            " which has no POS tags");
  }
  std::vector<std::string> tokens;
  tokens.reserve(tagged ? 2 * u.words.size() : u.words.size());
  for (std::size_t i = 0; i < u.words.size(); ++i) {
    if (tagged) tokens.push_back(pos_token((*u.pos)[i]));
    tokens.push_back(u.words[i]);
  }
  return tokens;
}

std::vector<TokenKind> utterance_token_kinds(const Utterance& u, bool tagged) {
  std::vector<TokenKind> kinds;
  for (std::size_t i = 0; i < u.words.size(); ++i) {
    if (tagged) kinds.push_back(TokenKind::pos);
    kinds.push_back(TokenKind::word);
  }
  return kinds;
}

EncodedSample encode_utterance(UtterancePtr u, const Vocabulary& vocab, bool tagged, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  const std::vector<std::string> tokens = utterance_tokens(*u, tagged);
  EncodedSample sample;
  sample.ids.assign(max_len, kPadId);
  sample.true_length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < sample.true_length; ++i) sample.ids[i] = vocab.id(tokens[i]);
  sample.label = u->label;
  sample.source = std::move(u);
  return sample;
}

EncodedSample encode_utterance(const Utterance& u, const Vocabulary& vocab, bool tagged, std::size_t max_len) {
  return encode_utterance(std::make_shared<const Utterance>(u), vocab, tagged, max_len);
}

std::vector<EncodedSample> encode_all(std::span<const Utterance> utterances, const Vocabulary& vocab, bool tagged,
                                      std::size_t max_len) {
  std::vector<EncodedSample> out;
  out.reserve(utterances.size());
  for (const Utterance& u : utterances) out.push_back(encode_utterance(u, vocab, tagged, max_len));
  return out;
}

std::vector<std::string> decode(const EncodedSample& sample, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (int id : sample.tokens()) out.push_back(vocab.token(id));
  return out;
}

CorpusSplit split_corpus(std::vector<EncodedSample> samples, SplitRatios ratios, std::uint64_t seed,
                         SplitUnit unit) {
  if (samples.empty()) throw PreconditionError("cannot split an empty sample set");
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
  Rng rng(seed);
  CorpusSplit split;
  split.seed = seed;

  if (unit == SplitUnit::utterance) {
    rng.shuffle(samples);
    const std::size_t n = samples.size();
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train));
    const auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.dev));
    for (std::size_t i = 0; i < n; ++i) {
      auto& dst = i < n_train ? split.train : (i < n_train + n_dev ? split.dev : split.test);
      dst.push_back(std::move(samples[i]));
    }
    return split;
  }

  std::vector<std::string> ids;
  {
    std::set<std::string> seen;
    for (const auto& s : samples) {
      if (seen.insert(s.source->transcript_id).second) ids.push_back(s.source->transcript_id);
    }
  }
  std::sort(ids.begin(), ids.end());
  rng.shuffle(ids);
  const std::size_t n = ids.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train));
  const auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.dev));
  std::map<std::string, int> bucket;
  for (std::size_t i = 0; i < n; ++i) bucket[ids[i]] = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);
  for (auto& s : samples) {
    const int b = bucket.at(s.source->transcript_id);
    (b == 0 ? split.train : b == 1 ? split.dev : split.test).push_back(std::move(s));
  }
  return split;
}

}  // namespace adling::corpus
