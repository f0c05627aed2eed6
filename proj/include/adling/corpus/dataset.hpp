#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adling/corpus/types.hpp"

namespace adling::corpus {

/// Flattens transcripts in order. With `require_pos`, utterances lacking an
/// aligned %mor tier are dropped; the retained set is then shared by tagged
/// and untagged runs.
std::vector<Utterance> extract_utterances(std::span<const Transcript> corpus, bool require_pos);

std::string pos_token(const PosTag& tag);  // "<pos:TAG>"

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr std::size_t kDefaultVocabularySize = 2396;

class Vocabulary {
 public:
  static constexpr std::string_view kPad = "<pad>";
  static constexpr std::string_view kOov = "<oov>";

  Vocabulary();  // PAD and OOV only

  /// Ranks tokens by descending frequency (ties lexicographic) and keeps the
  /// top `max_size - 2` after the reserved ids. Tagged mode counts
  /// `<pos:TAG>` tokens in the same table.
  static Vocabulary build(std::span<const Utterance> utterances, std::size_t max_size, bool tagged);

  /// Rebuilds from tokens in id order; the first two must be PAD and OOV.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t max_size() const { return max_size_; }
  int id(std::string_view token) const;  // OOV when unknown
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// FNV-1a over the tokens in id order; recorded in checkpoint sidecars.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  std::size_t max_size_ = kDefaultVocabularySize;
};

enum class TokenKind { word, pos };

struct EncodedSample {
  std::vector<int> ids;  // length max_len, PAD-filled on the right
  std::size_t true_length = 0;
  Label label = Label::control;
  UtterancePtr source;

  std::span<const int> tokens() const { return {ids.data(), true_length}; }
};

inline constexpr std::size_t kMaxLenUntagged = 32;
inline constexpr std::size_t kMaxLenTagged = 64;
inline std::size_t default_max_len(bool tagged) { return tagged ? kMaxLenTagged : kMaxLenUntagged; }

/// Token strings an utterance turns into before id lookup: words, or
/// interleaved [<pos:t_i>, word_i] pairs in tagged mode.
std::vector<std::string> utterance_tokens(const Utterance& u, bool tagged);
std::vector<TokenKind> utterance_token_kinds(const Utterance& u, bool tagged);

/// Throws PreconditionError when tagged and the utterance has no POS tags.
EncodedSample encode_utterance(UtterancePtr u, const Vocabulary& vocab, bool tagged, std::size_t max_len);
EncodedSample encode_utterance(const Utterance& u, const Vocabulary& vocab, bool tagged, std::size_t max_len);

std::vector<EncodedSample> encode_all(std::span<const Utterance> utterances, const Vocabulary& vocab, bool tagged,
                                      std::size_t max_len);

std::vector<std::string> decode(const EncodedSample& sample, const Vocabulary& vocab);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

enum class SplitUnit { utterance, transcript };

struct CorpusSplit {
  std::vector<EncodedSample> train;
  std::vector<EncodedSample> dev;
  std::vector<EncodedSample> test;
  std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates shuffle, then a contiguous partition with
/// floor(n*train), floor(n*dev) and the remainder to test. Transcript-level
/// splitting shuffles and partitions transcript ids instead, so a speaker
/// never appears in two subsets.
CorpusSplit split_corpus(std::vector<EncodedSample> samples, SplitRatios ratios, std::uint64_t seed,
                         SplitUnit unit = SplitUnit::utterance);

}  // namespace adling::corpus
