#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "adling/corpus/dataset.hpp"
#include "adling/models/model.hpp"

namespace adling::interpret {

enum class ScoreKind { l2, abs_sum };
enum class SaliencyTarget { predicted, true_label };

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view text);           // throws ConfigError
SaliencyTarget parse_saliency_target(std::string_view text);  // "predicted" | "true"

struct TokenScore {
  std::string token;
  corpus::TokenKind kind = corpus::TokenKind::word;
  double score = 0.0;
};

struct SaliencyMap {
  corpus::UtterancePtr utterance;
  std::vector<TokenScore> tokens;  // real tokens only
  std::size_t predicted_class = 0;
  std::size_t target_class = 0;
  ScoreKind kind = ScoreKind::l2;

  std::vector<double> scores() const;
};

/// Gradient of the target class's pre-softmax logit w.r.t. each input
/// embedding row, reduced per token to its L2 norm or absolute sum. In
/// tagged mode the POS token and the word of each pair are separate
/// entries.
SaliencyMap saliency(const models::Model& model, const corpus::EncodedSample& sample,
                     const corpus::Vocabulary& vocab, ScoreKind kind = ScoreKind::l2,
                     SaliencyTarget target = SaliencyTarget::predicted);

/// Raw per-row gradients [true_length x embed_dim] of the given logit.
ad::Tensor logit_embedding_gradient(const models::Model& model, std::span<const int> tokens, std::size_t logit);

}  // namespace adling::interpret
