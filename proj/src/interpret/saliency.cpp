#include "adling/interpret/saliency.hpp"

#include <cmath>
#include <optional>

#include "adling/error.hpp"

namespace adling::interpret {

std::string_view to_string(ScoreKind kind) { return kind == ScoreKind::l2 ? "l2" : "abs_sum"; }

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "l2") return ScoreKind::l2;
  if (text == "abs_sum") return ScoreKind::abs_sum;
  throw ConfigError("unknown score kind '" + std::string(text) + "' (expected l2 or abs_sum)");
}

SaliencyTarget parse_saliency_target(std::string_view text) {
  if (text == "predicted") return SaliencyTarget::predicted;
  if (text == "true") return SaliencyTarget::true_label;
  throw ConfigError("unknown saliency target '" + std::string(text) + "' (expected predicted or true)");
}

std::vector<double> SaliencyMap::scores() const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const TokenScore& t : tokens) out.push_back(t.score);
  return out;
}

namespace {

struct LogitGradient {
  ad::Tensor rows;
  std::size_t predicted = 0;
};

LogitGradient gradient_of(const models::Model& model, std::span<const int> tokens,
                          std::optional<std::size_t> logit) {
  ad::Tape tape;
  const models::SampleGraph g = model.forward(tape, tokens, ad::Mode::eval, nullptr, nullptr, true);
  const ad::Tensor& logits = g.logits.value();
  LogitGradient out;
  out.predicted = models::predicted_class({logits.data(), logits.size()});
  const std::size_t target = logit.value_or(out.predicted);
  if (target >= logits.size()) throw BoundsError("logit index out of range");
  tape.backward(ad::pick(g.logits, target));
  // The cnn may have padded the sequence; only the real rows count.
  const ad::Tensor& full = tape.grad(g.embed);
  const std::size_t dim = full.cols();
  const std::size_t rows = std::max<std::size_t>(tokens.size(), 1);
  out.rows = ad::Tensor({rows, dim});
  std::copy_n(full.data(), rows * dim, out.rows.data());
  return out;
}

}  // namespace

ad::Tensor logit_embedding_gradient(const models::Model& model, std::span<const int> tokens, std::size_t logit) {
  return gradient_of(model, tokens, logit).rows;
}

SaliencyMap saliency(const models::Model& model, const corpus::EncodedSample& sample,
                     const corpus::Vocabulary& vocab, ScoreKind kind, SaliencyTarget target) {
  std::optional<std::size_t> logit;
  if (target == SaliencyTarget::true_label) logit = static_cast<std::size_t>(sample.label);
  const LogitGradient grad = gradient_of(model, sample.tokens(), logit);

  SaliencyMap map;
  map.utterance = sample.source;
  map.kind = kind;
  map.predicted_class = grad.predicted;
  map.target_class = logit.value_or(grad.predicted);

  std::vector<std::string> text;
  std::vector<corpus::TokenKind> kinds;
  if (sample.source) {
    text = corpus::utterance_tokens(*sample.source, model.config().tagged);
    kinds = corpus::utterance_token_kinds(*sample.source, model.config().tagged);
  } else {
    text = corpus::decode(sample, vocab);
    for (const std::string& t : text) {
      kinds.push_back(t.starts_with("<pos:") ? corpus::TokenKind::pos : corpus::TokenKind::word);
    }
  }
  for (std::size_t i = 0; i < sample.true_length; ++i) {
    double s = 0.0;
    for (double v : grad.rows.row(i)) s += kind == ScoreKind::l2 ? v * v : std::abs(v);
    if (kind == ScoreKind::l2) s = std::sqrt(s);
    map.tokens.push_back({i < text.size() ? text[i] : vocab.token(sample.ids[i]),
                          i < kinds.size() ? kinds[i] : corpus::TokenKind::word, s});
  }
  return map;
}

}  // namespace adling::interpret
