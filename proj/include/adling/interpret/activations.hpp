#pragma once

#include <span>
#include <string>
#include <vector>

#include "adling/corpus/dataset.hpp"
#include "adling/models/model.hpp"

namespace adling::interpret {

/// One probe activation vector per utterance, rows aligned with `meta`.
struct ActivationMatrix {
  ad::Tensor values;  // [N x n]
  std::vector<corpus::UtterancePtr> meta;
  std::string probe;

  std::size_t rows() const { return meta.size(); }
  std::size_t dim() const { return values.cols(); }
};

/// The representation fed to the output layer: `pooled` for cnn,
/// `h_final` otherwise.
std::string default_probe(models::Architecture arch);

/// Eval-mode probe outputs for encoded samples. Throws PreconditionError on
/// an empty set and LookupError on an unknown probe.
ActivationMatrix capture_activations(const models::Model& model, std::span<const corpus::EncodedSample> samples,
                                     const std::string& probe);

/// Encodes the utterances first (with the model's max_len).
ActivationMatrix capture_activations(const models::Model& model, std::span<const corpus::UtterancePtr> utterances,
                                     const corpus::Vocabulary& vocab, const std::string& probe);

}  // namespace adling::interpret
