#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "adling/autodiff/ops.hpp"
#include "adling/autodiff/param_set.hpp"
#include "adling/corpus/dataset.hpp"
#include "adling/models/config.hpp"
#include "adling/random.hpp"

namespace adling::models {

/// Values recorded for one utterance.
struct SampleGraph {
  ad::Var embed;   // [L x D] embedding rows of the real tokens
  ad::Var logits;  // [classes]
  std::map<std::string, ad::Var> probes;
};

/// One of the three utterance classifiers with its parameters.
///
/// Probes (per utterance, fixed width):
///   embed        mean embedding over real tokens            [D]
///   conv{w}      max over time of the ReLU map of window w  [F]
///   pooled       concatenated conv{w} probes (cnn)          [F * sizes]
///   h_final      final hidden state of the top LSTM layer   [H]
///   pre_softmax  logits                                     [classes]
class Model {
 public:
  /// Fresh parameters: Glorot-uniform conv/dense/recurrent weights, forget
  /// gate bias 1.0, embeddings uniform in +-0.05.
  Model(ModelConfig config, std::uint64_t init_seed);
  /// Adopts existing parameters; throws ShapeError when they do not fit.
  Model(ModelConfig config, ad::ParamSet params);

  Architecture architecture() const { return config_.architecture; }
  const ModelConfig& config() const { return config_; }
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

  std::vector<std::string> probe_names() const;
  /// Throws LookupError listing the valid names.
  std::size_t probe_width(const std::string& name) const;

  /// Records the forward pass for one utterance. Only the real tokens are
  /// processed, so right-padding never changes the result; the cnn pads
  /// sequences shorter than its widest window with PAD. Parameter gradients
  /// accumulate into `grads` when it is non-null. With `embed_gradient` the
  /// embedding rows become a differentiable leaf (for saliency). Train mode
  /// needs `dropout_rng`.
  SampleGraph forward(ad::Tape& tape, std::span<const int> tokens, ad::Mode mode, Rng* dropout_rng,
                      ad::ParamSet* grads = nullptr, bool embed_gradient = false) const;

 private:
  ad::Var bind(ad::Tape& tape, const std::string& name, ad::ParamSet* grads) const;
  std::vector<ad::Var> conv_features(ad::Tape& tape, ad::Var embedded, ad::Padding padding,
                                     ad::ParamSet* grads, SampleGraph& graph) const;
  // Hidden states of every step of one LSTM layer over the rows of `sequence`.
  std::vector<ad::Var> run_lstm(ad::Tape& tape, ad::Var sequence, std::size_t layer,
                                const ad::Tensor* recurrent_mask, ad::ParamSet* grads) const;

  ModelConfig config_;
  ad::ParamSet params_;
};

/// Eval-mode logits for a batch, [B x classes].
ad::Tensor batch_logits(const Model& model, std::span<const corpus::EncodedSample> batch);

/// Softmax of each row of batch_logits.
ad::Tensor batch_probabilities(const Model& model, std::span<const corpus::EncodedSample> batch);

/// Eval-mode activations of `probe`, one row per sample in batch order.
ad::Tensor probe_activations(const Model& model, std::span<const corpus::EncodedSample> batch,
                             const std::string& probe);

/// Predicted class: argmax of the logits, ties to class 0.
std::size_t predicted_class(std::span<const double> logits);

struct Checkpoint {
  Model model;
  corpus::Vocabulary vocabulary;
};

/// Writes model.bin (parameter container), model.cfg (key=value sidecar
/// with the architecture and vocabulary fingerprint) and vocab.txt.
void save_checkpoint(const std::filesystem::path& dir, const Model& model, const corpus::Vocabulary& vocab);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace adling::models
