#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adling/corpus/dataset.hpp"
#include "adling/models/model.hpp"
#include "adling/training/optimizer.hpp"

namespace adling::training {

struct TrainConfig {
  std::size_t batch_size = 32;
  double clip_norm = 2.0;
  std::size_t max_epochs = 50;
  // Epochs without a dev-accuracy improvement before stopping.
  std::size_t patience = 5;
  // Root of the "shuffle" and "dropout" substreams.
  std::uint64_t seed = 0;
  AdamConfig adam;

  void validate() const;  // throws ConfigError
};

/// 128 for cnn, 32 for lstm and cnn_lstm.
std::size_t default_batch_size(models::Architecture arch);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainResult {
  models::Model model;  // parameters of the best dev epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch training with per-batch mean cross-entropy, global-norm
/// clipping and Adam. Keeps the parameters of the best dev accuracy (ties to
/// the earlier epoch). When the dev set is empty, selection falls back to
/// training accuracy. Throws PreconditionError on an empty training set and
/// NumericError when the loss stops being finite.
TrainResult train(models::Model model, const corpus::CorpusSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Mean cross-entropy of one batch; accumulates d(mean loss)/d(params) into
/// `grads` (which must mirror the model parameters) when it is non-null.
double batch_loss(const models::Model& model, std::span<const corpus::EncodedSample> batch, ad::Mode mode,
                  Rng* dropout_rng, ad::ParamSet* grads);

/// `epoch,train_loss,dev_accuracy` with a header line.
std::string format_history(const std::vector<EpochRecord>& history);

}  // namespace adling::training
