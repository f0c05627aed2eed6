#include "adling/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "adling/error.hpp"
#include "adling/training/evaluation.hpp"

namespace adling::training {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
}

std::size_t default_batch_size(models::Architecture arch) {
  return arch == models::Architecture::cnn ? 128 : 32;
}

double batch_loss(const models::Model& model, std::span<const corpus::EncodedSample> batch, ad::Mode mode,
                  Rng* dropout_rng, ad::ParamSet* grads) {
  if (batch.empty()) throw PreconditionError("empty batch");
  const double weight = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const corpus::EncodedSample& s : batch) {
    ad::Tape tape;
    const models::SampleGraph g = model.forward(tape, s.tokens(), mode, dropout_rng, grads);
    const ad::SoftmaxXent x = ad::softmax_xent(g.logits, static_cast<std::size_t>(s.label));
    total += x.loss.value()[0];
    if (grads) tape.backward(x.loss, weight);
  }
  return total * weight;
}

TrainResult train(models::Model model, const corpus::CorpusSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (split.train.empty()) throw PreconditionError("training set is empty");
  const std::vector<corpus::EncodedSample>& selection = split.dev.empty() ? split.train : split.dev;

  Rng shuffle_rng(substream_seed(config.seed, "shuffle"));
  Rng dropout_rng(substream_seed(config.seed, "dropout"));
  Adam adam(model.params(), config.adam);
  ad::ParamSet grads = model.params().zeros_like();

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<corpus::EncodedSample> batch;

  TrainResult result{model, {}, 0};
  double best_accuracy = -1.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(split.train[order[i]]);
      grads.fill(0.0);
      const double loss = batch_loss(model, batch, ad::Mode::train, &dropout_rng, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError("training loss became non-finite in epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(batch.size());
      clip_global_norm(grads, config.clip_norm);
      adam.step(model.params(), grads);
    }

    const EpochRecord record{epoch, loss_sum / static_cast<double>(order.size()),
                             evaluate(model, selection).accuracy};
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (record.dev_accuracy > best_accuracy) {
      best_accuracy = record.dev_accuracy;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= config.patience) break;
  }
  return result;
}

std::string format_history(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,dev_accuracy\n";
  char line[96];
  for (const EpochRecord& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.4f\n", r.epoch, r.train_loss, r.dev_accuracy);
    out += line;
  }
  return out;
}

}  // namespace adling::training
