#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adling/corpus/dataset.hpp"
#include "adling/models/model.hpp"

namespace adling::training {

struct EvalReport {
  double accuracy = 0.0;
  // confusion[true][predicted], class 0 = Control, 1 = AD.
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::vector<std::size_t> predictions;

  std::size_t total() const;
};

/// Eval-mode predictions (argmax, ties to Control). Throws
/// PreconditionError on an empty sample set.
EvalReport evaluate(const models::Model& model, std::span<const corpus::EncodedSample> samples);

/// Builds the report from precomputed predictions.
EvalReport score_predictions(std::span<const corpus::EncodedSample> samples, std::vector<std::size_t> predictions);

/// Share of the most frequent class.
double majority_baseline(std::span<const corpus::EncodedSample> samples);
double majority_baseline(std::size_t ad_count, std::size_t total);

std::string format_eval_report(const EvalReport& report);

struct ErrorCase {
  corpus::UtterancePtr utterance;
  std::size_t word_count = 0;
  std::size_t predicted = 0;
};

struct ErrorReport {
  std::size_t qualifying = 0;  // misclassified samples whose true label is Control
  std::vector<ErrorCase> sampled;
  std::size_t short_threshold = 3;
  double short_fraction = 0.0;  // share of sampled cases with <= short_threshold words
};

/// Draws ceil(sample_frac * qualifying) of the misclassified Control samples
/// without replacement under `seed`; listed in sample order. Throws
/// ConfigError unless 0 < sample_frac <= 1.
ErrorReport error_report(std::span<const corpus::EncodedSample> samples, const EvalReport& eval, double sample_frac,
                         std::uint64_t seed, std::size_t short_threshold = 3);
ErrorReport error_report(const models::Model& model, std::span<const corpus::EncodedSample> samples,
                         double sample_frac, std::uint64_t seed, std::size_t short_threshold = 3);

std::string format_error_report(const ErrorReport& report);

}  // namespace adling::training
