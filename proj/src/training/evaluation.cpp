#include "adling/training/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "adling/error.hpp"

namespace adling::training {

std::size_t EvalReport::total() const {
  return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
}

EvalReport score_predictions(std::span<const corpus::EncodedSample> samples, std::vector<std::size_t> predictions) {
  if (samples.empty()) throw PreconditionError("cannot evaluate an empty sample set");
  if (predictions.size() != samples.size()) throw ShapeError("one prediction per sample expected");
  EvalReport r;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (predictions[i] > 1) throw BoundsError("predicted class out of range");
    ++r.confusion[static_cast<std::size_t>(samples[i].label)][predictions[i]];
  }
  r.accuracy = static_cast<double>(r.confusion[0][0] + r.confusion[1][1]) / static_cast<double>(samples.size());
  r.predictions = std::move(predictions);
  return r;
}

EvalReport evaluate(const models::Model& model, std::span<const corpus::EncodedSample> samples) {
  if (samples.empty()) throw PreconditionError("cannot evaluate an empty sample set");
  std::vector<std::size_t> predictions;
  predictions.reserve(samples.size());
  for (const corpus::EncodedSample& s : samples) {
    ad::Tape tape;
    const models::SampleGraph g = model.forward(tape, s.tokens(), ad::Mode::eval, nullptr);
    const ad::Tensor& logits = g.logits.value();
    predictions.push_back(models::predicted_class({logits.data(), logits.size()}));
  }
  return score_predictions(samples, std::move(predictions));
}

double majority_baseline(std::size_t ad_count, std::size_t total) {
  if (total == 0) throw PreconditionError("majority baseline of an empty set");
  if (ad_count > total) throw PreconditionError("AD count exceeds the total");
  return static_cast<double>(std::max(ad_count, total - ad_count)) / static_cast<double>(total);
}

double majority_baseline(std::span<const corpus::EncodedSample> samples) {
  const auto ad = std::count_if(samples.begin(), samples.end(),
                                [](const corpus::EncodedSample& s) { return s.label == corpus::Label::ad; });
  return majority_baseline(static_cast<std::size_t>(ad), samples.size());
}

std::string format_eval_report(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "accuracy=%.4f n=%zu\n"
                "confusion (rows true, cols predicted; Control, AD)\n"
                "Control %zu %zu\n"
                "AD %zu %zu\n",
                r.accuracy, r.total(), r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]);
  return buf;
}

ErrorReport error_report(std::span<const corpus::EncodedSample> samples, const EvalReport& eval, double sample_frac,
                         std::uint64_t seed, std::size_t short_threshold) {
  if (!(sample_frac > 0.0 && sample_frac <= 1.0)) throw ConfigError("sample fraction must be in (0, 1]");
  if (eval.predictions.size() != samples.size()) throw ShapeError("evaluation does not match the samples");
  std::vector<std::size_t> wrong;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label == corpus::Label::control && eval.predictions[i] != 0) wrong.push_back(i);
  }
  ErrorReport report;
  report.qualifying = wrong.size();
  report.short_threshold = short_threshold;
  if (wrong.empty()) return report;

  const auto take = static_cast<std::size_t>(std::ceil(sample_frac * static_cast<double>(wrong.size()) - 1e-9));
  Rng rng(seed);
  rng.shuffle(wrong);
  wrong.resize(std::max<std::size_t>(1, take));
  std::sort(wrong.begin(), wrong.end());

  std::size_t short_count = 0;
  for (std::size_t i : wrong) {
    const corpus::EncodedSample& s = samples[i];
    const std::size_t words = s.source ? s.source->words.size() : s.true_length;
    short_count += words <= short_threshold;
    report.sampled.push_back({s.source, words, eval.predictions[i]});
  }
  report.short_fraction = static_cast<double>(short_count) / static_cast<double>(wrong.size());
  return report;
}

ErrorReport error_report(const models::Model& model, std::span<const corpus::EncodedSample> samples,
                         double sample_frac, std::uint64_t seed, std::size_t short_threshold) {
  return error_report(samples, evaluate(model, samples), sample_frac, seed, short_threshold);
}

std::string format_error_report(const ErrorReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "misclassified_control=%zu sampled=%zu short_threshold=%zu short_fraction=%.3f\n",
                r.qualifying, r.sampled.size(), r.short_threshold, r.short_fraction);
  std::string out = buf;
  for (const ErrorCase& c : r.sampled) {
    if (!c.utterance) continue;
    out += c.utterance->transcript_id + "_" + std::to_string(c.utterance->index) + "\t" +
           std::to_string(c.word_count) + "\t";
    for (std::size_t i = 0; i < c.utterance->words.size(); ++i) {
      out += (i ? " " : "") + c.utterance->words[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace adling::training
