#include "adling/interpret/activations.hpp"

#include "adling/error.hpp"

namespace adling::interpret {

std::string default_probe(models::Architecture arch) {
  return arch == models::Architecture::cnn ? "pooled" : "h_final";
}

ActivationMatrix capture_activations(const models::Model& model, std::span<const corpus::EncodedSample> samples,
                                     const std::string& probe) {
  model.probe_width(probe);  // reject unknown names before the empty check
  if (samples.empty()) throw PreconditionError("no utterances to capture activations for");
  ActivationMatrix am{models::probe_activations(model, samples, probe), {}, probe};
  am.meta.reserve(samples.size());
  for (const corpus::EncodedSample& s : samples) am.meta.push_back(s.source);
  return am;
}

ActivationMatrix capture_activations(const models::Model& model, std::span<const corpus::UtterancePtr> utterances,
                                     const corpus::Vocabulary& vocab, const std::string& probe) {
  std::vector<corpus::EncodedSample> samples;
  samples.reserve(utterances.size());
  for (const corpus::UtterancePtr& u : utterances) {
    samples.push_back(corpus::encode_utterance(u, vocab, model.config().tagged, model.config().max_len));
  }
  return capture_activations(model, samples, probe);
}

}  // namespace adling::interpret
