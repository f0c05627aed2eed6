#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adling/corpus/types.hpp"

namespace adling::corpus {

struct SyntheticOptions {
  double ad_fraction = 0.67;
  // Share of female speakers; DementiaBank is female-majority, and the
  // gender protocol downsamples the female pool to the male one.
  double female_fraction = 0.6;
  std::size_t min_utterances = 8;
  std::size_t max_utterances = 16;
};

/// Template families the generator plants. AD speech: short bursts,
/// past-tense clarification questions, interjection/filler starts,
/// adjective/adverb-heavy picture descriptions, and filler-laden story
/// recall. Control speech: determiner-noun-participle scene descriptions.
/// `discourse` utterances are lexically identical across classes and differ
/// only in the %mor reading of the leading discourse word (interjection for
/// AD, adverb for Control). AD transcripts also contain a few unaffected
/// control-style utterances, and Control transcripts a few short answers.
enum class Family {
  ad_burst,
  ad_clarify,
  ad_interjection,
  ad_description,
  ad_recall,
  control_scene,
  control_recall,
  control_short,
  discourse,
};

std::string_view to_string(Family family);

struct SyntheticCorpus {
  std::vector<Transcript> transcripts;
  std::map<std::pair<std::string, std::size_t>, Family> families;

  Family family_of(const Utterance& u) const { return families.at({u.transcript_id, u.index}); }
};

/// round(n * ad_fraction) AD transcripts, the rest Control; transcript ids
/// are `syn0000`, `syn0001`, ... Requires n_transcripts >= 2.
SyntheticCorpus generate_synthetic_corpus(std::size_t n_transcripts, std::uint64_t seed,
                                          const SyntheticOptions& options = {});

}  // namespace adling::corpus
