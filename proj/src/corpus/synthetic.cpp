#include "adling/corpus/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "adling/error.hpp"
#include "adling/random.hpp"

namespace adling::corpus {
namespace {

using Pool = std::vector<std::string>;

const Pool kCookieNouns = {"boy", "girl", "mother", "cookie", "jar", "stool", "sink", "water",
                           "dishes", "plate", "window", "curtains", "cupboard", "floor", "towel"};
const Pool kRecallNouns = {"man", "woman", "car", "dog", "story", "house", "street", "doctor",
                           "money", "road", "park", "children", "bank", "letter"};
const Pool kOtherNouns = {"weather", "garden", "church", "school", "family", "job", "town", "friend"};
const Pool kPresp = {"taking", "reaching", "washing", "drying", "falling", "running", "standing",
                     "looking", "holding", "climbing", "spilling", "overflowing", "walking"};
const Pool kPart = {"tipped", "spilled", "opened", "washed", "broken", "dried", "filled", "stacked",
                    "closed", "distracted", "surprised", "lost"};
const Pool kAdj = {"big", "little", "nice", "high", "tall", "old", "pretty", "wet", "empty", "dirty"};
const Pool kAdv = {"very", "really", "just", "too", "quite", "still", "probably", "almost"};
const Pool kPastVerbs = {"went", "saw", "said", "got", "had", "told", "drove", "bought", "lost", "found"};
const Pool kPresentVerbs = {"see", "want", "think", "know", "remember", "get"};
const Pool kPronouns = {"she", "he", "it", "they"};
const Pool kDets = {"the", "a", "that", "this"};
const Pool kPreps = {"from", "on", "in", "at", "for", "to"};
const Pool kFillers = {"uh", "um"};
const Pool kInterjections = {"oh", "well", "so", "okay"};
const Pool kDiscourseWords = {"so", "well", "now", "like", "right"};
const Pool kClarifyObjects = {"facts", "elephant", "everything", "it", "that", "enough"};

struct Token {
  std::string word;
  std::string tag;
};

struct Sketch {
  std::vector<Token> tokens;
  char terminator = '.';
};

class Builder {
 public:
  explicit Builder(Rng& rng) : rng_(rng) {}
  Builder& add(const std::string& word, const std::string& tag) {
    sketch_.tokens.push_back({word, tag});
    return *this;
  }
  Builder& from(const Pool& pool, const std::string& tag) { return add(rng_.pick(pool), tag); }
  Builder& maybe(double p, const Pool& pool, const std::string& tag) {
    if (rng_.bernoulli(p)) from(pool, tag);
    return *this;
  }
  Builder& end(char terminator) {
    sketch_.terminator = terminator;
    return *this;
  }
  Sketch take() { return std::move(sketch_); }

 private:
  Rng& rng_;
  Sketch sketch_;
};

const Pool& nouns_for(Task task) {
  switch (task) {
    case Task::cookie: return kCookieNouns;
    case Task::recall: return kRecallNouns;
    case Task::other: return kOtherNouns;
  }
  return kOtherNouns;
}

// Determiner-noun-participle scene description.
Sketch control_scene(Rng& rng, Task task) {
  const Pool& nouns = nouns_for(task);
  Builder b(rng);
  switch (rng.below(5)) {
    case 0:  // the boy is taking a cookie
      b.from(kDets, "det").from(nouns, "n").add("is", "aux").from(kPresp, "presp").from(kDets, "det").from(nouns, "n");
      break;
    case 1:  // the stool is tipped
      b.from(kDets, "det").from(nouns, "n").add("is", "aux").from(kPart, "part");
      break;
    case 2:  // the water is running from the sink
      b.from(kDets, "det").from(nouns, "n").add("is", "aux").from(kPresp, "presp").from(kPreps, "prep")
          .from(kDets, "det").from(nouns, "n");
      break;
    case 3:  // the dishes are stacked in the cupboard
      b.from(kDets, "det").from(nouns, "n").add("are", "aux").from(kPart, "part").from(kPreps, "prep")
          .from(kDets, "det").from(nouns, "n");
      break;
    default:  // the mother drying the dishes is distracted
      b.from(kDets, "det").from(nouns, "n").from(kPresp, "presp").from(kDets, "det").from(nouns, "n")
          .add("is", "aux").from(kPart, "part");
      break;
  }
  return b.end('.').take();
}

Sketch control_recall(Rng& rng) {
  Builder b(rng);
  if (rng.bernoulli(0.5)) {  // the man was driving the car to the park
    b.from(kDets, "det").from(kRecallNouns, "n").add("was", "aux").from(kPresp, "presp").from(kDets, "det")
        .from(kRecallNouns, "n");
    if (rng.bernoulli(0.5)) b.from(kPreps, "prep").from(kDets, "det").from(kRecallNouns, "n");
  } else {  // the money was lost on the road
    b.from(kDets, "det").from(kRecallNouns, "n").add("was", "aux").from(kPart, "part").from(kPreps, "prep")
        .from(kDets, "det").from(kRecallNouns, "n");
  }
  return b.end('.').take();
}

Sketch control_short(Rng& rng) {
  Builder b(rng);
  switch (rng.below(3)) {
    case 0: b.add("okay", "co"); break;
    case 1: b.add("alright", "co"); break;
    default: b.add("oh", "co").add("my", "co"); break;
  }
  return b.end('.').take();
}

// Short answers and bursts split by pauses: one to three tokens.
Sketch ad_burst(Rng& rng) {
  static const std::vector<Token> burst = {{"okay", "co"}, {"yes", "co"},  {"oh", "co"},   {"fine", "adj"},
                                           {"and", "conj"}, {"no", "co"},  {"alright", "co"}, {"sure", "co"},
                                           {"uh", "co"},   {"um", "co"}};
  Builder b(rng);
  const std::size_t n = 1 + rng.below(3);
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = rng.pick(burst);
    b.add(t.word, t.tag);
  }
  return b.end(rng.bernoulli(0.3) ? '!' : '.').take();
}

// Repeated requests for clarification, in the past tense.
Sketch ad_clarify(Rng& rng) {
  Builder b(rng);
  switch (rng.below(3)) {
    case 0:  // did i say facts ?
      b.add("did", "aux").add("i", "pro").from({"say", "get", "tell", "see"}, "v").from(kClarifyObjects, "n");
      break;
    case 1:  // did i get any ?
      b.add("did", "aux").add("i", "pro").from({"get", "say", "do"}, "v").add("any", "pro");
      break;
    default:  // what did i say ?
      b.add("what", "pro").add("did", "aux").add("i", "pro").from({"say", "do", "tell"}, "v");
      break;
  }
  return b.end('?').take();
}

// Starting with an interjection, with fillers mixed in.
Sketch ad_interjection(Rng& rng, Task task) {
  Builder b(rng);
  b.from(kInterjections, "co").add("i", "pro").maybe(0.5, kAdv, "adv").from(kPresentVerbs, "v");
  b.maybe(0.6, kFillers, "co");
  if (rng.bernoulli(0.5)) {
    b.from(kDets, "det").maybe(0.4, kFillers, "co").from(nouns_for(task), "n");
  } else {
    b.from(kPronouns, "pro");
  }
  return b.end('.').take();
}

// Adjective- and adverb-heavy picture description.
Sketch ad_description(Rng& rng) {
  Builder b(rng);
  if (rng.bernoulli(0.5)) {  // the big boy is very high
    b.from(kDets, "det").from(kAdj, "adj").from(kCookieNouns, "n").add("is", "aux").from(kAdv, "adv")
        .from(kAdj, "adj");
  } else {  // the little girl really wants a nice cookie
    b.from(kDets, "det").from(kAdj, "adj").from(kCookieNouns, "n").from(kAdv, "adv")
        .from({"wants", "has", "gets", "likes"}, "v").from(kDets, "det").maybe(0.7, kAdj, "adj")
        .from(kCookieNouns, "n");
  }
  b.maybe(0.3, kFillers, "co");
  return b.end('.').take();
}

// Story recall with interjections, fillers, pronouns and past-tense verbs.
Sketch ad_recall(Rng& rng) {
  Builder b(rng);
  b.from(kFillers, "co");
  if (rng.bernoulli(0.5)) {
    b.from(kPronouns, "pro");
  } else {
    b.add("the", "det").from(kRecallNouns, "n");
  }
  b.maybe(0.5, kFillers, "co").from(kPastVerbs, "v");
  if (rng.bernoulli(0.6)) b.from(kPronouns, "pro");
  else b.add("the", "det").from(kRecallNouns, "n");
  b.maybe(0.4, kFillers, "co");
  return b.end('.').take();
}

// A scene description led by a discourse word whose POS reading depends on
// the speaker's class.
Sketch discourse(Rng& rng, Task task, Label label) {
  Builder b(rng);
  b.from(kDiscourseWords, label == Label::ad ? "co" : "adv");
  Sketch body = control_scene(rng, task);
  Sketch out = b.take();
  for (auto& t : body.tokens) out.tokens.push_back(std::move(t));
  out.terminator = '.';
  return out;
}

Family draw_family(Rng& rng, Label label, Task task) {
  const double u = rng.uniform();
  if (label == Label::ad) {
    if (u < 0.25) return Family::ad_burst;
    if (u < 0.37) return Family::ad_clarify;
    if (u < 0.62) return Family::ad_interjection;
    if (u < 0.85) {
      if (task == Task::cookie) return Family::ad_description;
      if (task == Task::recall) return Family::ad_recall;
      return rng.bernoulli(0.5) ? Family::ad_description : Family::ad_recall;
    }
    if (u < 0.95) return Family::discourse;
    return task == Task::recall ? Family::control_recall : Family::control_scene;
  }
  if (u < 0.85) return task == Task::recall ? Family::control_recall : Family::control_scene;
  if (u < 0.95) return Family::discourse;
  return Family::control_short;
}

Sketch realize(Family family, Rng& rng, Task task, Label label) {
  switch (family) {
    case Family::ad_burst: return ad_burst(rng);
    case Family::ad_clarify: return ad_clarify(rng);
    case Family::ad_interjection: return ad_interjection(rng, task);
    case Family::ad_description: return ad_description(rng);
    case Family::ad_recall: return ad_recall(rng);
    case Family::control_scene: return control_scene(rng, task);
    case Family::control_recall: return control_recall(rng);
    case Family::control_short: return control_short(rng);
    case Family::discourse: return discourse(rng, task, label);
  }
  return control_short(rng);
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::ad_burst: return "ad_burst";
    case Family::ad_clarify: return "ad_clarify";
    case Family::ad_interjection: return "ad_interjection";
    case Family::ad_description: return "ad_description";
    case Family::ad_recall: return "ad_recall";
    case Family::control_scene: return "control_scene";
    case Family::control_recall: return "control_recall";
    case Family::control_short: return "control_short";
    case Family::discourse: return "discourse";
  }
  return "unknown";
}

SyntheticCorpus generate_synthetic_corpus(std::size_t n_transcripts, std::uint64_t seed,
                                          const SyntheticOptions& options) {
  if (n_transcripts < 2) throw PreconditionError("synthetic corpus needs at least 2 transcripts");
  if (!(options.ad_fraction > 0.0 && options.ad_fraction < 1.0)) {
    throw ConfigError("ad_fraction must lie in (0, 1)");
  }
  if (options.min_utterances == 0 || options.min_utterances > options.max_utterances) {
    throw ConfigError("utterance range must satisfy 1 <= min <= max");
  }
  const auto n_ad = static_cast<std::size_t>(std::llround(static_cast<double>(n_transcripts) * options.ad_fraction));

  Rng rng(seed);
  std::vector<Label> labels(n_transcripts, Label::control);
  for (std::size_t i = 0; i < n_ad; ++i) labels[i] = Label::ad;
  rng.shuffle(labels);

  // Genders are allocated within each class so every class keeps the
  // requested female share; independent draws can leave the female pool of
  // one class smaller than the male one, which the gender protocol rejects.
  std::vector<Gender> genders(n_transcripts, Gender::male);
  Rng gender_rng = rng.derive("gender");
  for (const Label cls : {Label::ad, Label::control}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n_transcripts; ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    gender_rng.shuffle(members);
    const auto n_female =
        static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * options.female_fraction));
    for (std::size_t j = 0; j < n_female; ++j) genders[members[j]] = Gender::female;
  }

  SyntheticCorpus out;
  out.transcripts.reserve(n_transcripts);
  for (std::size_t i = 0; i < n_transcripts; ++i) {
    Transcript t;
    char id[16];
    std::snprintf(id, sizeof id, "syn%04zu", i);
    t.id = id;
    t.diagnosis = labels[i];
    t.gender = genders[i];
    t.task = std::array{Task::cookie, Task::recall, Task::other}[rng.below(3)];
    t.language = "eng";
    t.corpus = "synthetic";
    t.age = std::to_string(55 + rng.below(31)) + ";";

    const std::size_t n_utt =
        options.min_utterances + rng.below(options.max_utterances - options.min_utterances + 1);
    for (std::size_t k = 0; k < n_utt; ++k) {
      const Family family = draw_family(rng, t.diagnosis, t.task);
      Sketch sketch = realize(family, rng, t.task, t.diagnosis);
      Utterance u;
      u.transcript_id = t.id;
      u.index = k;
      u.label = t.diagnosis;
      u.task = t.task;
      u.gender = t.gender;
      u.terminator = sketch.terminator;
      std::vector<PosTag> tags;
      for (auto& token : sketch.tokens) {
        u.words.push_back(std::move(token.word));
        tags.emplace_back(std::move(token.tag));
      }
      u.pos = std::move(tags);
      out.families[{t.id, k}] = family;
      t.utterances.push_back(std::move(u));
    }
    out.transcripts.push_back(std::move(t));
  }
  return out;
}

}  // namespace adling::corpus
