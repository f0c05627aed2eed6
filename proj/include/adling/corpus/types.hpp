#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adling::corpus {

enum class Label { control = 0, ad = 1 };
enum class Task { cookie, recall, other };
enum class Gender { male, female, unknown };

std::string_view to_string(Label label);
std::string_view to_string(Task task);
std::string_view to_string(Gender gender);

// These throw FormatError(line) on unknown text.
Label parse_label(std::string_view text, std::size_t line = 0);
Task parse_task(std::string_view text, std::size_t line = 0);
Gender parse_gender(std::string_view text, std::size_t line = 0);

/// A part-of-speech category from a %mor tier. The core set is
/// {v, n, pro, adv, det, aux, prep, co, part, presp, adj}; anything else is
/// kept as an open-set extension tag.
class PosTag {
 public:
  /// Throws FormatError when the text is empty, not lowercase, or has whitespace.
  explicit PosTag(std::string tag);

  const std::string& str() const { return tag_; }
  bool is_core() const;

  friend bool operator==(const PosTag&, const PosTag&) = default;
  friend auto operator<=>(const PosTag&, const PosTag&) = default;

 private:
  std::string tag_;
};

const std::vector<std::string>& core_pos_tags();

struct Utterance {
  std::string transcript_id;
  std::size_t index = 0;
  std::vector<std::string> words;
  std::optional<std::vector<PosTag>> pos;
  Label label = Label::control;
  Task task = Task::other;
  Gender gender = Gender::unknown;
  char terminator = '.';

  bool has_pos() const { return pos.has_value(); }
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Transcript {
  std::string id;
  Label diagnosis = Label::control;
  Gender gender = Gender::unknown;
  Task task = Task::other;
  // @ID fields that carry no modeling meaning but must survive a round trip.
  std::string language = "eng";
  std::string corpus = "synthetic";
  std::string age;
  std::vector<Utterance> utterances;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

using UtterancePtr = std::shared_ptr<const Utterance>;

}  // namespace adling::corpus
