#include "adling/corpus/types.hpp"

#include <algorithm>
#include <cctype>

#include "adling/error.hpp"

namespace adling::corpus {

std::string_view to_string(Label label) { return label == Label::ad ? "AD" : "Control"; }

std::string_view to_string(Task task) {
  switch (task) {
    case Task::cookie: return "Cookie";
    case Task::recall: return "Recall";
    case Task::other: return "Other";
  }
  return "Other";
}

std::string_view to_string(Gender gender) {
  switch (gender) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

Label parse_label(std::string_view text, std::size_t line) {
  if (text == "AD") return Label::ad;
  if (text == "Control") return Label::control;
  throw FormatError(line, "unknown diagnosis '" + std::string(text) + "'");
}

Task parse_task(std::string_view text, std::size_t line) {
  if (text == "Cookie") return Task::cookie;
  if (text == "Recall") return Task::recall;
  if (text == "Other") return Task::other;
  throw FormatError(line, "unknown task '" + std::string(text) + "'");
}

Gender parse_gender(std::string_view text, std::size_t line) {
  if (text == "male") return Gender::male;
  if (text == "female") return Gender::female;
  if (text == "unknown") return Gender::unknown;
  throw FormatError(line, "unknown gender '" + std::string(text) + "'");
}

const std::vector<std::string>& core_pos_tags() {
  static const std::vector<std::string> tags = {"v",  "n",    "pro",  "adv",   "det", "aux",
                                                "prep", "co", "part", "presp", "adj"};
  return tags;
}

PosTag::PosTag(std::string tag) : tag_(std::move(tag)) {
  if (tag_.empty()) throw FormatError(0, "empty POS tag");
  for (unsigned char c : tag_) {
    if (std::isspace(c) || std::isupper(c)) {
      throw FormatError(0, "POS tag '" + tag_ + "' must be lowercase without whitespace");
    }
  }
}

bool PosTag::is_core() const {
  const auto& core = core_pos_tags();
  return std::find(core.begin(), core.end(), tag_) != core.end();
}

}  // namespace adling::corpus
