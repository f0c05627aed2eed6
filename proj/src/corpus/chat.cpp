#include "adling/corpus/chat.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "adling/error.hpp"

namespace adling::corpus {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_punctuation_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Tier {
  std::size_t line;
  std::string text;
};

// Joins CHAT continuation lines (leading tab) onto the previous tier.
std::vector<Tier> read_tiers(std::string_view text) {
  std::vector<Tier> tiers;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!line.empty() && line.front() == '\t' && !tiers.empty()) {
      tiers.back().text += ' ';
      tiers.back().text += trim(line);
    } else if (!trim(line).empty()) {
      tiers.push_back({line_no, std::string(line)});
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return tiers;
}

struct MainTier {
  std::vector<std::string> words;
  char terminator = '.';
};

MainTier parse_main_tier(std::string_view content) {
  MainTier tier;
  for (std::string_view token : split_whitespace(content)) {
    if (is_punctuation_token(token)) {
      if (token.size() == 1 && is_terminator(token[0])) tier.terminator = token[0];
      continue;
    }
    while (!token.empty() && is_terminator(token.back())) {
      tier.terminator = token.back();
      token.remove_suffix(1);
    }
    if (!token.empty()) tier.words.push_back(lowercase(token));
  }
  return tier;
}

// Empty optional when any item lacks a category.
std::optional<std::vector<PosTag>> parse_mor_tier(std::string_view content) {
  std::vector<PosTag> tags;
  for (std::string_view item : split_whitespace(content)) {
    if (is_punctuation_token(item)) continue;
    std::string category = mor_item_category(item);
    if (category.empty()) return std::nullopt;
    tags.emplace_back(std::move(category));
  }
  return tags;
}

}  // namespace

std::string mor_item_category(std::string_view item) {
  // Clitic groups ("pro|it~aux|be&3S") contribute their first item.
  item = item.substr(0, item.find('~'));
  const std::size_t bar = item.find('|');
  if (bar == std::string_view::npos || bar == 0) return {};
  const std::string_view lemma = item.substr(bar + 1);
  if (lemma.find("-PRESP") != std::string_view::npos) return "presp";
  if (lemma.find("-PASTP") != std::string_view::npos || lemma.find("-PERF") != std::string_view::npos) {
    return "part";
  }
  std::string_view category = item.substr(0, bar);
  category = category.substr(0, category.find(':'));
  if (category.empty()) return {};
  return lowercase(category);
}

Transcript parse_chat(std::string_view file_text, std::string transcript_id) {
  const std::vector<Tier> tiers = read_tiers(file_text);
  if (tiers.empty()) throw FormatError(1, "empty file");

  Transcript transcript;
  transcript.id = std::move(transcript_id);
  bool have_header = false;
  enum class Speaker { none, participant, skipped_participant, other } last = Speaker::none;
  bool mor_seen = false;

  for (const Tier& tier : tiers) {
    const std::string_view text = tier.text;
    if (text.front() == '@') {
      if (text.rfind("@ID:", 0) != 0) continue;
      const auto fields = split(trim(text.substr(4)), '|');
      if (fields.size() < 3) throw FormatError(tier.line, "@ID header needs '|'-separated fields");
      if (trim(fields[2]) != "PAR") continue;
      if (fields.size() < 7) {
        throw FormatError(tier.line, "@ID header for PAR needs 7 fields, got " + std::to_string(fields.size()));
      }
      transcript.language = std::string(trim(fields[0]));
      transcript.corpus = std::string(trim(fields[1]));
      transcript.age = std::string(trim(fields[3]));
      transcript.gender = parse_gender(trim(fields[4]), tier.line);
      transcript.diagnosis = parse_label(trim(fields[5]), tier.line);
      transcript.task = parse_task(trim(fields[6]), tier.line);
      have_header = true;
    } else if (text.front() == '*') {
      const std::size_t colon = text.find(':');
      if (colon == std::string_view::npos) throw FormatError(tier.line, "speaker tier without ':'");
      if (text.substr(1, colon - 1) != "PAR") {
        last = Speaker::other;
        continue;
      }
      if (!have_header) throw FormatError(tier.line, "*PAR tier before the participant @ID header");
      MainTier main = parse_main_tier(text.substr(colon + 1));
      mor_seen = false;
      if (main.words.empty()) {
        last = Speaker::skipped_participant;
        continue;
      }
      Utterance u;
      u.transcript_id = transcript.id;
      u.index = transcript.utterances.size();
      u.words = std::move(main.words);
      u.terminator = main.terminator;
      u.label = transcript.diagnosis;
      u.task = transcript.task;
      u.gender = transcript.gender;
      transcript.utterances.push_back(std::move(u));
      last = Speaker::participant;
    } else if (text.front() == '%') {
      const std::size_t colon = text.find(':');
      if (colon == std::string_view::npos) throw FormatError(tier.line, "dependent tier without ':'");
      if (last == Speaker::none) throw FormatError(tier.line, "dependent tier before any speaker tier");
      if (last != Speaker::participant || text.substr(1, colon - 1) != "mor") continue;
      if (mor_seen) throw FormatError(tier.line, "second %mor tier for one utterance");
      mor_seen = true;
      Utterance& u = transcript.utterances.back();
      auto tags = parse_mor_tier(text.substr(colon + 1));
      if (tags && tags->size() == u.words.size()) u.pos = std::move(tags);
    } else {
      throw FormatError(tier.line, "unrecognized line");
    }
  }
  if (!have_header) throw FormatError(tiers.front().line, "missing @ID header for PAR");
  return transcript;
}

std::string serialize_chat(const Transcript& t) {
  std::ostringstream out;
  out << "@Begin\n";
  out << "@ID:\t" << t.language << '|' << t.corpus << "|PAR|" << t.age << '|' << to_string(t.gender) << '|'
      << to_string(t.diagnosis) << '|' << to_string(t.task) << '\n';
  for (const Utterance& u : t.utterances) {
    out << "*PAR:\t";
    for (const auto& w : u.words) out << w << ' ';
    out << u.terminator << '\n';
    if (u.pos) {
      out << "%mor:\t";
      for (std::size_t i = 0; i < u.words.size(); ++i) out << (*u.pos)[i].str() << '|' << u.words[i] << ' ';
      out << u.terminator << '\n';
    }
  }
  out << "@End\n";
  return out.str();
}

Transcript read_chat_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_chat(buffer.str(), path.stem().string());
  } catch (const FormatError& e) {
    throw FormatError(e.line(), path.filename().string() + ": " + e.what());
  }
}

void write_chat_file(const std::filesystem::path& path, const Transcript& transcript) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << serialize_chat(transcript);
}

std::vector<Transcript> load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw PreconditionError("corpus directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cha") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Transcript> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(read_chat_file(f));
  return corpus;
}

void write_corpus_dir(const std::filesystem::path& dir, const std::vector<Transcript>& corpus) {
  std::filesystem::create_directories(dir);
  for (const Transcript& t : corpus) write_chat_file(dir / (t.id + ".cha"), t);
}

}  // namespace adling::corpus
