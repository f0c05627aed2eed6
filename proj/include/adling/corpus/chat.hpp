#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "adling/corpus/types.hpp"

namespace adling::corpus {

// CHAT-lite: the subset of the CHAT transcription format carrying the
// participant header, *PAR utterances and their %mor tiers.
//
//   @Begin
//   @ID:    eng|pitt|PAR|66;|female|AD|Cookie
//   *PAR:   well okay .
//   %mor:   co|well co|okay .
//   *INV:   what else ?
//   @End
//
// Tokens are lowercased, punctuation tokens dropped, and the terminator kept
// on the utterance. A %mor tier whose item count differs from the word count
// leaves the utterance without POS tags.

/// Throws FormatError on an empty file, a malformed @ID header, or a
/// dependent tier with no preceding main tier.
Transcript parse_chat(std::string_view file_text, std::string transcript_id = {});

/// Emits the canonical single-tab form.
std::string serialize_chat(const Transcript& transcript);

/// Maps one %mor item ("pro:sub|she", "v|wash-PRESP", "det|the") onto its
/// POS category; returns an empty string for items without a category.
std::string mor_item_category(std::string_view item);

Transcript read_chat_file(const std::filesystem::path& path);
void write_chat_file(const std::filesystem::path& path, const Transcript& transcript);

/// Reads every *.cha file under `dir` in filename order.
std::vector<Transcript> load_corpus_dir(const std::filesystem::path& dir);

/// Writes `<id>.cha` for each transcript into `dir` (created if needed).
void write_corpus_dir(const std::filesystem::path& dir, const std::vector<Transcript>& corpus);

}  // namespace adling::corpus
