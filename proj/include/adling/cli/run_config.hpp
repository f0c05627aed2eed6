#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adling::cli {

enum class ValueKind { text, size, real, boolean, seed, choice };

struct KeySpec {
  std::string key;
  std::string default_value;
  ValueKind kind = ValueKind::text;
  std::string help;
  std::vector<std::string> choices;  // for ValueKind::choice
  bool allows_auto = false;          // "auto" resolves from other keys
};

/// Every recognized key, in the order config.resolved lists them.
const std::vector<KeySpec>& key_specs();
const KeySpec* find_key(std::string_view key);

/// Flat key=value configuration. Later sources override earlier ones:
/// built-in defaults, then a config file, then command-line flags.
class RunConfig {
 public:
  RunConfig();  // defaults

  /// Lines are `key = value`; blank lines and `#` comments are skipped.
  /// Throws ConfigError on unknown keys or malformed lines.
  void load_text(std::string_view text);
  void load_file(const std::filesystem::path& path);

  /// Throws ConfigError for unknown keys or values of the wrong kind.
  void set(const std::string& key, const std::string& value);

  /// Like set, but a key the user gave explicitly keeps its value. Used when
  /// a checkpoint supplies the settings it was trained under.
  void adopt(const std::string& key, const std::string& value);
  bool is_explicit(const std::string& key) const { return explicit_.count(key) > 0; }

  /// Resolves only the "auto" paths (corpus, checkpoint).
  void resolve_paths();

  /// Replaces every "auto" with its concrete value (paths under `out`,
  /// architecture defaults for the model keys, batch size, max_len).
  void resolve();

  const std::string& get(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const { return get(key); }
  bool is_auto(const std::string& key) const { return get(key) == "auto"; }

  /// One `key=value` line per key in key_specs() order.
  std::string resolved_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

/// Exclusive ownership of an output directory: creates `<dir>/.lock` or
/// throws UsageError when another run holds it. Removed on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path file_;
};

}  // namespace adling::cli
