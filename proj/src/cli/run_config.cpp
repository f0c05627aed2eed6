#include "adling/cli/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adling/corpus/dataset.hpp"
#include "adling/error.hpp"
#include "adling/models/config.hpp"
#include "adling/training/trainer.hpp"

namespace adling::cli {
namespace {

using K = ValueKind;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parses_size(const std::string& v) {
  if (v.empty() || v.size() > 18) return false;
  return std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool parses_real(const std::string& v) {
  try {
    std::size_t used = 0;
    std::stod(v, &used);
    return used == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parses_seed(const std::string& v) {
  if (v.empty() || v.size() > 20) return false;
  if (!std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  try {
    std::stoull(v);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool parses_size_list(const std::string& v) {
  std::stringstream in(v);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    if (!parses_size(item)) return false;
    any = true;
  }
  return any;
}

void check_value(const KeySpec& spec, const std::string& value) {
  if (spec.allows_auto && value == "auto") return;
  bool ok = true;
  std::string expected;
  switch (spec.kind) {
    case K::text:
      // filter_sizes is the one list-valued key
      if (spec.key == "filter_sizes") {
        ok = value == "none" || parses_size_list(value);
        expected = "a comma-separated list of window sizes";
      }
      break;
    case K::size: ok = parses_size(value); expected = "a nonnegative integer"; break;
    case K::real: ok = parses_real(value); expected = "a real number"; break;
    case K::boolean:
      ok = value == "true" || value == "false" || value == "1" || value == "0";
      expected = "true or false";
      break;
    case K::seed: ok = parses_seed(value); expected = "an unsigned 64-bit integer"; break;
    case K::choice: {
      ok = std::find(spec.choices.begin(), spec.choices.end(), value) != spec.choices.end();
      expected = "one of";
      for (const auto& c : spec.choices) expected += " " + c;
      break;
    }
  }
  if (!ok) throw ConfigError("key '" + spec.key + "' expects " + expected + ", got '" + value + "'");
}

}  // namespace

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      // paths and the root seed
      {"corpus", "auto", K::text, "corpus directory of *.cha files (auto: <out>/synth/corpus)", {}, true},
      {"out", "out", K::text, "output root; each command writes <out>/<command>/", {}, false},
      {"checkpoint", "auto", K::text, "checkpoint directory (auto: <out>/train/checkpoint)", {}, true},
      {"seed", "1", K::seed, "root seed of every random substream", {}, false},
      // synth
      {"n", "100", K::size, "synth: number of transcripts", {}, false},
      {"ad_fraction", "0.67", K::real, "synth: share of AD transcripts", {}, false},
      {"female_fraction", "0.6", K::real, "synth: share of female speakers", {}, false},
      {"min_utterances", "8", K::size, "synth: fewest utterances per transcript", {}, false},
      {"max_utterances", "16", K::size, "synth: most utterances per transcript", {}, false},
      // data
      {"require_pos", "true", K::boolean, "drop utterances without an aligned %mor tier", {}, false},
      {"utterance_limit", "0", K::size, "keep only the first N retained utterances (0: all)", {}, false},
      {"vocab_size", "2396", K::size, "vocabulary cap including PAD and OOV", {}, false},
      {"max_len", "auto", K::size, "encoded length (auto: 32 untagged, 64 tagged)", {}, true},
      {"split_unit", "utterance", K::choice, "split by utterance or by transcript", {"utterance", "transcript"}, false},
      {"train_ratio", "0.8", K::real, "train share of the split", {}, false},
      {"dev_ratio", "0.1", K::real, "dev share of the split", {}, false},
      {"test_ratio", "0.1", K::real, "test share of the split", {}, false},
      // model
      {"arch", "cnn_lstm", K::choice, "architecture", {"cnn", "lstm", "cnn_lstm"}, false},
      {"tagged", "false", K::boolean, "interleave <pos:TAG> tokens with the words", {}, false},
      {"embed_dim", "auto", K::size, "embedding width (auto: architecture default)", {}, true},
      {"filter_sizes", "auto", K::text, "convolution windows, e.g. 3,4,5", {}, true},
      {"filters_per_size", "auto", K::size, "filters per window", {}, true},
      {"layers", "auto", K::size, "stacked LSTM layers", {}, true},
      {"hidden", "auto", K::size, "LSTM units", {}, true},
      {"keep_prob", "auto", K::real, "feedforward dropout keep probability", {}, true},
      {"recurrent_keep_prob", "auto", K::real, "recurrent dropout keep probability", {}, true},
      // training
      {"epochs", "50", K::size, "maximum epochs", {}, false},
      {"patience", "5", K::size, "epochs without dev improvement before stopping", {}, false},
      {"batch_size", "auto", K::size, "minibatch size (auto: 128 cnn, 32 otherwise)", {}, true},
      {"lr", "0.0001", K::real, "Adam learning rate", {}, false},
      {"clip_norm", "2.0", K::real, "global gradient norm cap", {}, false},
      // eval
      {"eval_split", "test", K::choice, "subset eval scores", {"train", "dev", "test", "all"}, false},
      {"error_frac", "0.1", K::real, "share of misclassified Control samples listed (0: no error report)", {}, false},
      {"short_threshold", "3", K::size, "word count at or below which an utterance is short", {}, false},
      // cluster
      {"k", "10", K::size, "clusters", {}, false},
      {"probe", "auto", K::text, "activation probe (auto: pooled for cnn, h_final otherwise)", {}, true},
      {"task", "per-task", K::choice, "cluster each task separately, all together, or one task",
       {"per-task", "all", "Cookie", "Recall", "Other"}, false},
      {"restarts", "5", K::size, "k-means restarts (best inertia kept)", {}, false},
      {"max_iter", "100", K::size, "k-means iteration cap", {}, false},
      {"top_k", "4", K::size, "tags listed per cluster", {}, false},
      // saliency
      {"ids", "", K::text, "utterances as <transcript>_<index>, comma-separated (empty: first `limit` test samples)",
       {}, false},
      {"limit", "20", K::size, "heatmaps written when ids is empty", {}, false},
      {"format", "html", K::choice, "heatmap format", {"text", "html", "svg"}, false},
      {"score", "l2", K::choice, "per-token reduction of the gradient", {"l2", "abs_sum"}, false},
      {"target", "predicted", K::choice, "class whose logit is differentiated", {"predicted", "true"}, false},
      // gender
      {"mode", "train-per-subset", K::choice, "gender protocol", {"train-per-subset", "eval-shared"}, false},
      {"n_resamples", "10000", K::size, "bootstrap resamples", {}, false},
      {"pos_top", "10", K::size, "AD POS tags listed per gender", {}, false},
  };
  return specs;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& s : key_specs()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

RunConfig::RunConfig() {
  for (const auto& s : key_specs()) values_[s.key] = s.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown key '" + key + "'");
  check_value(*spec, value);
  values_[key] = value;
  explicit_.insert(key);
}

void RunConfig::adopt(const std::string& key, const std::string& value) {
  if (is_explicit(key)) return;
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown key '" + key + "'");
  check_value(*spec, value);
  values_[key] = value;
}

void RunConfig::load_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key=value, got '" + t + "'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + std::string(e.what()).substr(21));
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  load_text(buf.str());
}

void RunConfig::resolve_paths() {
  const std::filesystem::path out = get("out");
  if (is_auto("corpus")) values_["corpus"] = (out / "synth" / "corpus").string();
  if (is_auto("checkpoint")) values_["checkpoint"] = (out / "train" / "checkpoint").string();
}

void RunConfig::resolve() {
  resolve_paths();
  if (is_auto("probe")) values_["probe"] = get("arch") == "cnn" ? "pooled" : "h_final";

  const auto arch = models::parse_architecture(get("arch"));
  if (is_auto("max_len")) values_["max_len"] = std::to_string(corpus::default_max_len(get_bool("tagged")));
  if (is_auto("batch_size")) values_["batch_size"] = std::to_string(training::default_batch_size(arch));

  const auto defaults = models::default_config(arch).to_key_values();
  for (const char* key : {"embed_dim", "filter_sizes", "filters_per_size", "layers", "hidden", "keep_prob",
                          "recurrent_keep_prob"}) {
    if (is_auto(key)) values_[key] = defaults.at(key);
  }
  // An lstm has no filter bank; echo nothing rather than a dangling list.
  if (values_["filter_sizes"].empty()) values_["filter_sizes"] = "none";
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const std::string& v = get(key);
  if (!parses_size(v)) throw ConfigError("key '" + key + "' is not resolved to an integer ('" + v + "')");
  return static_cast<std::size_t>(std::stoull(v));
}

double RunConfig::get_real(const std::string& key) const {
  const std::string& v = get(key);
  if (!parses_real(v)) throw ConfigError("key '" + key + "' is not resolved to a number ('" + v + "')");
  return std::stod(v);
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  return v == "true" || v == "1";
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
  const std::string& v = get(key);
  if (!parses_seed(v)) throw ConfigError("key '" + key + "' is not a seed ('" + v + "')");
  return std::stoull(v);
}

std::string RunConfig::resolved_text() const {
  std::string text;
  for (const auto& s : key_specs()) text += s.key + "=" + values_.at(s.key) + "\n";
  return text;
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : file_(dir / ".lock") {
  std::filesystem::create_directories(dir);
  std::FILE* f = std::fopen(file_.c_str(), "wx");
  if (f == nullptr) {
    file_.clear();
    throw UsageError("output directory " + dir.string() + " is locked by another run (remove " +
                     (dir / ".lock").string() + " if stale)");
  }
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  if (file_.empty()) return;
  std::error_code ec;
  std::filesystem::remove(file_, ec);
}

}  // namespace adling::cli
